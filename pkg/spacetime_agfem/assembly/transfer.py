"""Coupling of consecutive slabs through the trace at t^n.

The previous solution lives on the previous reference mesh; at t^n its
domain is that mesh pushed forward by the previous deformation. Three rules
evaluate it at quadrature points of the current initial face:

- INITIAL: the first slab, u_0 given as a function;
- SAME_MESH: the current reference mesh is the deformed previous one, so
  reference coordinates carry over cell by cell;
- INTERSECTION: points come from the triple intersection and are pulled
  back through the deformed previous simplices.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy import sparse

from ..exceptions import ConfigurationError
from ..fe.evaluation import scatter_matrix, scatter_vector, shape_batch, shape_batch_reference
from ..fe.quadrature import CutQuadrature, QuadratureBatch, piece_batch
from ..fe.space import SpaceTimeSpace
from ..geometry.intersection import DeformedSimplices, IntersectionMesh

logger = logging.getLogger(__name__)


class TransferKind(str, Enum):
    """How the previous trace is evaluated."""

    INITIAL = "initial"
    SAME_MESH = "same_mesh"
    INTERSECTION = "intersection"


@dataclass(eq=False)
class PreviousSlab:
    """Solution of the previous slab and its deformed mesh at t^n.

    Attributes:
        space: Scalar space-time space of the previous slab.
        coefficients: Previous solution, time-major.
        simplices: Previous mesh pushed forward to t^n.
    """

    space: SpaceTimeSpace
    coefficients: np.ndarray
    simplices: Optional[DeformedSimplices] = None

    def end_values(self) -> np.ndarray:
        """Spatial coefficients of u_h^{n-1}(t^n)."""
        return self.space.at_time(self.coefficients, 1.0)

    def evaluate(self, cells: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """u_h^{n-1}(t^n) at reference coordinates xi (k, nq, 2) of previous cells."""
        batch = shape_batch_reference(self.space.spatial, cells, xi)
        return batch.interpolate(self.end_values())


@dataclass(eq=False)
class TransferRule:
    """Quadrature of the current initial face with previous-side coordinates.

    Attributes:
        kind: Evaluation rule.
        batches: Current-side batches; points in the current reference domain.
        previous_cells: Previous parent per batch entry, one array per batch.
        previous_xi: Previous reference coordinates, one array per batch.
        initial: u_0 for the first slab.
    """

    kind: TransferKind
    batches: list[QuadratureBatch]
    previous_cells: Optional[list[np.ndarray]] = None
    previous_xi: Optional[list[np.ndarray]] = None
    initial: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def measure(self) -> float:
        return float(sum(batch.weights.sum() for batch in self.batches))

    @classmethod
    def initial_rule(cls, quadrature: CutQuadrature, initial: Callable[[np.ndarray], np.ndarray]) -> "TransferRule":
        """First slab: integrate against u_0 over the current caps."""
        return cls(TransferKind.INITIAL, list(quadrature.volume_batches), initial=initial)

    @classmethod
    def same_mesh(cls, quadrature: CutQuadrature, mesh) -> "TransferRule":
        """Cell-by-cell transfer between meshes that share topology and reference cells."""
        batches = list(quadrature.volume_batches)
        cells = [batch.cells for batch in batches]
        xis = [mesh.to_reference(batch.cells, batch.points) for batch in batches]
        return cls(TransferKind.SAME_MESH, batches, cells, xis)

    @classmethod
    def from_intersection(cls, intersection: IntersectionMesh, degree: int) -> "TransferRule":
        """Rule on the pieces of a triple intersection."""
        mesh = intersection.current_mesh
        parents = [cell.parent_current for cell in intersection.cells]
        batch, dropped = piece_batch(parents, [cell.pieces for cell in intersection.cells], degree, mesh.cell_diameters)
        if dropped:
            logger.debug(f"Dropped {dropped} zero-area intersection pieces")
        simplices = np.array([cell.previous_simplex for cell in intersection.cells], dtype=int)
        if len(simplices) == 0:
            return cls(TransferKind.INTERSECTION, [batch], [np.zeros(0, int)], [np.zeros((0, 1, 2))])
        prev_cells, xi = intersection.simplices.to_reference(simplices, batch.points)
        return cls(TransferKind.INTERSECTION, [batch], [prev_cells], [xi])

    def previous_values(self, previous: Optional[PreviousSlab]) -> list[np.ndarray]:
        """Previous trace at the rule's points, one (k, nq) array per batch."""
        if self.kind is TransferKind.INITIAL:
            if self.initial is None:
                return [np.zeros(batch.weights.shape) for batch in self.batches]
            return [
                np.broadcast_to(np.asarray(self.initial(batch.points), dtype=float), batch.weights.shape)
                for batch in self.batches
            ]
        if previous is None:
            raise ConfigurationError(f"{self.kind.value} transfer needs the previous slab")
        return [
            previous.evaluate(cells, xi) if len(cells) else np.zeros((0, 1))
            for cells, xi in zip(self.previous_cells, self.previous_xi)
        ]


@dataclass(eq=False)
class JumpCoupling:
    """Coupling vector int v(t^n) u^{n-1}(t^n) and the trace mass on the same rule."""

    rhs: np.ndarray
    mass: sparse.csr_matrix


def jump_coupling(space: SpaceTimeSpace, rule: TransferRule, previous: Optional[PreviousSlab] = None) -> JumpCoupling:
    """Assemble the previous-slab coupling of the current slab.

    Args:
        space: Current scalar space-time space.
        rule: Transfer quadrature.
        previous: Previous slab; not needed for the first slab.

    Returns:
        The coupling vector and the initial-face mass integrated with the
        same rule.
    """
    n = space.n_dofs
    rhs = np.zeros(n)
    mass = sparse.csr_matrix((n, n))
    psi0 = space.temporal.values(np.zeros(1))[0]
    for batch, values in zip(rule.batches, rule.previous_values(previous)):
        if len(batch) == 0:
            continue
        sb = shape_batch(space.spatial, batch.cells, batch.points)
        test = np.einsum("j,kqa->kqja", psi0, sb.values).reshape(len(batch), batch.weights.shape[1], -1)
        dofs = space.cell_dofs(batch.cells)
        rhs += scatter_vector(dofs, np.einsum("kq,kq,kqi->ki", batch.weights, values, test), n)
        local = np.einsum("kq,kqi,kqj->kij", batch.weights, test, test)
        mass = mass + scatter_matrix(dofs, dofs, local, (n, n))
    logger.debug(f"{rule.kind.value} transfer over measure {rule.measure:.6f}")
    return JumpCoupling(rhs, mass.tocsr())


def jump_squared(
    space: SpaceTimeSpace, coefficients: np.ndarray, rule: TransferRule, previous: Optional[PreviousSlab] = None,
    exact_initial: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> float:
    """Squared L2 norm over the initial face of u_h^n(t^n) minus the previous trace.

    For the first slab the previous trace is ``exact_initial`` (or the rule's u_0).
    """
    if rule.kind is TransferKind.INITIAL and exact_initial is not None:
        rule = TransferRule(TransferKind.INITIAL, rule.batches, initial=exact_initial)
    start = space.at_time(coefficients, 0.0)
    total = 0.0
    for batch, values in zip(rule.batches, rule.previous_values(previous)):
        if len(batch) == 0:
            continue
        current = shape_batch(space.spatial, batch.cells, batch.points).interpolate(start)
        total += float(np.sum(batch.weights * (current - values) ** 2))
    return total
