"""Shape-function batches on physical points and deterministic sparse scatter."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from .basis import TemporalBasis
from .space import SpatialSpace


@dataclass(eq=False)
class ShapeBatch:
    """Scalar shape functions of a space evaluated at points of several cells.

    Attributes:
        cells: Cell ids, shape (k,).
        nodes: Compact node numbers per cell, shape (k, n).
        values: Shape values, shape (k, nq, n).
        gradients: Gradients in reference-domain coordinates, shape (k, nq, n, 2).
        hessians: Second derivatives, shape (k, nq, n, 2, 2), when requested.
    """

    cells: np.ndarray
    nodes: np.ndarray
    values: np.ndarray
    gradients: np.ndarray
    hessians: Optional[np.ndarray] = None

    def _combine(self, shapes: np.ndarray, coefficients: np.ndarray, temporal: Optional[np.ndarray]) -> np.ndarray:
        nodal = np.asarray(coefficients)[..., self.nodes]
        if temporal is None:
            return np.einsum("kqn...,kn->kq...", shapes, nodal)
        return np.einsum("mj,kqn...,jkn->mkq...", temporal, shapes, nodal)

    def interpolate(self, coefficients: np.ndarray, temporal: Optional[np.ndarray] = None) -> np.ndarray:
        """Values of a scalar FE function with the given node coefficients.

        Args:
            coefficients: Node values, or layers of them (L, n_nodes) when
                ``temporal`` is given.
            temporal: Temporal basis values (m, L); adds a leading time axis.

        Returns:
            Values of shape (k, nq), or (m, k, nq) with ``temporal``.
        """
        return self._combine(self.values, coefficients, temporal)

    def interpolate_gradient(self, coefficients: np.ndarray, temporal: Optional[np.ndarray] = None) -> np.ndarray:
        return self._combine(self.gradients, coefficients, temporal)

    def interpolate_hessian(self, coefficients: np.ndarray, temporal: Optional[np.ndarray] = None) -> np.ndarray:
        if self.hessians is None:
            raise ValueError("shape batch was built without second derivatives")
        return self._combine(self.hessians, coefficients, temporal)


@dataclass(frozen=True, eq=False)
class TensorShapeSet:
    """Space-time shape functions phi_a(x) psi_j(t) on a batch of cells, ordered time-major.

    Attributes:
        batch: Spatial shape functions at the points of the cells.
        temporal: Temporal basis values at the time points, shape (m, n_t).
        rates: Temporal basis derivatives in physical time, shape (m, n_t).
    """

    batch: ShapeBatch
    temporal: np.ndarray
    rates: np.ndarray

    @classmethod
    def on_slab(cls, batch: ShapeBatch, basis: TemporalBasis, s: np.ndarray, tau: float) -> "TensorShapeSet":
        """Tensor set at unit slab times s of a slab of length tau."""
        return cls(batch, basis.values(s), basis.derivatives(s) / tau)

    @property
    def count(self) -> int:
        return self.batch.values.shape[-1] * self.temporal.shape[-1]

    def _tensor(self, temporal: np.ndarray, spatial: np.ndarray) -> np.ndarray:
        m, k, nq = temporal.shape[0], spatial.shape[0], spatial.shape[1]
        product = np.einsum("mj,kqa...->mkqja...", temporal, spatial)
        return product.reshape(m, k, nq, self.count, *spatial.shape[3:])

    @property
    def values(self) -> np.ndarray:
        """Shape (m, k, nq, n_t * n_x)."""
        return self._tensor(self.temporal, self.batch.values)

    @property
    def gradients(self) -> np.ndarray:
        """Spatial gradients, shape (m, k, nq, n_t * n_x, 2)."""
        return self._tensor(self.temporal, self.batch.gradients)

    @property
    def time_derivatives(self) -> np.ndarray:
        return self._tensor(self.rates, self.batch.values)


def shape_batch_reference(
    space: SpatialSpace, cells: np.ndarray, xi: np.ndarray, hessians: bool = False
) -> ShapeBatch:
    """Evaluate shape functions at reference coordinates xi (k, nq, 2) of cells."""
    cells = np.asarray(cells, dtype=int)
    _, jac = space.mesh.affine_maps(cells)
    inv = np.linalg.inv(jac)
    element = space.element
    values = element.values(xi)
    gradients = np.einsum("kji,kqnj->kqni", inv, element.gradients(xi))
    second = None
    if hessians:
        second = np.einsum("kai,kqnab,kbj->kqnij", inv, element.hessians(xi), inv)
    return ShapeBatch(cells, space.cell_nodes(cells), values, gradients, second)


def shape_batch(space: SpatialSpace, cells: np.ndarray, points: np.ndarray, hessians: bool = False) -> ShapeBatch:
    """Evaluate shape functions at physical points (k, nq, 2) of the reference domain."""
    cells = np.asarray(cells, dtype=int)
    xi = space.mesh.to_reference(cells, points)
    return shape_batch_reference(space, cells, xi, hessians)


def scatter_matrix(
    rows: np.ndarray, cols: np.ndarray, local: np.ndarray, shape: tuple[int, int]
) -> sparse.csr_matrix:
    """Sum local blocks (k, nr, nc) into a CSR matrix.

    Duplicates are summed in cell order, so the result does not depend on
    anything but the input order.
    """
    k = len(rows)
    if k == 0:
        return sparse.csr_matrix(shape)
    r = np.broadcast_to(rows[:, :, None], local.shape).ravel()
    c = np.broadcast_to(cols[:, None, :], local.shape).ravel()
    return sparse.coo_matrix((local.ravel(), (r, c)), shape=shape).tocsr()


def scatter_vector(dofs: np.ndarray, local: np.ndarray, size: int) -> np.ndarray:
    """Sum local vectors (k, n) into a global vector."""
    if len(dofs) == 0:
        return np.zeros(size)
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=size)
