"""Discrete space-time deformation of a slab and the pullback calculus it induces.

On the reference slab the map is phi(x, t) = x + u(x, t). Its space-time
gradient is block lower triangular,

    F = [[F_x, w], [0, 1]],  F_x = I + grad u,  w = du/dt,

so J = det F = det F_x and F^-T (g, s) = (F_x^-T g, s - w . F_x^-T g).
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..exceptions import DegenerateNormalError, NonBijectiveMapError, SingularMapError
from ..fe.evaluation import shape_batch
from ..fe.space import SpaceTimeSpace

logger = logging.getLogger(__name__)

SINGULAR_TOL = 1e-14


@dataclass(eq=False)
class DeformationState:
    """Map quantities at points, leading shape (n_t, k, nq).

    Attributes:
        points: Deformed positions x = phi(x_hat, t).
        displacement: u(x_hat, t).
        F: Spatial gradient F_x, shape (..., 2, 2).
        w: Deformation velocity du/dt, shape (..., 2).
        J: det F_x.
        times: Physical times of the leading axis.
    """

    points: np.ndarray
    displacement: np.ndarray
    F: np.ndarray
    w: np.ndarray
    J: np.ndarray
    times: np.ndarray

    @property
    def inverse_transpose(self) -> np.ndarray:
        """F_x^-T."""
        return np.swapaxes(np.linalg.inv(self.F), -1, -2)

    def take(self, m: int) -> "DeformationState":
        """State at temporal point m only (leading axis dropped)."""
        return DeformationState(
            self.points[m], self.displacement[m], self.F[m], self.w[m], self.J[m], self.times[m : m + 1]
        )


def _check_regular(state: DeformationState) -> None:
    bad = np.abs(state.J) <= SINGULAR_TOL
    if np.any(bad):
        where = tuple(int(i) for i in np.argwhere(bad)[0])
        raise SingularMapError(f"deformation gradient is singular at point index {where}")


def _expand(array: np.ndarray, base_ndim: int, target_ndim: int, tail: int) -> np.ndarray:
    """Insert axes after the point axes so an array broadcasts against per-shape data."""
    extra = target_ndim - base_ndim
    if extra <= 0:
        return array
    shape = array.shape[: array.ndim - tail] + (1,) * extra + array.shape[array.ndim - tail :]
    return array.reshape(shape)


def pullback_gradients(
    state: DeformationState, grad_hat: np.ndarray, dt_hat: Optional[np.ndarray] = None
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Transport reference derivatives to the deformed configuration.

    Args:
        state: Map state; its point axes must lead the shape of ``grad_hat``.
        grad_hat: Reference spatial gradients (..., 2), possibly with extra
            axes (e.g. one per shape function) after the point axes.
        dt_hat: Reference time derivatives with the shape of ``grad_hat[..., 0]``.

    Returns:
        (grad_x = F_x^-T grad_hat, dt = dt_hat - w . grad_x); the second entry
        is None when ``dt_hat`` is None.

    Raises:
        SingularMapError: If det F_x vanishes at a point.
    """
    _check_regular(state)
    grad_hat = np.asarray(grad_hat, dtype=float)
    base = state.J.ndim
    inv_t = _expand(state.inverse_transpose, base, grad_hat.ndim - 1, 2)
    grad_x = np.einsum("...ij,...j->...i", inv_t, grad_hat)
    if dt_hat is None:
        return grad_x, None
    w = _expand(state.w, base, grad_hat.ndim - 1, 1)
    return grad_x, np.asarray(dt_hat) - np.einsum("...i,...i->...", w, grad_x)


def pushforward_hessian(
    state: DeformationState, grad_x: np.ndarray, hess_hat: np.ndarray, map_hessian: Optional[np.ndarray] = None
) -> np.ndarray:
    """Physical Hessian of a function from its reference derivatives.

    H = F_x^-T (H_hat - sum_c (grad_x)_c d2phi_c) F_x^-1. Without ``map_hessian``
    the map is treated as affine on each cell and the sum is dropped.

    Args:
        state: Map state with the point axes of ``grad_x``.
        grad_x: Physical gradients, shape (..., 2).
        hess_hat: Reference Hessians, shape (..., 2, 2).
        map_hessian: Reference second derivatives of phi, shape (..., 2, 2, 2)
            indexed (component, i, j).

    Raises:
        SingularMapError: If det F_x vanishes at a point.
    """
    _check_regular(state)
    hess_hat = np.asarray(hess_hat, dtype=float)
    if map_hessian is not None:
        hess_hat = hess_hat - np.einsum("...c,...cij->...ij", grad_x, map_hessian)
    inv_t = state.inverse_transpose
    return inv_t @ hess_hat @ np.swapaxes(inv_t, -1, -2)


def _transported(state: DeformationState, normal: np.ndarray, normal_t: float | np.ndarray = 0.0):
    _check_regular(state)
    spatial = np.einsum("...ij,...j->...i", state.inverse_transpose, normal)
    temporal = np.asarray(normal_t) - np.einsum("...i,...i->...", state.w, spatial)
    length = np.sqrt(np.einsum("...i,...i->...", spatial, spatial) + temporal**2)
    if np.any(length <= SINGULAR_TOL):
        raise DegenerateNormalError("transported normal vanishes")
    return spatial, temporal, length


def transport_normal(
    state: DeformationState, normal: np.ndarray, normal_t: float | np.ndarray = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Spatial and temporal parts of the unit normal after transport by F^-T.

    Args:
        state: Map state at the facet points.
        normal: Reference spatial normal, broadcastable to the state's point shape + (2,).
        normal_t: Reference temporal normal component.

    Returns:
        (n_x, n_t) of the normalised transported space-time normal; n_x is the
        spatial projection, so |n_x| <= 1.
    """
    spatial, temporal, length = _transported(state, normal, normal_t)
    return spatial / length[..., None], temporal / length


def surface_measure_factor(
    state: DeformationState, normal: np.ndarray, normal_t: float | np.ndarray = 0.0
) -> np.ndarray:
    """Area factor J sqrt(n^T C^-1 n) = J |F^-T n| of a space-time facet."""
    _, _, length = _transported(state, normal, normal_t)
    return np.abs(state.J) * length


def spatial_measure_factor(state: DeformationState, normal: np.ndarray) -> np.ndarray:
    """Length factor J |F_x^-T n| of a spatial boundary curve at fixed time."""
    _check_regular(state)
    spatial = np.einsum("...ij,...j->...i", state.inverse_transpose, normal)
    return np.abs(state.J) * np.linalg.norm(spatial, axis=-1)


class DeformationField:
    """Displacement u_h of one slab in a vector space-time Lagrange space.

    Attributes:
        space: Space-time space whose spatial part has two components.
        coefficients: DOF values, time-major.
        t0: Slab start time.
        t1: Slab end time.
        function: Analytic displacement u(x_hat, t) when the field interpolates one.
    """

    def __init__(
        self,
        space: SpaceTimeSpace,
        coefficients: np.ndarray,
        t0: float,
        t1: float,
        function: Optional[Callable[[np.ndarray, float], np.ndarray]] = None,
    ) -> None:
        self.space = space
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.t0 = float(t0)
        self.t1 = float(t1)
        self.function = function
        self._logger = logging.getLogger(__name__)
        self._scalar = space.spatial.scalar()

    @property
    def tau(self) -> float:
        return self.t1 - self.t0

    @property
    def mesh(self):
        return self.space.mesh

    @property
    def is_identity(self) -> bool:
        return not np.any(self.coefficients)

    @classmethod
    def identity(cls, space: SpaceTimeSpace, t0: float, t1: float) -> "DeformationField":
        """Zero displacement."""
        return cls(space, np.zeros(space.n_dofs), t0, t1, function=lambda x, t: np.zeros_like(x))

    @classmethod
    def from_function(
        cls, space: SpaceTimeSpace, function: Callable[[np.ndarray, float], np.ndarray], t0: float, t1: float
    ) -> "DeformationField":
        """Nodal interpolant of an analytic displacement u(x_hat, t) returning (n, 2)."""
        times = t0 + (t1 - t0) * space.temporal.nodes
        x = space.spatial.node_coords
        coefficients = np.concatenate([np.asarray(function(x, float(t)), dtype=float).reshape(-1) for t in times])
        return cls(space, coefficients, t0, t1, function)

    def _layers(self) -> np.ndarray:
        return self.coefficients.reshape(self.space.n_layers, self._scalar.n_nodes, 2)

    def nodal_displacement(self, t: float) -> np.ndarray:
        """Displacement of every node at time t, shape (n_nodes, 2)."""
        s = (t - self.t0) / self.tau
        return np.einsum("j,jnc->nc", self.space.temporal.values(np.array(s)), self._layers())

    def vertex_displacement(self, t: float) -> np.ndarray:
        """Displacement of every mesh vertex at time t, shape (n_vertices, 2).

        Interpolating fields report the analytic function at every vertex;
        computed fields report zero at vertices without a DOF.
        """
        mesh = self.mesh
        if self.function is not None:
            return np.asarray(self.function(mesh.vertices, float(t)), dtype=float).reshape(-1, 2)
        nodes = self._scalar.vertex_nodes()
        result = np.zeros((mesh.n_vertices, 2))
        has = nodes >= 0
        result[has] = self.nodal_displacement(t)[nodes[has]]
        return result

    def evaluate(self, cells: np.ndarray, points: np.ndarray, s: np.ndarray) -> DeformationState:
        """Map state at reference points of cells and unit slab times.

        Args:
            cells: Cell ids, shape (k,).
            points: Reference-domain points, shape (k, nq, 2).
            s: Unit slab coordinates in [0, 1], shape (n_t,).

        Returns:
            State with leading shape (n_t, k, nq).
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        batch = shape_batch(self._scalar, cells, points)
        layers = self._layers()[:, batch.nodes]
        temporal = self.space.temporal
        values = np.einsum("mj,jkac->mkac", temporal.values(s), layers)
        rates = np.einsum("mj,jkac->mkac", temporal.derivatives(s), layers) / self.tau
        displacement = np.einsum("kqa,mkac->mkqc", batch.values, values)
        gradient = np.einsum("kqad,mkac->mkqcd", batch.gradients, values)
        w = np.einsum("kqa,mkac->mkqc", batch.values, rates)
        F = np.eye(2) + gradient
        J = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
        points = np.asarray(points)[None] + displacement
        return DeformationState(points, displacement, F, w, J, self.t0 + self.tau * s)

    def map_hessians(self, cells: np.ndarray, points: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Second derivatives of phi, shape (n_t, k, nq, 2, 2, 2) indexed (component, i, j)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        batch = shape_batch(self._scalar, cells, points, hessians=True)
        values = np.einsum("mj,jkac->mkac", self.space.temporal.values(s), self._layers()[:, batch.nodes])
        return np.einsum("kqaij,mkac->mkqcij", batch.hessians, values)

    def min_jacobian(self, batches) -> float:
        """Smallest det F_x over the given quadrature batches and temporal points."""
        worst = np.inf
        for batch, s in batches:
            if len(batch.cells):
                state = self.evaluate(batch.cells, batch.points, s)
                mask = np.broadcast_to(batch.weights[None] > 0.0, state.J.shape)
                if mask.any():
                    worst = min(worst, float(state.J[mask].min()))
        return worst

    def check_bijectivity(self, quadrature) -> float:
        """Verify det F_x > 0 at every volume quadrature point of the slab.

        Raises:
            NonBijectiveMapError: If the map folds anywhere.
        """
        s = np.concatenate([quadrature.time_points, [0.0, 1.0]])
        worst = self.min_jacobian([(batch, s) for batch in quadrature.volume_batches])
        if worst <= 0.0:
            raise NonBijectiveMapError(
                f"deformation folds on slab [{self.t0:.6g}, {self.t1:.6g}] (min det F_x = {worst:.3e}); use a smaller time step"
            )
        self._logger.debug(f"Deformation min det F_x = {worst:.6f}")
        return worst


def max_vertex_gradient(mesh, displacement: np.ndarray) -> float:
    """Largest cell-wise Frobenius norm of the gradient of a P1 vertex displacement."""
    if not mesh.simplexified:
        raise ValueError("vertex gradients are defined on simplicial meshes only")
    ids = mesh.cell_vertex_ids
    coords = mesh.vertices[ids]
    disp = np.asarray(displacement).reshape(-1, 2)[ids]
    jac = np.stack([coords[:, 1] - coords[:, 0], coords[:, 2] - coords[:, 0]], axis=-1)
    du = np.stack([disp[:, 1] - disp[:, 0], disp[:, 2] - disp[:, 0]], axis=-1)
    grad = du @ np.linalg.inv(jac)
    return float(np.sqrt((grad**2).sum(axis=(1, 2))).max())
