"""Elastic extension of the boundary displacement into the slab's active cells.

The extension solves, on the unfitted slab domain,

    a(u, v) = int 2 mu eps(u):eps(v) + lam div u div v
              + Nitsche terms on B_h(t^n) x J^n,

with u = 0 on the artificial boundary and at t = t^n. The form has no time
derivative, so the space-time matrix is the temporal mass matrix tensored
with the spatial one.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from ..exceptions import ConfigurationError
from ..fe.aggregation import build_aggregates, constrain_system
from ..fe.basis import TemporalBasis
from ..fe.evaluation import scatter_matrix, scatter_vector, shape_batch
from ..fe.quadrature import CutQuadrature, FacetBatch, build_quadrature
from ..fe.space import SpaceTimeSpace, SpatialSpace
from ..mesh.active import ActiveMesh
from .field import DeformationField
from .motion import DirichletData

logger = logging.getLogger(__name__)


@dataclass
class ElasticExtensionProblem:
    """Material, penalty and data of one slab's extension solve.

    Attributes:
        dirichlet: Boundary displacement relative to the slab's start.
        lam: First Lame parameter.
        mu: Shear modulus.
        penalty: c0 in tau_D = c0 p^2 mu / h_T.
        order: Spatial order of the displacement space.
        time_order: Temporal order of the displacement space (>= 1).
    """

    dirichlet: DirichletData
    lam: float = 1.0
    mu: float = 1.0
    penalty: float = 10.0
    order: int = 1
    time_order: int = 1

    def __post_init__(self) -> None:
        if self.time_order < 1:
            raise ConfigurationError("the extension needs a temporal order >= 1 to pin the slab start")
        if self.order < 1:
            raise ConfigurationError(f"extension order must be >= 1, got {self.order}")

    def penalty_weights(self, diameters: np.ndarray) -> np.ndarray:
        return self.penalty * self.order**2 * self.mu / np.asarray(diameters)


def vector_gradients(gradients: np.ndarray) -> np.ndarray:
    """Gradients of the interleaved vector basis phi_a e_c.

    Args:
        gradients: Scalar gradients, shape (k, nq, n, 2).

    Returns:
        Shape (k, nq, 2n, 2, 2); entry [..., 2a + c, c, :] is grad phi_a.
    """
    k, nq, n, _ = gradients.shape
    result = np.zeros((k, nq, n, 2, 2, 2))
    for c in range(2):
        result[:, :, :, c, c, :] = gradients
    return result.reshape(k, nq, 2 * n, 2, 2)


def vector_values(values: np.ndarray) -> np.ndarray:
    """Values of the interleaved vector basis, shape (k, nq, 2n, 2)."""
    k, nq, n = values.shape
    result = np.zeros((k, nq, n, 2, 2))
    for c in range(2):
        result[:, :, :, c, c] = values
    return result.reshape(k, nq, 2 * n, 2)


def _stress(grad: np.ndarray, lam: float, mu: float) -> tuple[np.ndarray, np.ndarray]:
    strain = 0.5 * (grad + np.swapaxes(grad, -1, -2))
    trace = strain[..., 0, 0] + strain[..., 1, 1]
    stress = 2.0 * mu * strain + lam * trace[..., None, None] * np.eye(2)
    return strain, stress


class ExtensionAssembler:
    """Spatial stiffness, Nitsche block and boundary load of the extension."""

    def __init__(self, problem: ElasticExtensionProblem, space: SpatialSpace) -> None:
        if space.components != 2:
            raise ConfigurationError("the extension space must be vector valued")
        self.problem = problem
        self.space = space
        self._scalar = space.scalar()
        self._logger = logging.getLogger(__name__)

    def stiffness(self, quadrature: CutQuadrature) -> sparse.csr_matrix:
        n = self.space.n_dofs
        matrix = sparse.csr_matrix((n, n))
        lam, mu = self.problem.lam, self.problem.mu
        for batch in quadrature.volume_batches:
            sb = shape_batch(self._scalar, batch.cells, batch.points)
            strain, _ = _stress(vector_gradients(sb.gradients), lam, mu)
            trace = strain[..., 0, 0] + strain[..., 1, 1]
            local = 2.0 * mu * np.einsum("kq,kqaij,kqbij->kab", batch.weights, strain, strain)
            local += lam * np.einsum("kq,kqa,kqb->kab", batch.weights, trace, trace)
            dofs = self.space.cell_dofs(batch.cells)
            matrix = matrix + scatter_matrix(dofs, dofs, local, (n, n))
        return matrix.tocsr()

    def _facet_basis(self, facets: FacetBatch):
        sb = shape_batch(self._scalar, facets.cells, facets.points)
        values = vector_values(sb.values)
        _, stress = _stress(vector_gradients(sb.gradients), self.problem.lam, self.problem.mu)
        traction = np.einsum("kqaij,kj->kqai", stress, facets.normals)
        penalty = self.problem.penalty_weights(self.space.mesh.cell_diameters[facets.cells])
        return values, traction, penalty

    def nitsche(self, facets: FacetBatch) -> sparse.csr_matrix:
        n = self.space.n_dofs
        if len(facets) == 0:
            return sparse.csr_matrix((n, n))
        values, traction, penalty = self._facet_basis(facets)
        w = facets.weights
        consistency = np.einsum("kq,kqai,kqbi->kab", w, values, traction)
        local = -consistency - np.swapaxes(consistency, 1, 2)
        local += np.einsum("kq,k,kqai,kqbi->kab", w, penalty, values, values)
        dofs = self.space.cell_dofs(facets.cells)
        return scatter_matrix(dofs, dofs, local, (n, n))

    def load(self, facets: FacetBatch, t: float) -> np.ndarray:
        """Nitsche right-hand side of the boundary displacement at time t."""
        n = self.space.n_dofs
        if len(facets) == 0:
            return np.zeros(n)
        values, traction, penalty = self._facet_basis(facets)
        data = self.problem.dirichlet.on_edges(facets.edges, facets.params, t)
        w = facets.weights
        local = np.einsum("kq,k,kqai,kqi->ka", w, penalty, values, data)
        local -= np.einsum("kq,kqai,kqi->ka", w, traction, data)
        return scatter_vector(self.space.cell_dofs(facets.cells), local, n)


def artificial_boundary_dofs(space: SpatialSpace) -> np.ndarray:
    """Mask over the DOFs of a vector space lying on the artificial boundary."""
    sx, sy = space.lattice_shape
    col = space.node_ids % sx
    row = space.node_ids // sx
    on_box = (col == 0) | (row == 0) | (col == sx - 1) | (row == sy - 1)
    return np.repeat(on_box, space.components)


def solve_extension(
    problem: ElasticExtensionProblem,
    active: ActiveMesh,
    t0: float,
    t1: float,
    quadrature: Optional[CutQuadrature] = None,
    check: bool = True,
) -> DeformationField:
    """Extend the slab's boundary displacement into the active cells.

    Args:
        problem: Material and data.
        active: Active mesh of the slab; its aggregation is reused.
        t0: Slab start.
        t1: Slab end.
        quadrature: Volume and facet rules on the active cells; built with the
            extension order when omitted.
        check: Verify det F_x > 0 at the volume quadrature points.

    Returns:
        The discrete deformation of the slab.

    Raises:
        AggregationError: If an active cell has no interior root.
        SolverError: If the reduced system is singular.
        NonBijectiveMapError: If the computed map folds.
    """
    mesh = active.mesh
    spatial = SpatialSpace(mesh, problem.order, active.active_cells, components=2)
    temporal = TemporalBasis(problem.time_order)
    space = SpaceTimeSpace(spatial, temporal)
    if quadrature is None:
        quadrature = build_quadrature(active.geometry, problem.order, problem.time_order, cells=active.active_cells)
    tau = t1 - t0

    assembler = ExtensionAssembler(problem, spatial)
    spatial_matrix = assembler.stiffness(quadrature) + assembler.nitsche(quadrature.facets)

    s, ws = quadrature.time_points, quadrature.time_weights
    psi = temporal.values(s)
    time_mass = tau * np.einsum("m,mi,mj->ij", ws, psi, psi)
    matrix = sparse.kron(sparse.csr_matrix(time_mass), spatial_matrix, format="csr")
    loads = np.stack([assembler.load(quadrature.facets, t0 + tau * sm) for sm in s])
    rhs = (tau * np.einsum("m,mi,mn->in", ws, psi, loads)).reshape(-1)

    n_layers = temporal.n_nodes
    fixed = np.zeros(space.n_dofs, dtype=bool)
    fixed[: spatial.n_dofs] = True
    fixed |= np.tile(artificial_boundary_dofs(spatial), n_layers)

    aggregation = build_aggregates(spatial.scalar(), active.states)
    system = constrain_system(matrix, rhs, aggregation, components=2, layers=n_layers, fixed=fixed)
    coefficients = system.solve()
    logger.info(
        f"Extension solved on {len(active.active_cells)} cells: {system.size} free DOFs, "
        f"max |u| = {np.abs(coefficients).max(initial=0.0):.4e}"
    )
    field = DeformationField(space, coefficients, t0, t1)
    if check:
        field.check_bijectivity(quadrature)
    return field
