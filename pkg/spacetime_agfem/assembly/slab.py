"""Assembly of the pulled-back slab forms on the reference slab.

Every volume and facet integral is evaluated on the undeformed slab; the
deformation enters through J, F_x^-T and the deformation velocity. Data are
composed with the map by pushing quadrature points forward.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse

from ..exceptions import ConfigurationError
from ..fe.aggregation import AggregationMap, ReducedSystem, constrain_system
from ..fe.evaluation import TensorShapeSet, scatter_matrix, scatter_vector, shape_batch
from ..fe.quadrature import CutQuadrature, FacetBatch
from ..fe.space import SpaceTimeSpace
from ..deformation.field import (
    DeformationField,
    pullback_gradients,
    surface_measure_factor,
    transport_normal,
)
from ..models import BoundaryTag
from .problem import ModelProblem

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SlabSystem:
    """Slab matrix B_h and the data part of the linear form L_h.

    The coupling to the previous slab is added to ``rhs`` separately.

    Attributes:
        space: Scalar space-time space the system lives on.
        time_derivative: int v d_t u J.
        initial_mass: int over Omega^n of v(t^n) u(t^n).
        bilinear: a_h(u, v), diffusion, advection and Nitsche terms.
        reference_mass: int over the reference slab of v u, without J.
        rhs: Source, Neumann and Nitsche data terms.
        neumann_inflow: Smallest w . n_x + n_t over Neumann points.
    """

    space: SpaceTimeSpace
    time_derivative: sparse.csr_matrix
    initial_mass: sparse.csr_matrix
    bilinear: sparse.csr_matrix
    reference_mass: sparse.csr_matrix
    rhs: np.ndarray
    neumann_inflow: float = np.inf
    coupling: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        if self.coupling is None:
            self.coupling = np.zeros_like(self.rhs)

    @property
    def size(self) -> int:
        return self.space.n_dofs

    @property
    def matrix(self) -> sparse.csr_matrix:
        return (self.time_derivative + self.initial_mass + self.bilinear).tocsr()

    @property
    def load(self) -> np.ndarray:
        """Full right-hand side including the previous-slab coupling."""
        return self.rhs + self.coupling

    def reduce(self, aggregation: Optional[AggregationMap]) -> ReducedSystem:
        """Constrain to the well-posed DOFs of the aggregation."""
        return constrain_system(self.matrix, self.load, aggregation, layers=self.space.n_layers)


class SlabAssembler:
    """Assembles one slab of the model problem for a given deformation."""

    def __init__(self, problem: ModelProblem, space: SpaceTimeSpace, field: DeformationField) -> None:
        if space.spatial.components != 1:
            raise ConfigurationError("the model problem needs a scalar space")
        self.problem = problem
        self.space = space
        self.field = field
        self.tau = field.tau
        self.t0 = field.t0
        self._logger = logging.getLogger(__name__)

    def _check_cells(self, cells: np.ndarray) -> None:
        if not np.all(self.space.spatial.contains(cells)):
            raise ConfigurationError("quadrature covers cells outside the discrete space")

    def _space_time_shapes(self, batch_cells: np.ndarray, points: np.ndarray, s: np.ndarray):
        """Values, reference gradients and reference time derivatives, shape (m, k, nq, L*n[, 2])."""
        batch = shape_batch(self.space.spatial, batch_cells, points)
        shapes = TensorShapeSet.on_slab(batch, self.space.temporal, s, self.tau)
        return shapes.values, shapes.gradients, shapes.time_derivatives

    def volume(self, quadrature: CutQuadrature):
        """Time-derivative, a_h volume part, reference mass and source load."""
        n = self.space.n_dofs
        shape = (n, n)
        s, ws = quadrature.time_points, quadrature.time_weights
        dt_matrix = sparse.csr_matrix(shape)
        stiffness = sparse.csr_matrix(shape)
        ref_mass = sparse.csr_matrix(shape)
        rhs = np.zeros(n)
        mu = self.problem.mu
        for batch in quadrature.volume_batches:
            self._check_cells(batch.cells)
            state = self.field.evaluate(batch.cells, batch.points, s)
            values, grads_hat, dt_hat = self._space_time_shapes(batch.cells, batch.points, s)
            grads, dt = pullback_gradients(state, grads_hat, dt_hat)
            times = np.broadcast_to(state.times[:, None, None], state.J.shape)
            ref_weights = self.tau * ws[:, None, None] * batch.weights[None]
            weights = ref_weights * np.abs(state.J)
            advection = self.problem.advection_at(state.points, times)
            transport = np.einsum("mkqd,mkqjd->mkqj", advection, grads)
            dofs = self.space.cell_dofs(batch.cells)

            local = np.einsum("mkq,mkqi,mkqj->kij", weights, values, dt)
            dt_matrix = dt_matrix + scatter_matrix(dofs, dofs, local, shape)
            local = mu * np.einsum("mkq,mkqid,mkqjd->kij", weights, grads, grads)
            local += np.einsum("mkq,mkqi,mkqj->kij", weights, values, transport)
            stiffness = stiffness + scatter_matrix(dofs, dofs, local, shape)
            local = np.einsum("mkq,mkqi,mkqj->kij", ref_weights, values, values)
            ref_mass = ref_mass + scatter_matrix(dofs, dofs, local, shape)

            source = self.problem.source_at(state.points, times)
            rhs += scatter_vector(dofs, np.einsum("mkq,mkq,mkqi->ki", weights, source, values), n)
        return dt_matrix.tocsr(), stiffness.tocsr(), ref_mass.tocsr(), rhs

    def initial_face(self, quadrature: CutQuadrature) -> sparse.csr_matrix:
        """Mass of the traces at t^n; phi(., t^n) is the identity so J = 1 there."""
        n = self.space.n_dofs
        matrix = sparse.csr_matrix((n, n))
        for batch in quadrature.volume_batches:
            values, _, _ = self._space_time_shapes(batch.cells, batch.points, np.zeros(1))
            local = np.einsum("kq,kqi,kqj->kij", batch.weights, values[0], values[0])
            dofs = self.space.cell_dofs(batch.cells)
            matrix = matrix + scatter_matrix(dofs, dofs, local, (n, n))
        return matrix.tocsr()

    def _facet_state(self, facets: FacetBatch, s: np.ndarray):
        state = self.field.evaluate(facets.cells, facets.points, s)
        normal = np.broadcast_to(facets.normals[None, :, None, :], state.w.shape)
        n_x, n_t = transport_normal(state, normal)
        factor = surface_measure_factor(state, normal)
        return state, n_x, n_t, factor

    def nitsche(self, quadrature: CutQuadrature) -> tuple[sparse.csr_matrix, np.ndarray]:
        """Nitsche consistency, symmetry and penalty terms on the Dirichlet boundary."""
        n = self.space.n_dofs
        facets = quadrature.facets.select(BoundaryTag.DIRICHLET)
        if len(facets) == 0:
            return sparse.csr_matrix((n, n)), np.zeros(n)
        self._check_cells(facets.cells)
        s, ws = quadrature.time_points, quadrature.time_weights
        state, n_x, _, factor = self._facet_state(facets, s)
        values, grads_hat, _ = self._space_time_shapes(facets.cells, facets.points, s)
        grads, _ = pullback_gradients(state, grads_hat)
        mu = self.problem.mu
        beta = self.problem.penalty_weights(self.space.spatial.order, self.space.mesh.cell_diameters[facets.cells])
        weights = self.tau * ws[:, None, None] * facets.weights[None] * factor
        flux = mu * np.einsum("mkqd,mkqjd->mkqj", n_x, grads)
        times = np.broadcast_to(state.times[:, None, None], state.J.shape)
        data = self.problem.dirichlet_at(state.points, times)
        dofs = self.space.cell_dofs(facets.cells)

        consistency = np.einsum("mkq,mkqi,mkqj->kij", weights, values, flux)
        local = np.einsum("mkq,k,mkqi,mkqj->kij", weights, beta, values, values)
        local -= consistency + np.swapaxes(consistency, 1, 2)
        matrix = scatter_matrix(dofs, dofs, local, (n, n))
        load = np.einsum("mkq,k,mkq,mkqi->ki", weights, beta, data, values)
        load -= np.einsum("mkq,mkq,mkqi->ki", weights, data, flux)
        return matrix, scatter_vector(dofs, load, n)

    def neumann(self, quadrature: CutQuadrature) -> tuple[np.ndarray, float]:
        """Neumann load and the inflow indicator on the Neumann boundary."""
        n = self.space.n_dofs
        facets = quadrature.facets.select(BoundaryTag.NEUMANN)
        if len(facets) == 0:
            return np.zeros(n), np.inf
        self._check_cells(facets.cells)
        s, ws = quadrature.time_points, quadrature.time_weights
        state, n_x, n_t, factor = self._facet_state(facets, s)
        values, _, _ = self._space_time_shapes(facets.cells, facets.points, s)
        times = np.broadcast_to(state.times[:, None, None], state.J.shape)
        weights = self.tau * ws[:, None, None] * facets.weights[None] * factor
        inflow = self.problem.neumann_inflow(state.points, times, n_x, n_t, mask=weights > 0.0)
        flux = self.problem.neumann_at(state.points, times, n_x)
        load = np.einsum("mkq,mkq,mkqi->ki", weights, flux, values)
        return scatter_vector(self.space.cell_dofs(facets.cells), load, n), inflow


def assemble_slab(
    problem: ModelProblem, space: SpaceTimeSpace, field: DeformationField, quadrature: CutQuadrature
) -> SlabSystem:
    """Assemble B_h and the data terms of L_h on one slab.

    Args:
        problem: Model problem data.
        space: Scalar space-time space on the slab's (extended) active cells.
        field: Deformation of the slab.
        quadrature: Slab rules on the active cells.

    Returns:
        The slab system without the previous-slab coupling.

    Raises:
        ConfigurationError: If the quadrature reaches cells outside the space.
        SingularMapError: If the deformation is singular at a quadrature point.
    """
    assembler = SlabAssembler(problem, space, field)
    dt_matrix, stiffness, ref_mass, source = assembler.volume(quadrature)
    initial = assembler.initial_face(quadrature)
    nitsche, nitsche_load = assembler.nitsche(quadrature)
    neumann_load, inflow = assembler.neumann(quadrature)
    system = SlabSystem(
        space,
        dt_matrix,
        initial,
        (stiffness + nitsche).tocsr(),
        ref_mass,
        source + nitsche_load + neumann_load,
        inflow,
    )
    logger.debug(f"Assembled slab [{field.t0:.6g}, {field.t1:.6g}]: {space.n_dofs} DOFs, {system.matrix.nnz} nonzeros")
    return system
