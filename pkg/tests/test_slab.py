"""Tests for spacetime_agfem.assembly.slab module."""

import numpy as np
import pytest

from spacetime_agfem.assembly.problem import ModelProblem
from spacetime_agfem.assembly.slab import SlabAssembler, assemble_slab
from spacetime_agfem.assembly.transfer import TransferRule, jump_coupling
from spacetime_agfem.deformation.field import DeformationField
from spacetime_agfem.exceptions import ConfigurationError
from spacetime_agfem.fe.aggregation import build_aggregates
from spacetime_agfem.fe.quadrature import build_quadrature
from spacetime_agfem.fe.space import SpaceTimeSpace, SpatialSpace
from spacetime_agfem.geometry.boundary import OrientedBoundary, rectangle_loop
from spacetime_agfem.geometry.classify import classify_cells

T0, T1 = 0.0, 0.5


def _translation(speed):
    def displacement(x, t):
        shift = np.zeros(np.shape(x))
        shift[..., 0] = speed * (t - T0)
        return shift

    return displacement


def _setup(mesh, boundary, displacement=None):
    geometry = classify_cells(mesh, boundary)
    quadrature = build_quadrature(geometry, 1, 1)
    vector = SpaceTimeSpace(SpatialSpace(mesh, 1, geometry.active_cells, components=2), 1)
    if displacement is None:
        field = DeformationField.identity(vector, T0, T1)
    else:
        field = DeformationField.from_function(vector, displacement, T0, T1)
    space = SpaceTimeSpace(SpatialSpace(mesh, 1, geometry.active_cells), 1)
    return space, field, quadrature


def _solve(problem, space, field, quadrature):
    system = assemble_slab(problem, space, field, quadrature)
    system.coupling = jump_coupling(space, TransferRule.initial_rule(quadrature, problem.initial)).rhs
    return system, system.reduce(None).solve()


def _nodal_exact(space, exact, displacement=None):
    """Exact values at the pushed-forward nodes of every temporal layer."""
    x = space.spatial.node_coords
    layers = []
    for s in space.temporal.nodes:
        t = T0 + (T1 - T0) * s
        moved = x if displacement is None else x + displacement(x, t)
        layers.append(exact(moved, t))
    return np.concatenate(layers)


def _linear(x, t):
    return x[..., 0] + x[..., 1] + t


class TestSlabSystem:
    """Tests for SlabSystem matrices on a fixed domain."""

    @pytest.fixture
    def system(self, coarse_mesh, box_boundary):
        space, field, quadrature = _setup(coarse_mesh, box_boundary)
        return assemble_slab(ModelProblem(), space, field, quadrature)

    def test_reference_mass_integrates_one(self, system):
        """Test the mass entries sum to the slab measure."""
        assert system.reference_mass.sum() == pytest.approx(9.0 * (T1 - T0))

    def test_time_derivative_kills_constants(self, system):
        """Test the time-derivative rows sum to zero."""
        np.testing.assert_allclose(np.asarray(system.time_derivative.sum(axis=1)).ravel(), 0.0, atol=1e-12)

    def test_initial_mass_integrates_one(self, system):
        """Test the initial-face mass sums to the domain area."""
        assert system.initial_mass.sum() == pytest.approx(9.0)

    def test_load_includes_coupling(self, system):
        """Test the load adds the coupling vector to the data terms."""
        assert not system.coupling.any()
        system.coupling = np.ones(system.size)
        np.testing.assert_allclose(system.load, system.rhs + 1.0)
        assert system.matrix.shape == (system.size, system.size)


class TestExactSolutions:
    """Tests that polynomials in the discrete space are reproduced."""

    def test_constant_with_dirichlet_data(self, coarse_mesh, box_boundary):
        """Test u = 2 is recovered through Nitsche and the initial coupling."""
        space, field, quadrature = _setup(coarse_mesh, box_boundary)
        problem = ModelProblem(dirichlet=lambda x, t: 2.0, initial=lambda x: 2.0)
        _, solution = _solve(problem, space, field, quadrature)
        np.testing.assert_allclose(solution, 2.0, atol=1e-9)

    def test_constant_with_neumann_boundary(self, coarse_mesh):
        """Test a pure Neumann problem keeps a constant and reports no inflow."""
        boundary = OrientedBoundary.from_loops([rectangle_loop((0.0, 0.0), (3.0, 3.0))], neumann=[[True] * 4])
        space, field, quadrature = _setup(coarse_mesh, boundary)
        problem = ModelProblem(initial=lambda x: 2.0)
        system, solution = _solve(problem, space, field, quadrature)
        np.testing.assert_allclose(solution, 2.0, atol=1e-9)
        assert system.neumann_inflow == pytest.approx(0.0, abs=1e-12)

    def test_linear_with_source_and_advection(self, coarse_mesh, box_boundary):
        """Test u = x + y + t with w = (1, 0) and f = 2 is exact."""
        space, field, quadrature = _setup(coarse_mesh, box_boundary)
        problem = ModelProblem(
            advection=lambda x, t: np.array([1.0, 0.0]),
            source=lambda x, t: 2.0,
            dirichlet=_linear,
            initial=lambda x: _linear(x, T0),
        )
        _, solution = _solve(problem, space, field, quadrature)
        np.testing.assert_allclose(solution, _nodal_exact(space, _linear), atol=1e-9)

    def test_linear_on_translating_domain(self, coarse_mesh, box_boundary):
        """Test u = x + y + t is exact when the whole domain translates."""
        displacement = _translation(0.3)
        space, field, quadrature = _setup(coarse_mesh, box_boundary, displacement)
        problem = ModelProblem(source=lambda x, t: 1.0, dirichlet=_linear, initial=lambda x: _linear(x, T0))
        _, solution = _solve(problem, space, field, quadrature)
        np.testing.assert_allclose(solution, _nodal_exact(space, _linear, displacement), atol=1e-9)

    def test_cut_domain_constant(self, coarse_mesh, hole_boundary):
        """Test constants survive cut cells and aggregation."""
        space, field, quadrature = _setup(coarse_mesh, hole_boundary)
        problem = ModelProblem(dirichlet=lambda x, t: -1.0, initial=lambda x: -1.0)
        system = assemble_slab(problem, space, field, quadrature)
        system.coupling = jump_coupling(space, TransferRule.initial_rule(quadrature, problem.initial)).rhs
        aggregation = build_aggregates(space.spatial, classify_cells(coarse_mesh, hole_boundary).states)
        reduced = system.reduce(aggregation)
        assert reduced.size < space.n_dofs
        np.testing.assert_allclose(reduced.solve(), -1.0, atol=1e-8)


class TestSlabAssembler:
    """Tests for SlabAssembler guards."""

    def test_vector_space_refused(self, coarse_mesh, box_boundary):
        """Test the scalar problem needs a scalar space."""
        space, field, _ = _setup(coarse_mesh, box_boundary)
        with pytest.raises(ConfigurationError, match="scalar"):
            SlabAssembler(ModelProblem(), field.space, field)

    def test_quadrature_outside_space(self, coarse_mesh, box_boundary):
        """Test cells missing from the space are reported."""
        _, field, quadrature = _setup(coarse_mesh, box_boundary)
        space = SpaceTimeSpace(SpatialSpace(coarse_mesh, 1, np.arange(8)), 1)
        with pytest.raises(ConfigurationError, match="outside"):
            assemble_slab(ModelProblem(), space, field, quadrature)


class TestFixedDomainOracle:
    """Comparison with a tensor-product heat assembly on a fixed domain."""

    def test_matches_tensor_product_assembly(self, coarse_mesh):
        """Test zero motion, mu = 1 and w = 0 give Q1 x P1 heat matrices entry-wise."""
        boundary = OrientedBoundary.from_loops([rectangle_loop((0.0, 0.0), (3.0, 3.0))], neumann=[[True] * 4])
        space, field, quadrature = _setup(coarse_mesh, boundary)
        system = assemble_slab(ModelProblem(), space, field, quadrature)

        h, tau = 0.75, T1 - T0
        m1 = np.array([[1.0, 0.5], [0.5, 1.0]]) / 3.0
        k1 = np.array([[1.0, -1.0], [-1.0, 1.0]])
        index = {tuple(np.round(c, 9)): k for k, c in enumerate(space.spatial.node_coords)}
        n = space.spatial.n_dofs
        mass, stiffness = np.zeros((n, n)), np.zeros((n, n))
        corners = [(0, 0), (1, 0), (0, 1), (1, 1)]
        for i in range(4):
            for j in range(4):
                ids = [index[(round((i + a) * h, 9), round((j + b) * h, 9))] for a, b in corners]
                for (a, b), row in zip(corners, ids):
                    for (c, d), col in zip(corners, ids):
                        mass[row, col] += h * h * m1[a, c] * m1[b, d]
                        stiffness[row, col] += k1[a, c] * m1[b, d] + m1[a, c] * k1[b, d]

        time_derivative = np.array([[-0.5, 0.5], [-0.5, 0.5]])
        start_trace = np.array([[1.0, 0.0], [0.0, 0.0]])
        expected = np.kron(time_derivative + start_trace, mass) + tau * np.kron(m1, stiffness)
        np.testing.assert_allclose(system.matrix.toarray(), expected, atol=1e-12)
