"""Tests for spacetime_agfem.fe.aggregation module."""

import numpy as np
import pytest
from scipy import sparse

from spacetime_agfem.exceptions import AggregationError, SolverError
from spacetime_agfem.fe.aggregation import (
    ReducedSystem,
    build_aggregates,
    constrain_system,
    extension_apply,
    restrict_to_free,
)
from spacetime_agfem.fe.evaluation import shape_batch
from spacetime_agfem.fe.space import SpaceTimeSpace, SpatialSpace
from spacetime_agfem.geometry.classify import classify_cells
from spacetime_agfem.models import CellState


@pytest.fixture
def hole_aggregation(coarse_mesh, hole_boundary):
    """Aggregation of Q1 on the 4 x 4 mesh with a square hole."""
    geometry = classify_cells(coarse_mesh, hole_boundary)
    space = SpatialSpace(coarse_mesh, 1, geometry.active_cells)
    return build_aggregates(space, geometry.states)


class TestBuildAggregates:
    """Tests for build_aggregates."""

    def test_roots_lowest_id_on_ties(self, hole_aggregation):
        """Test cut cells take the lowest-numbered interior neighbour."""
        assert [hole_aggregation.root(c) for c in (5, 6, 9, 10)] == [1, 2, 8, 11]
        assert hole_aggregation.root(0) == 0
        assert hole_aggregation.distances[5] == 1

    def test_constrained_centre_node(self, hole_aggregation):
        """Test the node touched only by cut cells is constrained."""
        assert hole_aggregation.constrained_nodes.tolist() == [12]
        assert hole_aggregation.owners.tolist() == [5]
        assert hole_aggregation.n_free == 24
        assert not hole_aggregation.is_identity

    def test_extrapolation_weights(self, hole_aggregation):
        """Test the constrained node extrapolates the root cell's bilinear polynomial."""
        row = hole_aggregation.prolongation.getrow(12).toarray().ravel()
        index = hole_aggregation.free_index
        assert row[index[2]] == pytest.approx(-1.0)
        assert row[index[7]] == pytest.approx(2.0)
        assert np.sum(np.abs(row) > 1e-12) == 2

    def test_reproduces_linear_fields(self, hole_aggregation):
        """Test extension from free values reproduces a linear function."""
        coords = hole_aggregation.space.node_coords
        field = 1.0 + 2.0 * coords[:, 0] - coords[:, 1]
        extended = extension_apply(hole_aggregation, field[hole_aggregation.free_nodes])
        np.testing.assert_allclose(extended, field, atol=1e-12)

    def test_all_interior_is_identity(self, coarse_mesh):
        """Test a mesh without cut cells needs no constraints."""
        space = SpatialSpace(coarse_mesh, 1)
        aggregation = build_aggregates(space, np.full(coarse_mesh.n_cells, CellState.INTERIOR))
        assert aggregation.is_identity
        assert aggregation.n_free == space.n_nodes

    def test_orphan_cells(self, coarse_mesh):
        """Test cells without a reachable interior cell raise AggregationError."""
        space = SpatialSpace(coarse_mesh, 1)
        with pytest.raises(AggregationError) as excinfo:
            build_aggregates(space, np.full(coarse_mesh.n_cells, CellState.CUT))
        assert excinfo.value.cell == 0


    @pytest.mark.parametrize("p,q", [(1, 1), (2, 1), (2, 2)])
    def test_reproduces_space_time_monomials(self, small_mesh, hole_boundary, p, q):
        """Test x^i y^j s^b with i + j <= p, b <= q survives extension at 100 random cut-cell points."""
        rng = np.random.default_rng(5101 + 10 * p + q)
        geometry = classify_cells(small_mesh, hole_boundary)
        spatial = SpatialSpace(small_mesh, p, geometry.active_cells)
        aggregation = build_aggregates(spatial, geometry.states)
        temporal = SpaceTimeSpace(spatial, q).temporal
        cells = rng.choice(geometry.cut_cells, 100)
        lower, upper = small_mesh.cell_bboxes
        points = lower[cells] + rng.uniform(size=(100, 2)) * (upper[cells] - lower[cells])
        batch = shape_batch(spatial, cells, points[:, None, :])
        s = rng.uniform(0.0, 1.0, 100)
        weights = temporal.values(s)
        coords = spatial.node_coords
        for degree in range(p + 1):
            for i in range(degree + 1):
                for b in range(q + 1):
                    nodal = coords[:, 0] ** i * coords[:, 1] ** (degree - i)
                    values = np.concatenate([nodal * node**b for node in temporal.nodes])
                    free = restrict_to_free(aggregation, values, layers=q + 1)
                    extended = extension_apply(aggregation, free, layers=q + 1).reshape(q + 1, -1)
                    computed = np.einsum("kj,kqa,jka->k", weights, batch.values, extended[:, batch.nodes])
                    expected = points[:, 0] ** i * points[:, 1] ** (degree - i) * s**b
                    np.testing.assert_allclose(computed, expected, atol=1e-10)


class TestExpansion:
    """Tests for vector and space-time expansion of the prolongation."""

    def test_expand_shape(self, hole_aggregation):
        """Test the expanded prolongation covers components and layers."""
        matrix = hole_aggregation.expand(components=2, layers=3)
        assert matrix.shape == (6 * 25, 6 * 24)

    def test_vector_layers_round_trip(self, hole_aggregation):
        """Test restrict then extend reproduces a linear vector field in every layer."""
        coords = hole_aggregation.space.node_coords
        layer = np.column_stack([coords[:, 0], 2.0 - coords[:, 1]]).reshape(-1)
        values = np.concatenate([layer, 3.0 * layer])
        free = restrict_to_free(hole_aggregation, values, components=2, layers=2)
        assert len(free) == 2 * 2 * 24
        np.testing.assert_allclose(extension_apply(hole_aggregation, free, 2, 2), values, atol=1e-12)


class TestConstrainSystem:
    """Tests for constrain_system and ReducedSystem."""

    def test_without_aggregation(self):
        """Test no aggregation keeps the system."""
        matrix = sparse.diags([2.0, 4.0]).tocsr()
        system = constrain_system(matrix, np.array([2.0, 8.0]), None)
        assert system.size == 2
        np.testing.assert_allclose(system.solve(), [1.0, 2.0])

    def test_reduced_identity(self, hole_aggregation):
        """Test the reduced identity is P^T P."""
        n = hole_aggregation.space.n_nodes
        system = constrain_system(sparse.identity(n, format="csr"), np.ones(n), hole_aggregation)
        p = hole_aggregation.prolongation
        np.testing.assert_allclose(system.matrix.toarray(), (p.T @ p).toarray())
        assert system.size == 24

    def test_fixed_dofs_removed(self):
        """Test fixed DOFs drop out of the reduced system."""
        matrix = sparse.identity(3, format="csr")
        system = constrain_system(matrix, np.ones(3), None, fixed=np.array([False, True, False]))
        assert system.size == 2
        np.testing.assert_allclose(system.solve(), [1.0, 0.0, 1.0])

    def test_singular(self):
        """Test a singular reduced matrix raises SolverError."""
        system = ReducedSystem(sparse.csr_matrix((2, 2)), np.ones(2), sparse.identity(2, format="csr"))
        with pytest.raises(SolverError):
            system.solve()

    def test_empty(self):
        """Test an empty reduced system returns zeros on all DOFs."""
        system = ReducedSystem(sparse.csr_matrix((0, 0)), np.zeros(0), sparse.csr_matrix((3, 0)))
        np.testing.assert_allclose(system.solve(), np.zeros(3))
