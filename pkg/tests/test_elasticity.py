"""Tests for spacetime_agfem.deformation.elasticity module."""

import numpy as np
import pytest

from spacetime_agfem.deformation.elasticity import (
    ElasticExtensionProblem,
    ExtensionAssembler,
    artificial_boundary_dofs,
    solve_extension,
    vector_gradients,
    vector_values,
)
from spacetime_agfem.deformation.motion import MovingBoundary, Static, Translation, dirichlet_data
from spacetime_agfem.exceptions import ConfigurationError
from spacetime_agfem.fe.quadrature import build_quadrature
from spacetime_agfem.fe.space import SpatialSpace
from spacetime_agfem.geometry.classify import classify_cells
from spacetime_agfem.mesh.active import active_mesh


def _problem(boundary, motion, **kwargs):
    return ElasticExtensionProblem(dirichlet_data(MovingBoundary(boundary, motion, loops=[1]), 0.0), **kwargs)


class TestVectorBasis:
    """Tests for the interleaved vector basis helpers."""

    def test_values(self):
        """Test component c of shape a sits at index 2a + c."""
        values = vector_values(np.array([[[0.25, 0.75]]]))
        np.testing.assert_allclose(values[0, 0], [[0.25, 0.0], [0.0, 0.25], [0.75, 0.0], [0.0, 0.75]])

    def test_gradients(self):
        """Test gradient rows follow the component."""
        grads = vector_gradients(np.array([[[[1.0, 2.0]]]]))
        np.testing.assert_allclose(grads[0, 0, 0], [[1.0, 2.0], [0.0, 0.0]])
        np.testing.assert_allclose(grads[0, 0, 1], [[0.0, 0.0], [1.0, 2.0]])


class TestExtensionProblem:
    """Tests for ElasticExtensionProblem validation."""

    def test_time_order_zero(self, hole_boundary):
        """Test piecewise constant time cannot pin the slab start."""
        with pytest.raises(ConfigurationError, match="temporal order"):
            _problem(hole_boundary, Static(), time_order=0)

    def test_penalty_weights(self, hole_boundary):
        """Test tau_D = c0 p^2 mu / h."""
        problem = _problem(hole_boundary, Static(), penalty=5.0, order=2, mu=0.5)
        np.testing.assert_allclose(problem.penalty_weights(np.array([0.5])), [20.0])


class TestExtensionAssembler:
    """Tests for ExtensionAssembler."""

    def test_rigid_modes_in_kernel(self, coarse_mesh, box_boundary, hole_boundary):
        """Test the stiffness annihilates translations and infinitesimal rotations."""
        space = SpatialSpace(coarse_mesh, 1).vector()
        assembler = ExtensionAssembler(_problem(hole_boundary, Static()), space)
        stiffness = assembler.stiffness(build_quadrature(classify_cells(coarse_mesh, box_boundary), 1, 1))
        coords = space.scalar().node_coords
        translation = np.tile([1.0, 0.0], space.n_nodes)
        rotation = np.column_stack([-coords[:, 1], coords[:, 0]]).reshape(-1)
        assert np.abs(stiffness @ translation).max() < 1e-12
        assert np.abs(stiffness @ rotation).max() < 1e-12
        assert abs(stiffness - stiffness.T).max() < 1e-12

    def test_scalar_space_refused(self, coarse_mesh, hole_boundary):
        """Test the extension needs a vector space."""
        with pytest.raises(ConfigurationError):
            ExtensionAssembler(_problem(hole_boundary, Static()), SpatialSpace(coarse_mesh, 1))

    def test_artificial_boundary_dofs(self, coarse_mesh):
        """Test both components of the 16 box nodes are flagged."""
        mask = artificial_boundary_dofs(SpatialSpace(coarse_mesh, 1).vector())
        assert mask.sum() == 32
        assert mask[0] and mask[1]
        assert not mask[2 * 6]


class TestSolveExtension:
    """Tests for solve_extension on the 8 x 8 mesh with a square hole."""

    def test_static_boundary_gives_zero(self, small_mesh, hole_boundary):
        """Test zero boundary motion extends to zero."""
        active = active_mesh(small_mesh, classify_cells(small_mesh, hole_boundary))
        field = solve_extension(_problem(hole_boundary, Static()), active, 0.0, 0.25)
        np.testing.assert_allclose(field.coefficients, 0.0, atol=1e-12)

    def test_translating_hole(self, small_mesh, hole_boundary):
        """Test the extension follows the hole and vanishes on the box and at t0."""
        geometry = classify_cells(small_mesh, hole_boundary)
        active = active_mesh(small_mesh, geometry)
        field = solve_extension(_problem(hole_boundary, Translation((0.2, 0.0))), active, 0.0, 0.25)
        box = small_mesh.artificial_boundary_vertices
        np.testing.assert_allclose(field.vertex_displacement(0.25)[box], 0.0, atol=1e-12)
        np.testing.assert_allclose(field.vertex_displacement(0.0), 0.0, atol=1e-12)

        segments = geometry.segments
        on_hole = np.isin(segments.edges, hole_boundary.loops[1])
        cells = segments.cells[on_hole]
        points = segments.points[on_hole].mean(axis=1)[:, None, :]
        state = field.evaluate(cells, points, np.array([1.0]))
        mean = state.displacement[0, :, 0].mean(axis=0)
        assert mean[0] == pytest.approx(0.05, rel=0.15)
        assert abs(mean[1]) < 0.01
        assert state.J.min() > 0.0
