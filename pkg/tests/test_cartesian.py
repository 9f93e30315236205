"""Tests for spacetime_agfem.mesh.cartesian module."""

import numpy as np
import pytest

from spacetime_agfem.exceptions import ConfigurationError, NonBijectiveMapError
from spacetime_agfem.mesh.cartesian import Grading, build_mesh, grading_map, simplexify


class TestGrading:
    """Tests for grading_map and Grading."""

    def test_fixed_points(self):
        """Test endpoints and the clustering point are fixed."""
        values = grading_map(np.array([0.0, 0.3, 1.0]), 0.3, 0.5)
        np.testing.assert_allclose(values, [0.0, 0.3, 1.0])

    def test_identity_for_alpha_one(self):
        """Test alpha = 1 leaves the interval unchanged."""
        xhat = np.linspace(0.0, 1.0, 7)
        np.testing.assert_allclose(grading_map(xhat, 0.5, 1.0), xhat)

    def test_clusters_towards_x0(self):
        """Test points move towards x0 for alpha < 1."""
        assert grading_map(np.array([0.25]), 0.5, 0.5)[0] > 0.25
        assert grading_map(np.array([0.75]), 0.5, 0.5)[0] < 0.75

    @pytest.mark.parametrize("x0, alpha", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.5)])
    def test_invalid_parameters(self, x0, alpha):
        """Test out-of-range grading parameters are rejected."""
        with pytest.raises(ConfigurationError):
            Grading(x0, alpha)

    def test_graded_mesh_spacing(self):
        """Test a graded mesh is finest around x0."""
        mesh = build_mesh((0.0, 0.0), (3.0, 3.0), (8, 8), [Grading(0.5, 0.6)] * 2)
        spacing = np.diff(mesh.axes[0])
        assert spacing.argmin() in (3, 4)
        assert mesh.axes[0][0] == 0.0 and mesh.axes[0][-1] == 3.0
        assert mesh.cell_areas.sum() == pytest.approx(9.0)


class TestCartesianMesh:
    """Tests for CartesianMesh numbering and geometry."""

    def test_quad_numbering(self, coarse_mesh):
        """Test quad q = j * nx + i has vertices (v00, v10, v11, v01)."""
        assert coarse_mesh.n_cells == 16
        assert coarse_mesh.n_vertices == 25
        assert coarse_mesh.cell_vertex_ids[5].tolist() == [6, 7, 12, 11]
        np.testing.assert_allclose(coarse_mesh.cell_coords([5])[0, 0], [0.75, 0.75])
        assert coarse_mesh.h == pytest.approx(0.75)

    def test_triangle_numbering(self):
        """Test quad q splits into triangles 2q and 2q + 1."""
        mesh = build_mesh((0.0, 0.0), (1.0, 1.0), (2, 2), simplexify_cells=True)
        assert mesh.n_cells == 8
        assert mesh.cell_vertex_ids[0].tolist() == [0, 1, 4]
        assert mesh.cell_vertex_ids[1].tolist() == [0, 4, 3]
        np.testing.assert_allclose(mesh.cell_areas, 0.125)
        i, j, kind = mesh.quad_of(np.array([3]))
        assert (i[0], j[0], kind[0]) == (1, 0, 1)

    def test_simplexify_idempotent(self, coarse_mesh):
        """Test simplexify doubles the cells once."""
        mesh = simplexify(coarse_mesh)
        assert mesh.simplexified and mesh.n_cells == 32
        assert simplexify(mesh) is mesh

    def test_reference_maps_invert(self, small_simplex_mesh):
        """Test physical and reference maps are inverse to each other."""
        cells = np.array([0, 17, 101])
        xi = np.array([[[0.2, 0.3], [0.5, 0.1]]] * 3)
        back = small_simplex_mesh.to_reference(cells, small_simplex_mesh.to_physical(cells, xi))
        np.testing.assert_allclose(back, xi, atol=1e-14)

    def test_quad_adjacency(self, coarse_mesh):
        """Test face neighbours of a corner and an inner quad."""
        assert coarse_mesh.adjacency[0].tolist() == [1, 4]
        assert coarse_mesh.adjacency[5].tolist() == [1, 4, 6, 9]

    def test_triangle_adjacency_symmetric(self, small_simplex_mesh):
        """Test triangle neighbour lists are symmetric with at most three entries."""
        adjacency = small_simplex_mesh.adjacency
        for cell, neighbours in enumerate(adjacency):
            assert len(neighbours) <= 3
            for other in neighbours:
                assert cell in adjacency[other]

    def test_artificial_boundary_vertices(self, coarse_mesh):
        """Test the outer ring of the lattice is flagged."""
        assert coarse_mesh.artificial_boundary_vertices.sum() == 16

    def test_invalid_counts(self):
        """Test zero cells are rejected."""
        with pytest.raises(ConfigurationError):
            build_mesh((0.0, 0.0), (1.0, 1.0), (0, 4))


class TestDeformedMesh:
    """Tests for CartesianMesh.deformed and reset."""

    def test_quads_cannot_deform(self, coarse_mesh):
        """Test only simplicial meshes accept displacements."""
        with pytest.raises(ConfigurationError):
            coarse_mesh.deformed(np.zeros((coarse_mesh.n_vertices, 2)))

    def test_inverted_triangle(self, small_simplex_mesh):
        """Test a folding displacement is refused."""
        displacement = np.zeros((small_simplex_mesh.n_vertices, 2))
        displacement[10] = (1.0, 1.0)
        with pytest.raises(NonBijectiveMapError):
            small_simplex_mesh.deformed(displacement)

    def test_reset_restores_lattice(self, small_simplex_mesh):
        """Test reset returns to the lattice coordinates."""
        displacement = np.zeros((small_simplex_mesh.n_vertices, 2))
        displacement[10] = (0.05, 0.0)
        moved = small_simplex_mesh.deformed(displacement)
        assert moved.is_deformed
        assert moved.cell_areas.sum() == pytest.approx(9.0)
        np.testing.assert_allclose(moved.reset().vertices, small_simplex_mesh.vertices)
