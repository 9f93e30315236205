"""Tests for spacetime_agfem.fe.basis and quadrature modules."""

from math import factorial

import numpy as np
import pytest

from spacetime_agfem.exceptions import ConfigurationError
from spacetime_agfem.fe.basis import ReferenceElement, TemporalBasis, gauss_lobatto_nodes
from spacetime_agfem.fe.quadrature import (
    build_quadrature,
    gauss_legendre,
    polygon_rule,
    square_rule,
    triangle_rule,
)
from spacetime_agfem.geometry.classify import classify_cells
from spacetime_agfem.models import BoundaryTag

SAMPLE = np.array([[0.1, 0.2], [0.35, 0.4], [0.05, 0.9]])


class TestGaussLobatto:
    """Tests for gauss_lobatto_nodes."""

    def test_low_counts(self):
        """Test two and three point rules."""
        np.testing.assert_allclose(gauss_lobatto_nodes(2), [0.0, 1.0])
        np.testing.assert_allclose(gauss_lobatto_nodes(3), [0.0, 0.5, 1.0], atol=1e-15)

    def test_four_points(self):
        """Test the interior points of the four point rule."""
        expected = 0.5 * (1.0 + np.array([-1.0, -1.0 / np.sqrt(5.0), 1.0 / np.sqrt(5.0), 1.0]))
        np.testing.assert_allclose(gauss_lobatto_nodes(4), expected)

    def test_too_few(self):
        """Test one point is refused."""
        with pytest.raises(ConfigurationError):
            gauss_lobatto_nodes(1)


class TestReferenceElement:
    """Tests for ReferenceElement."""

    @pytest.mark.parametrize("shape, order, count", [("quad", 1, 4), ("quad", 2, 9), ("triangle", 1, 3), ("triangle", 3, 10)])
    def test_node_counts(self, shape, order, count):
        """Test the number of shape functions."""
        assert ReferenceElement(shape, order).n_nodes == count

    @pytest.mark.parametrize("shape, order", [("quad", 2), ("triangle", 3)])
    def test_kronecker_property(self, shape, order):
        """Test shape function i is one at node i and zero elsewhere."""
        element = ReferenceElement(shape, order)
        np.testing.assert_allclose(element.values(element.nodes), np.eye(element.n_nodes), atol=1e-10)

    @pytest.mark.parametrize("shape, order", [("quad", 3), ("triangle", 2)])
    def test_partition_of_unity(self, shape, order):
        """Test values sum to one and gradients to zero."""
        element = ReferenceElement(shape, order)
        np.testing.assert_allclose(element.values(SAMPLE).sum(axis=-1), 1.0)
        np.testing.assert_allclose(element.gradients(SAMPLE).sum(axis=-2), 0.0, atol=1e-10)

    def test_bilinear_hessian(self):
        """Test the xy shape function of the bilinear element."""
        element = ReferenceElement.quadrilateral(1)
        hessian = element.hessians(np.array([[0.3, 0.7]]))[0, 3]
        np.testing.assert_allclose(hessian, [[0.0, 1.0], [1.0, 0.0]], atol=1e-12)

    def test_invalid(self):
        """Test unknown shapes and order zero are refused."""
        with pytest.raises(ConfigurationError):
            ReferenceElement("hexagon", 1)
        with pytest.raises(ConfigurationError):
            ReferenceElement.triangle(0)


class TestTemporalBasis:
    """Tests for TemporalBasis."""

    def test_piecewise_constant(self):
        """Test q = 0 has the midpoint node and constant value one."""
        basis = TemporalBasis(0)
        np.testing.assert_allclose(basis.nodes, [0.5])
        np.testing.assert_allclose(basis.values(np.array([0.1, 0.9])), [[1.0], [1.0]])
        np.testing.assert_allclose(basis.derivatives(np.array([0.3])), [[0.0]])

    def test_linear(self):
        """Test q = 1 has the endpoint hat functions."""
        basis = TemporalBasis(1)
        np.testing.assert_allclose(basis.values(np.array(0.25)), [0.75, 0.25])
        np.testing.assert_allclose(basis.derivatives(np.array(0.6)), [-1.0, 1.0])

    def test_negative_order(self):
        """Test negative orders are refused."""
        with pytest.raises(ConfigurationError):
            TemporalBasis(-1)


class TestRules:
    """Tests for the reference quadrature rules."""

    def test_gauss_legendre_exactness(self):
        """Test three points integrate x^5 on [0, 1]."""
        x, w = gauss_legendre(3)
        assert w.sum() == pytest.approx(1.0)
        assert (w * x**5).sum() == pytest.approx(1.0 / 6.0)

    def test_square_rule(self):
        """Test the tensor rule integrates x^4 y^4."""
        points, weights = square_rule(4)
        assert (weights * points[:, 0] ** 4 * points[:, 1] ** 4).sum() == pytest.approx(1.0 / 25.0)

    @pytest.mark.parametrize("a, b", [(4, 0), (2, 2), (1, 3), (0, 0)])
    def test_triangle_rule(self, a, b):
        """Test the collapsed rule integrates monomials of total degree 4."""
        points, weights = triangle_rule(4)
        exact = factorial(a) * factorial(b) / factorial(a + b + 2)
        assert (weights * points[:, 0] ** a * points[:, 1] ** b).sum() == pytest.approx(exact)

    def test_polygon_rule(self, unit_square):
        """Test the fan rule on the unit square."""
        points, weights, dropped = polygon_rule(unit_square, 2)
        assert dropped == 0
        assert weights.sum() == pytest.approx(1.0)
        assert (weights * points[:, 0] ** 2).sum() == pytest.approx(1.0 / 3.0)


class TestCutQuadrature:
    """Tests for build_quadrature on the 4 x 4 mesh with a square hole."""

    def test_measures(self, coarse_mesh, hole_boundary):
        """Test spatial, facet and space-time measures."""
        quadrature = build_quadrature(classify_cells(coarse_mesh, hole_boundary), 1, 1)
        assert quadrature.degree == 4
        assert quadrature.spatial_measure == pytest.approx(8.0)
        assert quadrature.facets.weights.sum() == pytest.approx(16.0)
        assert quadrature.time_weights.sum() == pytest.approx(1.0)
        assert len(quadrature.time_points) == 3
        assert quadrature.spacetime_measure(0.5) == pytest.approx(4.0)
        assert quadrature.cell_measures[5] == pytest.approx(0.3125)

    def test_first_moment(self, coarse_mesh, hole_boundary):
        """Test the integral of x over the box minus the hole."""
        quadrature = build_quadrature(classify_cells(coarse_mesh, hole_boundary), 1, 0)
        moment = sum((b.weights * b.points[..., 0]).sum() for b in quadrature.volume_batches)
        assert moment == pytest.approx(13.5 - 1.5)

    def test_facet_tags(self, coarse_mesh, hole_boundary):
        """Test every segment is Dirichlet by default."""
        facets = build_quadrature(classify_cells(coarse_mesh, hole_boundary), 1, 1).facets
        assert len(facets.select(BoundaryTag.DIRICHLET)) == 24
        assert len(facets.select(BoundaryTag.NEUMANN)) == 0
        assert facets.points.shape == (24, 3, 2)
