"""Shared pytest fixtures for spacetime-agfem tests."""

import logging

import numpy as np
import pytest

from spacetime_agfem.config import RunConfig
from spacetime_agfem.geometry.boundary import OrientedBoundary, rectangle_loop
from spacetime_agfem.logging_config import BASE_LOGGER, close_file_handlers
from spacetime_agfem.mesh.cartesian import build_mesh
from spacetime_agfem.models import ConvexPolygon


@pytest.fixture
def unit_square():
    """Counterclockwise unit square."""
    return ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


@pytest.fixture
def box_boundary():
    """Boundary of the box [0, 3]^2 without holes."""
    return OrientedBoundary.from_loops([rectangle_loop((0.0, 0.0), (3.0, 3.0))])


@pytest.fixture
def hole_boundary():
    """Box [0, 3]^2 with the clockwise square hole [1, 2]^2."""
    return OrientedBoundary.from_loops(
        [rectangle_loop((0.0, 0.0), (3.0, 3.0)), rectangle_loop((1.0, 1.0), (2.0, 2.0), counterclockwise=False)]
    )


@pytest.fixture
def coarse_mesh():
    """4 x 4 quadrilateral mesh of [0, 3]^2."""
    return build_mesh((0.0, 0.0), (3.0, 3.0), (4, 4))


@pytest.fixture
def small_mesh():
    """8 x 8 quadrilateral mesh of [0, 3]^2."""
    return build_mesh((0.0, 0.0), (3.0, 3.0), (8, 8))


@pytest.fixture
def small_simplex_mesh():
    """8 x 8 mesh of [0, 3]^2 split into triangles."""
    return build_mesh((0.0, 0.0), (3.0, 3.0), (8, 8), simplexify_cells=True)


@pytest.fixture
def small_config(tmp_path):
    """Translating-hole config on a 4 x 4 mesh with two slabs writing into tmp_path."""
    config = RunConfig()
    config.mesh.counts = (4, 4)
    config.time.slabs = 2
    config.output.directory = str(tmp_path / "out")
    config.output.log_file = False
    return config.validate()


@pytest.fixture(autouse=True)
def _release_log_files():
    """Drop handlers a test may have attached to the package logger."""
    yield
    close_file_handlers()
    logger = logging.getLogger(BASE_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)


@pytest.fixture
def boundary_file(tmp_path):
    """Boundary file of the box with a square hole."""
    path = tmp_path / "hole.bnd"
    path.write_text(
        "# box with hole\n8 8\n0 0\n3 0\n3 3\n0 3\n1 1\n1 2\n2 2\n2 1\n"
        "0 1\n1 2\n2 3\n3 0\n4 5\n5 6\n6 7\n7 4\n"
    )
    return path


@pytest.fixture
def make_star_hole():
    """Builder of clockwise star-shaped loops with jittered angles and random radii."""

    def build(rng, center_range=(1.0, 2.0), radius_range=(0.3, 0.7)):
        n = int(rng.integers(5, 12))
        angles = (np.arange(n) + rng.uniform(-0.3, 0.3, n)) * 2.0 * np.pi / n + rng.uniform(0.0, 2.0 * np.pi)
        radii = rng.uniform(*radius_range, n)
        center = rng.uniform(*center_range, 2)
        loop = center + radii[:, None] * np.column_stack([np.cos(angles), np.sin(angles)])
        return loop[::-1].copy()

    return build
