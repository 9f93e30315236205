"""Polygon kernel, oriented boundaries, cell classification and mesh intersection."""

from .boundary import OrientedBoundary, rectangle_loop, star_loop
from .classify import CutGeometry, cell_cap_exterior, cell_cap_interior, classify_cells
from .intersection import DeformedSimplices, IntersectionMesh, intersect_triple
from .restriction import SpatialIndex, restrict

__all__ = [
    "OrientedBoundary",
    "rectangle_loop",
    "star_loop",
    "CutGeometry",
    "classify_cells",
    "cell_cap_interior",
    "cell_cap_exterior",
    "DeformedSimplices",
    "IntersectionMesh",
    "intersect_triple",
    "SpatialIndex",
    "restrict",
]
