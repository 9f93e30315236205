"""
spacetime-agfem

Space-time unfitted finite elements on moving two-dimensional domains.

Slabs of a time partition are discretized on a fixed Cartesian background
mesh: cells are classified against the current boundary, a deformation map
carries the reference slab onto the moving domain, the aggregated finite
element space keeps small cut cells stable, and consecutive slabs are
coupled through the intersection of their meshes.
"""

__version__ = "0.1.0"
__author__ = "Timothy A. DeWees"
__license__ = "MIT"

from .config import RunConfig
from .exceptions import ConfigurationError, GeometryError, SolverError, SpaceTimeError
from .models import BoundaryTag, CellState, ConvexPolygon, MotionKind, NormReport, ReportRow
from .protocols import BoundaryMotion, ExactSolution, ScalarField

__all__ = [
    "RunConfig",
    "SpaceTimeError",
    "ConfigurationError",
    "GeometryError",
    "SolverError",
    "CellState",
    "BoundaryTag",
    "MotionKind",
    "ConvexPolygon",
    "NormReport",
    "ReportRow",
    "ExactSolution",
    "ScalarField",
    "BoundaryMotion",
]
