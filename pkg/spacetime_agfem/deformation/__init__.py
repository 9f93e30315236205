"""Boundary motions and the slab deformation map."""

from .elasticity import ElasticExtensionProblem, solve_extension
from .field import DeformationField, DeformationState
from .motion import MovingBoundary, SmoothCutoff, build_motion, dirichlet_data

__all__ = [
    "MovingBoundary",
    "SmoothCutoff",
    "build_motion",
    "dirichlet_data",
    "DeformationField",
    "DeformationState",
    "ElasticExtensionProblem",
    "solve_extension",
]
