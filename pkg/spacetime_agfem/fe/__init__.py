"""Finite element spaces, quadrature and aggregation."""

from .aggregation import AggregationMap, ReducedSystem, build_aggregates, constrain_system
from .basis import TemporalBasis
from .quadrature import CutQuadrature, build_quadrature
from .space import SpaceTimeSpace, SpatialSpace

__all__ = [
    "TemporalBasis",
    "SpatialSpace",
    "SpaceTimeSpace",
    "CutQuadrature",
    "build_quadrature",
    "AggregationMap",
    "ReducedSystem",
    "build_aggregates",
    "constrain_system",
]
