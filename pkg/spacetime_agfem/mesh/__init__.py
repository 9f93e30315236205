"""Background mesh, time partition and active meshes."""

from .active import ActiveMesh, active_mesh, extend_active
from .cartesian import CartesianMesh, Grading, build_mesh, simplexify
from .time import TimePartition

__all__ = [
    "CartesianMesh",
    "Grading",
    "build_mesh",
    "simplexify",
    "TimePartition",
    "ActiveMesh",
    "active_mesh",
    "extend_active",
]
