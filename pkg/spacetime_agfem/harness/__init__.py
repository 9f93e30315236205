"""Manufactured solutions, run setups and study drivers."""

from .manufactured import ConstantSolution, ManufacturedSolution
from .runner import convergence, demo_moving, run
from .setups import Setup, build_setup

__all__ = [
    "ManufacturedSolution",
    "ConstantSolution",
    "Setup",
    "build_setup",
    "run",
    "convergence",
    "demo_moving",
]
