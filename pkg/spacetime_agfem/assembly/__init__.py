"""Slab assembly, inter-slab transfer, marching and error norms."""

from .norms import error_norms
from .problem import ModelProblem
from .slab import SlabSystem, assemble_slab
from .solver import MarchOptions, MarchResult, SlabMarcher, SlabResult, march
from .transfer import TransferKind, TransferRule, jump_coupling

__all__ = [
    "ModelProblem",
    "SlabSystem",
    "assemble_slab",
    "TransferKind",
    "TransferRule",
    "jump_coupling",
    "MarchOptions",
    "MarchResult",
    "SlabMarcher",
    "SlabResult",
    "march",
    "error_norms",
]
