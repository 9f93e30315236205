"""Exact 1-norm condition numbers of the aggregated slab matrices."""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..fe.aggregation import AggregationMap
from .slab import SlabSystem

logger = logging.getLogger(__name__)

DEFAULT_MAX_DOFS = 4000


@dataclass
class Conditioning:
    """Condition numbers of the reduced mass and stiffness matrices."""

    cond_M: float
    cond_A: float
    size: int

    @property
    def computed(self) -> bool:
        return not (math.isnan(self.cond_M) or math.isnan(self.cond_A))


def condition_number(matrix: np.ndarray) -> float:
    """kappa_1 via the explicit inverse; infinite for singular matrices."""
    try:
        value = float(np.linalg.cond(matrix, 1))
    except np.linalg.LinAlgError:
        value = math.inf
    if not math.isfinite(value):
        logger.warning(f"Matrix of size {matrix.shape[0]} is singular; condition number reported as inf")
        return math.inf
    return value


def condition_numbers(
    system: SlabSystem, aggregation: Optional[AggregationMap], max_dofs: int = DEFAULT_MAX_DOFS
) -> Conditioning:
    """kappa_1(M) and kappa_1(A) of one slab after aggregation.

    M is the reference-slab mass of the extended basis and A the bilinear
    form a_h on the same basis pairs.

    Args:
        system: Assembled slab.
        aggregation: Aggregation of the slab space; None uses all DOFs.
        max_dofs: Largest reduced size for which dense inverses are formed.

    Returns:
        The condition numbers, NaN when the system is above ``max_dofs``.
    """
    layers = system.space.n_layers
    if aggregation is None:
        prolongation = None
        size = system.size
    else:
        prolongation = aggregation.expand(1, layers)
        size = prolongation.shape[1]
    if size > max_dofs:
        logger.warning(f"Skipping condition numbers: {size} DOFs exceed the limit of {max_dofs}")
        return Conditioning(math.nan, math.nan, size)

    def reduced(matrix):
        if prolongation is not None:
            matrix = prolongation.T @ matrix @ prolongation
        return matrix.toarray()

    result = Conditioning(
        condition_number(reduced(system.reference_mass)), condition_number(reduced(system.bilinear)), size
    )
    logger.debug(f"Condition numbers on {size} DOFs: M {result.cond_M:.4e}, A {result.cond_A:.4e}")
    return result
