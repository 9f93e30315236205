"""Partition of the time interval into slabs."""

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..exceptions import ConfigurationError


@dataclass(frozen=True, eq=False)
class TimePartition:
    """Strictly increasing breakpoints t^1 < ... < t^{N+1}."""

    breakpoints: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        if len(points) < 2:
            raise ConfigurationError("a time partition needs at least one slab")
        if np.any(np.diff(points) <= 0.0):
            raise ConfigurationError("time breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", points)

    @classmethod
    def uniform(cls, end: float, slabs: int, start: float = 0.0) -> "TimePartition":
        """Equal slabs on [start, end]."""
        if slabs < 1:
            raise ConfigurationError(f"number of slabs must be >= 1, got {slabs}")
        return cls(np.linspace(start, end, slabs + 1))

    @classmethod
    def from_step(cls, end: float, tau: float, start: float = 0.0) -> "TimePartition":
        """Slabs of length tau, the number rounded up so the last one ends at ``end``."""
        if tau <= 0.0:
            raise ConfigurationError(f"time step must be positive, got {tau}")
        return cls.uniform(end, max(1, math.ceil((end - start) / tau - 1e-12)), start)

    @property
    def n_slabs(self) -> int:
        """Number of slabs N."""
        return len(self.breakpoints) - 1

    @property
    def steps(self) -> np.ndarray:
        """Slab lengths tau^n."""
        return np.diff(self.breakpoints)

    @property
    def tau(self) -> float:
        """Largest slab length."""
        return float(self.steps.max())

    @property
    def start(self) -> float:
        return float(self.breakpoints[0])

    @property
    def end(self) -> float:
        return float(self.breakpoints[-1])

    def slab(self, n: int) -> tuple[float, float]:
        """Interval of slab n (1-based)."""
        if not 1 <= n <= self.n_slabs:
            raise IndexError(f"slab {n} outside 1..{self.n_slabs}")
        return float(self.breakpoints[n - 1]), float(self.breakpoints[n])

    def slabs(self) -> Iterator[tuple[int, float, float]]:
        """Iterate (n, t^n, t^{n+1})."""
        for n in range(1, self.n_slabs + 1):
            yield (n, *self.slab(n))

    def __len__(self) -> int:
        return self.n_slabs


def extruded_measures(areas: Sequence[float], tau: float) -> np.ndarray:
    """Space-time measure area(K) * tau of every extruded cell."""
    return np.asarray(areas, dtype=float) * float(tau)
