"""Error hierarchy for spacetime-agfem.

Every error carries the process exit code the CLI reports for it.
"""

from typing import Optional


class SpaceTimeError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1

    def __init__(self, message: str, *, slab: Optional[int] = None, stage: Optional[str] = None) -> None:
        super().__init__(message)
        self.detail = message
        self.slab = slab
        self.stage = stage

    def with_context(self, slab: Optional[int], stage: str) -> "SpaceTimeError":
        """Attach the slab index and stage name where the error surfaced.

        Args:
            slab: 1-based slab index, or None outside the slab loop.
            stage: Name of the pipeline stage.

        Returns:
            The same error, for re-raising.
        """
        if self.stage is None:
            self.slab = slab
            self.stage = stage
        return self

    def __str__(self) -> str:
        if self.stage is None:
            return self.detail
        where = f"slab {self.slab}, " if self.slab is not None else ""
        return f"[{where}stage {self.stage}] {self.detail}"


class ConfigurationError(SpaceTimeError):
    """Invalid configuration or input data."""

    exit_code = 2


class BoundaryFormatError(ConfigurationError):
    """Malformed boundary file."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        text = f"line {line}: {message}" if line is not None else message
        super().__init__(text)
        self.line = line


class GeometryError(SpaceTimeError):
    """Base class for geometric failures."""

    exit_code = 3


class DegenerateInputError(GeometryError):
    """Too few vertices or zero-size input."""


class InvalidGeometryError(GeometryError):
    """Self-intersecting or inconsistently oriented geometry."""


class ToleranceError(GeometryError):
    """A boundary vertex falls inside the snapping band of a mesh vertex."""

    def __init__(self, message: str, cell: Optional[int] = None) -> None:
        super().__init__(message)
        self.cell = cell


class CoverageError(GeometryError):
    """Part of the current domain is not covered by the previous deformed mesh."""

    def __init__(self, message: str, cell: Optional[int] = None) -> None:
        super().__init__(message)
        self.cell = cell


class TransferGeometryError(GeometryError):
    """A transfer quadrature point maps outside its parent reference cell."""


class ArtificialDomainError(GeometryError):
    """The moving domain leaves the artificial background domain."""


class DegenerateNormalError(GeometryError):
    """The transported normal vanishes."""


class SolverError(SpaceTimeError):
    """Base class for discretisation and linear algebra failures."""

    exit_code = 4


class AggregationError(SolverError):
    """A cell that needs a root has no interior cell reachable."""

    def __init__(self, message: str, cell: Optional[int] = None) -> None:
        super().__init__(message)
        self.cell = cell


class NonBijectiveMapError(SolverError):
    """The deformation map folds (det F_x <= 0)."""


class SingularMapError(SolverError):
    """The deformation gradient is singular at an evaluation point."""
