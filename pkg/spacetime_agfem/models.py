"""Data models and enumerations for spacetime-agfem."""

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional

import numpy as np

from .exceptions import DegenerateInputError


class CellState(IntEnum):
    """Position of a background cell relative to the physical domain.

    Integer valued so per-cell states can live in numpy arrays.
    """

    INTERIOR = 0
    CUT = 1
    EXTERIOR = 2

    @property
    def label(self) -> str:
        """Return the lowercase name used in dumps."""
        return self.name.lower()

    @classmethod
    def from_string(cls, value: str) -> Optional["CellState"]:
        """Convert a string to a CellState, returning None if not found."""
        for state in cls:
            if state.name.lower() == value.strip().lower():
                return state
        return None


class BoundaryTag(str, Enum):
    """Boundary condition type attached to a boundary edge."""

    DIRICHLET = "D"
    NEUMANN = "N"

    @classmethod
    def from_string(cls, value: str) -> Optional["BoundaryTag"]:
        """Convert a file token to a BoundaryTag, returning None if not found."""
        for tag in cls:
            if tag.value == value.strip().upper() or tag.name.lower() == value.strip().lower():
                return tag
        return None


class MotionKind(str, Enum):
    """Catalog of boundary motions."""

    PRESCRIBED_TRANSLATION = "prescribed_translation"
    RIGID_ROTATION_OSCILLATION = "rigid_rotation_oscillation"
    PITCHING_ROTATION = "pitching_rotation"
    COMPOSED_WITH_TIME_RAMP = "composed_with_time_ramp"
    STATIC = "static"
    CUSTOM = "custom"

    @classmethod
    def choices(cls) -> list[str]:
        """Return the accepted config values."""
        return [kind.value for kind in cls]

    @classmethod
    def from_string(cls, value: str) -> Optional["MotionKind"]:
        """Convert a string to a MotionKind, returning None if not found."""
        for kind in cls:
            if kind.value == value.strip().lower():
                return kind
        return None


class DeformationMode(str, Enum):
    """How the slab deformation map is produced."""

    ELASTICITY = "elasticity"
    PRESCRIBED = "prescribed"

    @classmethod
    def choices(cls) -> list[str]:
        """Return the accepted config values."""
        return [mode.value for mode in cls]


class ProblemKind(str, Enum):
    """Scalar problems the harness knows how to set up."""

    MANUFACTURED = "manufactured"
    CONSTANT = "constant"
    TRANSPORT = "transport"

    @classmethod
    def choices(cls) -> list[str]:
        """Return the accepted config values."""
        return [kind.value for kind in cls]


def shoelace(vertices: np.ndarray) -> float:
    """Signed area of a closed vertex loop (positive when counterclockwise)."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class HalfPlane:
    """Closed half-plane {x : normal . x <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self) -> None:
        normal = np.asarray(self.normal, dtype=float).reshape(2)
        if abs(np.linalg.norm(normal) - 1.0) > 1e-12:
            raise DegenerateInputError(f"half-plane normal must be unit length, got {normal}")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_edge(cls, start: np.ndarray, end: np.ndarray) -> "HalfPlane":
        """Half-plane lying to the left of the directed edge start -> end."""
        start = np.asarray(start, dtype=float)
        direction = np.asarray(end, dtype=float) - start
        length = math.hypot(direction[0], direction[1])
        if length == 0.0:
            raise DegenerateInputError("half-plane edge has zero length")
        normal = np.array([direction[1], -direction[0]]) / length
        return cls(normal, float(normal @ start))

    def complement(self) -> "HalfPlane":
        """Closure of the opposite side."""
        return HalfPlane(-self.normal, -self.offset)

    def distance(self, points: np.ndarray) -> np.ndarray:
        """Signed distance of points to the line, negative inside."""
        return np.asarray(points, dtype=float) @ self.normal - self.offset


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Convex polygon with counterclockwise vertices; fewer than 3 means empty."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float).reshape(-1, 2))

    @classmethod
    def empty(cls) -> "ConvexPolygon":
        """Return the empty polygon."""
        return cls(np.zeros((0, 2)))

    @property
    def is_empty(self) -> bool:
        """True when the polygon has no interior."""
        return len(self.vertices) < 3

    @property
    def area(self) -> float:
        """Shoelace area."""
        return shoelace(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        """Area centroid (vertex mean for degenerate input)."""
        v = self.vertices
        area = self.area
        if area <= 0.0:
            return v.mean(axis=0)
        nxt = np.roll(v, -1, axis=0)
        cross = v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]
        return ((v + nxt) * cross[:, None]).sum(axis=0) / (6.0 * area)

    @property
    def diameter(self) -> float:
        """Largest vertex-to-vertex distance."""
        v = self.vertices
        if len(v) < 2:
            return 0.0
        diff = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((diff**2).sum(axis=-1)).max())

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned bounding box as (lower, upper)."""
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def halfplanes(self) -> list[HalfPlane]:
        """Edge half-planes whose intersection is the polygon."""
        v = self.vertices
        return [HalfPlane.from_edge(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


@dataclass(eq=False)
class PolyCell:
    """One cell of an intersection mesh: convex pieces with their parents."""

    pieces: list[ConvexPolygon]
    parent_current: int
    parent_previous: Optional[int] = None
    previous_simplex: Optional[int] = None
    measure: float = field(default=-1.0)

    def __post_init__(self) -> None:
        if self.measure < 0.0:
            self.measure = float(sum(piece.area for piece in self.pieces))


@dataclass
class NormReport:
    """Error norms accumulated over a slab march."""

    dg_error: float = 0.0
    l2_error: float = 0.0
    h1_error: float = 0.0
    c_mu: float = 1.0
    gradient_terms: list[float] = field(default_factory=list)
    boundary_terms: list[float] = field(default_factory=list)
    h2_terms: list[float] = field(default_factory=list)
    jump_terms: list[float] = field(default_factory=list)
    dg_history: list[float] = field(default_factory=list)

    @property
    def terms_nonnegative(self) -> bool:
        """True when every accumulated term is nonnegative."""
        terms = self.gradient_terms + self.boundary_terms + self.h2_terms + self.jump_terms
        return all(term >= 0.0 for term in terms) and min(self.l2_error, self.h1_error, self.dg_error) >= 0.0

    @property
    def message(self) -> str:
        """Return a human-readable summary."""
        return f"dg={self.dg_error:.6e} l2={self.l2_error:.6e} h1={self.h1_error:.6e}"

    def to_dict(self) -> dict:
        """Convert the report to a plain dictionary."""
        return {
            "dg_error": self.dg_error,
            "l2_error": self.l2_error,
            "h1_error": self.h1_error,
            "c_mu": self.c_mu,
            "gradient_terms": list(self.gradient_terms),
            "boundary_terms": list(self.boundary_terms),
            "h2_terms": list(self.h2_terms),
            "jump_terms": list(self.jump_terms),
            "dg_history": list(self.dg_history),
        }


REPORT_COLUMNS = ("n_cells", "h", "tau", "p", "q", "dg_err", "l2_err", "h1_err", "cond_M", "cond_A")


@dataclass
class ReportRow:
    """One CSV row of a run or convergence level."""

    n_cells: int
    h: float
    tau: float
    p: int
    q: int
    dg_err: float = math.nan
    l2_err: float = math.nan
    h1_err: float = math.nan
    cond_M: float = math.nan
    cond_A: float = math.nan

    def to_dict(self) -> dict:
        """Convert the row to a dictionary in column order."""
        return {name: getattr(self, name) for name in REPORT_COLUMNS}

    @classmethod
    def from_dict(cls, data: dict) -> "ReportRow":
        """Create a row from a dictionary (CSV strings accepted)."""
        return cls(
            n_cells=int(data["n_cells"]),
            h=float(data["h"]),
            tau=float(data["tau"]),
            p=int(data["p"]),
            q=int(data["q"]),
            dg_err=float(data.get("dg_err", math.nan)),
            l2_err=float(data.get("l2_err", math.nan)),
            h1_err=float(data.get("h1_err", math.nan)),
            cond_M=float(data.get("cond_M", math.nan)),
            cond_A=float(data.get("cond_A", math.nan)),
        )
