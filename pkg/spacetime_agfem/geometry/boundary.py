"""Oriented polyline boundaries: closed loops with the domain on their left."""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from shapely.geometry import LinearRing, MultiLineString

from ..exceptions import DegenerateInputError, InvalidGeometryError
from ..models import BoundaryTag, shoelace
from .polygon import polygon_contains, winding_numbers


@dataclass(eq=False)
class OrientedBoundary:
    """Explicit closed boundary made of directed edges.

    Attributes:
        vertices: Vertex coordinates, shape (nv, 2).
        edges: Directed vertex-index pairs, shape (ne, 2). The domain lies to the
            left of every edge.
        neumann: Per-edge flag, True for Neumann edges.
    """

    vertices: np.ndarray
    edges: np.ndarray
    neumann: Optional[np.ndarray] = None
    _loops: list[np.ndarray] = field(init=False, repr=False, default_factory=list)

    def __post_init__(self) -> None:
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        self.edges = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        if self.neumann is None:
            self.neumann = np.zeros(len(self.edges), dtype=bool)
        self.neumann = np.asarray(self.neumann, dtype=bool).reshape(-1)
        if len(self.edges) < 3 or len(self.vertices) < 3:
            raise DegenerateInputError("boundary needs at least 3 vertices and 3 edges")
        if len(self.neumann) != len(self.edges):
            raise InvalidGeometryError("one tag per edge is required")
        if self.edges.min() < 0 or self.edges.max() >= len(self.vertices):
            raise InvalidGeometryError("edge refers to a vertex that does not exist")
        self._loops = self._trace_loops()
        self.validate()

    def _trace_loops(self) -> list[np.ndarray]:
        nv = len(self.vertices)
        outgoing = np.bincount(self.edges[:, 0], minlength=nv)
        incoming = np.bincount(self.edges[:, 1], minlength=nv)
        if np.any(outgoing != 1) or np.any(incoming != 1):
            bad = int(np.where((outgoing != 1) | (incoming != 1))[0][0])
            raise InvalidGeometryError(f"vertex {bad} does not have exactly one incoming and one outgoing edge")
        edge_from = np.empty(nv, dtype=int)
        edge_from[self.edges[:, 0]] = np.arange(len(self.edges))
        visited = np.zeros(len(self.edges), dtype=bool)
        loops = []
        for first in range(len(self.edges)):
            if visited[first]:
                continue
            loop = []
            edge = first
            while not visited[edge]:
                visited[edge] = True
                loop.append(edge)
                edge = edge_from[self.edges[edge, 1]]
            loops.append(np.array(loop, dtype=int))
        return loops

    def validate(self) -> None:
        """Check simplicity of every loop, disjointness of loops and positive area.

        Raises:
            InvalidGeometryError: On any violation.
        """
        rings = []
        for loop in self._loops:
            coords = self.vertices[self.edges[loop, 0]]
            if len(coords) < 3:
                raise DegenerateInputError("boundary loop has fewer than 3 vertices")
            if not LinearRing(coords).is_simple:
                raise InvalidGeometryError("boundary loop is self-intersecting")
            rings.append(np.vstack([coords, coords[:1]]))
        if len(rings) > 1 and not MultiLineString(rings).is_simple:
            raise InvalidGeometryError("boundary loops intersect each other")
        if self.signed_area <= 0.0:
            raise InvalidGeometryError(
                f"enclosed area {self.signed_area:.6g} is not positive; check the loop orientation"
            )

    @classmethod
    def from_loops(
        cls,
        loops: Sequence[np.ndarray],
        neumann: Optional[Sequence[Sequence[bool]]] = None,
    ) -> "OrientedBoundary":
        """Build a boundary from vertex loops (each implicitly closed).

        Args:
            loops: One (k, 2) array per loop, oriented with the domain on the left.
            neumann: Optional per-loop, per-edge Neumann flags.

        Returns:
            The boundary.
        """
        vertices, edges, flags = [], [], []
        offset = 0
        for index, loop in enumerate(loops):
            loop = np.asarray(loop, dtype=float).reshape(-1, 2)
            count = len(loop)
            vertices.append(loop)
            edges.append(np.column_stack([np.arange(count), (np.arange(count) + 1) % count]) + offset)
            flags.append(np.zeros(count, bool) if neumann is None else np.asarray(neumann[index], bool))
            offset += count
        return cls(np.vstack(vertices), np.vstack(edges), np.concatenate(flags))

    @property
    def loops(self) -> list[np.ndarray]:
        """Edge indices of every loop in traversal order."""
        return self._loops

    @property
    def loop_vertices(self) -> list[np.ndarray]:
        """Vertex coordinates of every loop in traversal order."""
        return [self.vertices[self.edges[loop, 0]] for loop in self._loops]

    @property
    def edge_loop(self) -> np.ndarray:
        """Loop index of every edge."""
        owner = np.empty(len(self.edges), dtype=int)
        for index, loop in enumerate(self._loops):
            owner[loop] = index
        return owner

    @property
    def starts(self) -> np.ndarray:
        """Edge start points, shape (ne, 2)."""
        return self.vertices[self.edges[:, 0]]

    @property
    def ends(self) -> np.ndarray:
        """Edge end points, shape (ne, 2)."""
        return self.vertices[self.edges[:, 1]]

    @property
    def lengths(self) -> np.ndarray:
        """Edge lengths."""
        return np.linalg.norm(self.ends - self.starts, axis=1)

    @property
    def outward_normals(self) -> np.ndarray:
        """Unit normals pointing away from the domain (to the right of each edge)."""
        direction = self.ends - self.starts
        normals = np.column_stack([direction[:, 1], -direction[:, 0]])
        return normals / np.linalg.norm(normals, axis=1, keepdims=True)

    @property
    def loop_areas(self) -> np.ndarray:
        """Signed area of every loop."""
        return np.array([shoelace(coords) for coords in self.loop_vertices])

    @property
    def signed_area(self) -> float:
        """Total enclosed area (shoelace sum over loops)."""
        return float(self.loop_areas.sum())

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned bounding box as (lower, upper)."""
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def tag(self, edge: int) -> BoundaryTag:
        """Boundary condition tag of an edge."""
        return BoundaryTag.NEUMANN if self.neumann[edge] else BoundaryTag.DIRICHLET

    def loop_parents(self) -> np.ndarray:
        """Index of the innermost loop enclosing each loop, -1 for top level."""
        areas = np.abs(self.loop_areas)
        coords = self.loop_vertices
        parents = np.full(len(coords), -1, dtype=int)
        for index, loop in enumerate(coords):
            best = None
            for other, other_loop in enumerate(coords):
                if other == index or areas[other] <= areas[index]:
                    continue
                if polygon_contains(other_loop, loop[:1])[0]:
                    if best is None or areas[other] < areas[best]:
                        best = other
            if best is not None:
                parents[index] = best
        return parents

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict-ish point-in-domain test by winding number."""
        return winding_numbers(points, self.starts, self.ends) > 0

    def moved(self, vertices: np.ndarray) -> "OrientedBoundary":
        """Same topology and tags with new vertex positions."""
        return OrientedBoundary(np.asarray(vertices, dtype=float), self.edges.copy(), self.neumann.copy())

    def translated(self, offset: Sequence[float]) -> "OrientedBoundary":
        """Rigidly translated copy."""
        return self.moved(self.vertices + np.asarray(offset, dtype=float))


def rectangle_loop(lower: Sequence[float], upper: Sequence[float], counterclockwise: bool = True) -> np.ndarray:
    """Corner loop of an axis-aligned rectangle.

    Args:
        lower: Lower-left corner.
        upper: Upper-right corner.
        counterclockwise: Orientation. Clockwise loops describe holes.

    Returns:
        Array of shape (4, 2).
    """
    (x0, y0), (x1, y1) = lower, upper
    loop = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)
    return loop if counterclockwise else loop[::-1].copy()


def star_loop(
    center: Sequence[float],
    inner_radius: float,
    outer_radius: float,
    teeth: int,
    counterclockwise: bool = True,
) -> np.ndarray:
    """Gear-like star polygon alternating between two radii."""
    count = 2 * teeth
    angles = 2.0 * np.pi * np.arange(count) / count
    radii = np.where(np.arange(count) % 2 == 0, outer_radius, inner_radius)
    loop = np.asarray(center, dtype=float) + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    return loop if counterclockwise else loop[::-1].copy()
