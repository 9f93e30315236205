"""Quadrature on interior cells, cut-cell pieces, boundary segments and the slab interval.

Cut pieces are fan-triangulated and every triangle gets a collapsed
Gauss rule, so the spatial rules stay exact for polynomials of the requested
degree whatever the decomposition.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_legendre

from ..geometry.boundary import OrientedBoundary
from ..geometry.classify import BoundarySegments, CutGeometry
from ..geometry.polygon import SLIVER_FACTOR, fan_triangles
from ..models import BoundaryTag, CellState, ConvexPolygon

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def gauss_legendre(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights on [0, 1]."""
    points, weights = roots_legendre(count)
    return 0.5 * (points + 1.0), 0.5 * weights


@lru_cache(maxsize=None)
def square_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss rule on the unit square, exact to the given degree per direction."""
    x, w = gauss_legendre(degree // 2 + 1)
    xx, yy = np.meshgrid(x, x, indexing="xy")
    return np.column_stack([xx.ravel(), yy.ravel()]), np.outer(w, w).ravel()


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed (Duffy) Gauss rule on the unit triangle, exact to total degree ``degree``."""
    s, ws = gauss_legendre((degree + 3) // 2)
    t, wt = gauss_legendre((degree + 2) // 2)
    ss, tt = np.meshgrid(s, t, indexing="ij")
    points = np.column_stack([ss.ravel(), ((1.0 - ss) * tt).ravel()])
    weights = (np.outer(ws, wt) * (1.0 - ss)).ravel()
    return points, weights


def polygon_rule(poly: ConvexPolygon, degree: int, sliver: float = 0.0) -> tuple[np.ndarray, np.ndarray, int]:
    """Fan-triangle rule on a convex polygon.

    Returns:
        (points (nq, 2), weights (nq,), number of dropped zero-area triangles).
    """
    ref_points, ref_weights = triangle_rule(degree)
    points, weights, dropped = [], [], 0
    for a, b, c in fan_triangles(poly):
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
        if area2 <= 2.0 * sliver:
            dropped += 1
            continue
        points.append(a + ref_points[:, :1] * (b - a) + ref_points[:, 1:] * (c - a))
        weights.append(ref_weights * area2)
    if not points:
        return np.zeros((0, 2)), np.zeros(0), dropped
    return np.concatenate(points), np.concatenate(weights), dropped


@dataclass(eq=False)
class QuadratureBatch:
    """Volume points of several cells, zero-padded to a common count.

    Attributes:
        cells: Cell ids, shape (k,).
        points: Reference-domain points, shape (k, nq, 2).
        weights: Weights including the area factor, shape (k, nq).
    """

    cells: np.ndarray
    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def empty(cls) -> "QuadratureBatch":
        return cls(np.zeros(0, dtype=int), np.zeros((0, 1, 2)), np.zeros((0, 1)))

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def measures(self) -> np.ndarray:
        """Sum of weights per cell."""
        return self.weights.sum(axis=1)

    @classmethod
    def from_point_lists(cls, cells: Sequence[int], points: list[np.ndarray], weights: list[np.ndarray]) -> "QuadratureBatch":
        """Pad per-cell point lists into one batch; padded points repeat the first point with zero weight."""
        if not cells:
            return cls.empty()
        width = max(1, max(len(w) for w in weights))
        pts = np.zeros((len(cells), width, 2))
        wts = np.zeros((len(cells), width))
        for k, (p, w) in enumerate(zip(points, weights)):
            pts[k, : len(w)] = p
            if len(w):
                pts[k, len(w):] = p[0]
            wts[k, : len(w)] = w
        return cls(np.asarray(cells, dtype=int), pts, wts)


@dataclass(eq=False)
class FacetBatch:
    """Gauss points on boundary segments.

    Attributes:
        cells: Owning cell per segment, shape (k,).
        edges: Boundary edge per segment.
        points: Points, shape (k, ng, 2).
        params: Edge parameter of every point in [0, 1], shape (k, ng).
        weights: Weights including the segment length, shape (k, ng).
        normals: Outward unit normal per segment, shape (k, 2).
        tags: Boundary condition per segment.
    """

    cells: np.ndarray
    edges: np.ndarray
    points: np.ndarray
    params: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    tags: np.ndarray

    def __len__(self) -> int:
        return len(self.cells)

    def select(self, tag: BoundaryTag) -> "FacetBatch":
        """Segments with the given boundary tag."""
        mask = self.tags == tag.value
        return FacetBatch(
            self.cells[mask],
            self.edges[mask],
            self.points[mask],
            self.params[mask],
            self.weights[mask],
            self.normals[mask],
            self.tags[mask],
        )

    @classmethod
    def from_segments(cls, segments: BoundarySegments, boundary: OrientedBoundary, count: int) -> "FacetBatch":
        """Gauss rule with ``count`` points on every segment."""
        s, w = gauss_legendre(count)
        if len(segments) == 0:
            return cls(
                np.zeros(0, int), np.zeros(0, int), np.zeros((0, count, 2)), np.zeros((0, count)),
                np.zeros((0, count)), np.zeros((0, 2)), np.zeros(0, dtype="<U1"),
            )
        a, b = segments.points[:, 0], segments.points[:, 1]
        points = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
        p0, p1 = segments.params[:, :1], segments.params[:, 1:]
        params = p0 + s[None, :] * (p1 - p0)
        weights = segments.lengths[:, None] * w[None, :]
        tags = np.array([boundary.tag(int(e)).value for e in segments.edges], dtype="<U1")
        return cls(segments.cells, segments.edges, points, params, weights, segments.normals, tags)


@dataclass(eq=False)
class CutQuadrature:
    """All rules of one slab.

    Attributes:
        interior: Batch over INTERIOR cells.
        cut: Batch over the cap pieces of CUT cells.
        facets: Batch over boundary segments.
        time_points: Temporal points on [0, 1].
        time_weights: Temporal weights on [0, 1].
        degree: Spatial exactness degree.
        dropped: Zero-area fan triangles skipped while building the cut batch.
    """

    interior: QuadratureBatch
    cut: QuadratureBatch
    facets: FacetBatch
    time_points: np.ndarray
    time_weights: np.ndarray
    degree: int
    dropped: int = 0
    cell_measures: dict[int, float] = field(default_factory=dict)

    @property
    def volume_batches(self) -> tuple[QuadratureBatch, ...]:
        return tuple(batch for batch in (self.interior, self.cut) if len(batch))

    @property
    def spatial_measure(self) -> float:
        """Sum of all spatial weights, the reference domain area."""
        return float(sum(batch.weights.sum() for batch in self.volume_batches))

    def spacetime_measure(self, tau: float) -> float:
        return self.spatial_measure * float(self.time_weights.sum()) * tau


def cell_rules(geometry: CutGeometry, cells: np.ndarray, degree: int) -> tuple[QuadratureBatch, QuadratureBatch, int]:
    """Volume batches for the INTERIOR and the CUT cells among ``cells``."""
    mesh = geometry.mesh
    states = geometry.states[cells]
    interior = cells[states == CellState.INTERIOR]
    cut = cells[states == CellState.CUT]

    if len(interior):
        ref_points, ref_weights = triangle_rule(degree) if mesh.simplexified else square_rule(degree)
        xi = np.broadcast_to(ref_points, (len(interior), len(ref_weights), 2))
        _, jac = mesh.affine_maps(interior)
        det = np.abs(np.linalg.det(jac))
        interior_batch = QuadratureBatch(interior, mesh.to_physical(interior, xi), det[:, None] * ref_weights[None, :])
    else:
        interior_batch = QuadratureBatch.empty()

    cut_batch, dropped = piece_batch(cut, [geometry.pieces[int(c)] for c in cut], degree, mesh.cell_diameters)
    return interior_batch, cut_batch, dropped


def build_quadrature(
    geometry: CutGeometry,
    p: int,
    q: int,
    cells: Optional[np.ndarray] = None,
    degree: Optional[int] = None,
    time_points: Optional[int] = None,
    facet_points: Optional[int] = None,
) -> CutQuadrature:
    """Build the volume, facet and temporal rules of one slab.

    Args:
        geometry: Classification and cap pieces of the slab's reference domain.
        p: Spatial order of the discrete space.
        q: Temporal order of the discrete space.
        cells: Cells to integrate over; the active cells by default.
        degree: Spatial exactness degree, 2p + 2 by default.
        time_points: Gauss points on the slab interval, q + 2 by default.
        facet_points: Gauss points per boundary segment, p + 2 by default.

    Returns:
        The slab quadrature.
    """
    degree = 2 * p + 2 if degree is None else degree
    cells = geometry.active_cells if cells is None else np.asarray(cells, dtype=int)
    interior, cut, dropped = cell_rules(geometry, cells, degree)
    facets = FacetBatch.from_segments(geometry.segments, geometry.boundary, facet_points or p + 2)
    t_points, t_weights = gauss_legendre(time_points or q + 2)
    measures = {int(c): float(m) for c, m in zip(cut.cells, cut.measures)}
    if dropped:
        logger.debug(f"Dropped {dropped} zero-area pieces while building cut-cell rules")
    return CutQuadrature(interior, cut, facets, t_points, t_weights, degree, dropped, measures)


def piece_batch(
    mesh_cells: Sequence[int], pieces: Sequence[Sequence[ConvexPolygon]], degree: int, diameters: np.ndarray
) -> tuple[QuadratureBatch, int]:
    """Batch over arbitrary lists of convex pieces, one entry per list."""
    point_lists, weight_lists, dropped = [], [], 0
    for cell, polys in zip(mesh_cells, pieces):
        sliver = SLIVER_FACTOR * diameters[cell] ** 2
        pts, wts = [], []
        for piece in polys:
            p, w, d = polygon_rule(piece, degree, sliver)
            dropped += d
            pts.append(p)
            wts.append(w)
        point_lists.append(np.concatenate(pts) if pts else np.zeros((0, 2)))
        weight_lists.append(np.concatenate(wts) if wts else np.zeros(0))
    return QuadratureBatch.from_point_lists(list(mesh_cells), point_lists, weight_lists), dropped
