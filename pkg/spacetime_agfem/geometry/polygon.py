"""Planar polygon kernel: orientation, convex clipping, decomposition, containment.

Predicates are tolerance based. A vertex whose distance to a clip line is
below ``SNAP_FACTOR`` times the polygon diameter is treated as lying on it.
"""

import logging
from typing import Optional

import numpy as np
from shapely.geometry import LinearRing

from ..exceptions import DegenerateInputError, InvalidGeometryError
from ..models import ConvexPolygon, HalfPlane, shoelace

logger = logging.getLogger(__name__)

SNAP_FACTOR = 1e-10
SLIVER_FACTOR = 1e-14


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace area of a vertex loop, positive iff counterclockwise.

    Args:
        vertices: Array of shape (k, 2), k >= 3.

    Returns:
        Signed area.

    Raises:
        DegenerateInputError: If fewer than 3 vertices are given.
    """
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(v) < 3:
        raise DegenerateInputError(f"signed area needs at least 3 vertices, got {len(v)}")
    return shoelace(v)


def diameter(vertices: np.ndarray) -> float:
    """Largest pairwise vertex distance."""
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(v) < 2:
        return 0.0
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())


def snap_tolerance(vertices: np.ndarray) -> float:
    """Snapping distance for a vertex set."""
    return SNAP_FACTOR * diameter(vertices)


def _cross(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    return u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]


def is_convex(vertices: np.ndarray, tol: Optional[float] = None) -> bool:
    """Check that a counterclockwise loop turns left (or goes straight) everywhere."""
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(v) < 3:
        return False
    scale = diameter(v) ** 2
    tol = SNAP_FACTOR * scale if tol is None else tol
    edges = np.roll(v, -1, axis=0) - v
    turns = _cross(edges, np.roll(edges, -1, axis=0))
    return bool(np.all(turns >= -tol)) and shoelace(v) > 0.0


def _dedupe(points: np.ndarray, eps: float) -> np.ndarray:
    if len(points) == 0:
        return points
    keep = [points[0]]
    for point in points[1:]:
        if np.max(np.abs(point - keep[-1])) > eps:
            keep.append(point)
    if len(keep) > 1 and np.max(np.abs(keep[0] - keep[-1])) <= eps:
        keep.pop()
    return np.array(keep)


def clip_convex_by_halfplane(
    poly: ConvexPolygon,
    halfplane: HalfPlane,
    snap: Optional[float] = None,
) -> ConvexPolygon:
    """Intersect a convex polygon with a closed half-plane.

    Vertices within the snapping distance of the clip line count as on it, and
    new vertices are projected onto the line.

    Args:
        poly: Convex polygon.
        halfplane: Clip half-plane.
        snap: Snapping distance. Defaults to ``SNAP_FACTOR`` times the
            polygon diameter.

    Returns:
        The clipped polygon, the input itself when nothing is cut away, or
        the empty polygon.
    """
    if poly.is_empty:
        return ConvexPolygon.empty()
    v = poly.vertices
    size = poly.diameter
    eps = SNAP_FACTOR * size if snap is None else snap
    dist = halfplane.distance(v)
    dist[np.abs(dist) <= eps] = 0.0
    if np.all(dist <= 0.0):
        return poly
    if np.all(dist >= 0.0):
        return ConvexPolygon.empty()

    out = []
    count = len(v)
    for i in range(count):
        j = (i + 1) % count
        if dist[i] <= 0.0:
            out.append(v[i])
        if dist[i] * dist[j] < 0.0:
            s = dist[i] / (dist[i] - dist[j])
            point = v[i] + s * (v[j] - v[i])
            point = point - halfplane.distance(point) * halfplane.normal
            out.append(point)
    result = _dedupe(np.array(out), eps)
    if len(result) < 3 or shoelace(result) <= SLIVER_FACTOR * size * size:
        return ConvexPolygon.empty()
    return ConvexPolygon(result)


def clip_convex_by_convex(poly: ConvexPolygon, clipper: ConvexPolygon) -> ConvexPolygon:
    """Intersection of two convex polygons."""
    if clipper.is_empty:
        return ConvexPolygon.empty()
    result = poly
    for halfplane in clipper.halfplanes():
        result = clip_convex_by_halfplane(result, halfplane)
        if result.is_empty:
            break
    return result


def subtract_convex(poly: ConvexPolygon, cutter: ConvexPolygon) -> list[ConvexPolygon]:
    """Split ``poly`` minus ``cutter`` into interior-disjoint convex pieces."""
    if poly.is_empty:
        return []
    if cutter.is_empty:
        return [poly]
    lo, hi = poly.bbox
    clo, chi = cutter.bbox
    if np.any(hi < clo) or np.any(chi < lo):
        return [poly]
    pieces = []
    remaining = poly
    for halfplane in cutter.halfplanes():
        outside = clip_convex_by_halfplane(remaining, halfplane.complement())
        if not outside.is_empty:
            pieces.append(outside)
        remaining = clip_convex_by_halfplane(remaining, halfplane)
        if remaining.is_empty:
            break
    return pieces


def validate_simple(vertices: np.ndarray) -> None:
    """Raise InvalidGeometryError unless the loop is simple."""
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(v) < 3:
        raise DegenerateInputError(f"polygon needs at least 3 vertices, got {len(v)}")
    if not LinearRing(v).is_simple:
        raise InvalidGeometryError("polygon loop is self-intersecting")


def _drop_collinear(v: np.ndarray, tol: float) -> np.ndarray:
    changed = True
    while changed and len(v) > 3:
        changed = False
        prev = np.roll(v, 1, axis=0)
        nxt = np.roll(v, -1, axis=0)
        turns = _cross(v - prev, nxt - v)
        straight = np.where(np.abs(turns) <= tol)[0]
        if len(straight):
            v = np.delete(v, straight[0], axis=0)
            changed = True
    return v


def _in_triangle(points: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray, tol: float) -> np.ndarray:
    d1 = _cross(b - a, points - a)
    d2 = _cross(c - b, points - b)
    d3 = _cross(a - c, points - c)
    return (d1 >= -tol) & (d2 >= -tol) & (d3 >= -tol)


def _ear_clip(v: np.ndarray, tol: float) -> list[list[int]]:
    remaining = list(range(len(v)))
    triangles: list[list[int]] = []
    while len(remaining) > 3:
        count = len(remaining)
        for k in range(count):
            ia, ib, ic = remaining[k - 1], remaining[k], remaining[(k + 1) % count]
            a, b, c = v[ia], v[ib], v[ic]
            turn = _cross(b - a, c - b)
            if abs(turn) <= tol and np.dot(b - a, c - b) > 0.0:
                del remaining[k]
                break
            if turn <= tol:
                continue
            others = [i for i in remaining if i not in (ia, ib, ic)]
            if others and np.any(_in_triangle(v[others], a, b, c, tol)):
                continue
            triangles.append([ia, ib, ic])
            del remaining[k]
            break
        else:
            raise InvalidGeometryError("ear clipping found no ear; polygon is not simple")
    if abs(shoelace(v[remaining])) > tol:
        triangles.append(remaining)
    return triangles


def _merge_convex(v: np.ndarray, loops: list[list[int]], tol: float) -> list[list[int]]:
    merged = True
    while merged:
        merged = False
        for i in range(len(loops)):
            edges_i = {(loops[i][k], loops[i][(k + 1) % len(loops[i])]): k for k in range(len(loops[i]))}
            for j in range(i + 1, len(loops)):
                loop_j = loops[j]
                for k in range(len(loop_j)):
                    a, b = loop_j[k], loop_j[(k + 1) % len(loop_j)]
                    if (b, a) not in edges_i:
                        continue
                    # rotate loop i to run b .. a and loop j to run a .. b
                    start_i = (edges_i[(b, a)] + 1) % len(loops[i])
                    run_i = loops[i][start_i:] + loops[i][:start_i]
                    start_j = (k + 1) % len(loop_j)
                    run_j = loop_j[start_j:] + loop_j[:start_j]
                    candidate = run_i + run_j[1:-1]
                    if is_convex(v[candidate], tol):
                        loops[i] = candidate
                        del loops[j]
                        merged = True
                    break
                if merged:
                    break
            if merged:
                break
    return loops


def convex_decompose(vertices: np.ndarray) -> list[ConvexPolygon]:
    """Tile a simple polygon by convex pieces.

    Convex input (in counterclockwise order) comes back as a single piece with
    its vertices untouched. Otherwise collinear vertices are dropped, the loop is
    ear clipped and adjacent triangles are merged while the union stays convex.

    Args:
        vertices: Simple polygon loop, either orientation.

    Returns:
        Counterclockwise convex pieces whose areas sum to the polygon area.

    Raises:
        DegenerateInputError: Fewer than 3 vertices or zero area.
        InvalidGeometryError: Self-intersecting loop.
    """
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    validate_simple(v)
    area = shoelace(v)
    if area == 0.0:
        raise DegenerateInputError("polygon has zero area")
    if area < 0.0:
        v = v[::-1].copy()
    tol = SNAP_FACTOR * diameter(v) ** 2
    if is_convex(v, tol):
        return [ConvexPolygon(v)]
    v = _drop_collinear(v, tol)
    loops = _merge_convex(v, _ear_clip(v, tol), tol)
    pieces = [ConvexPolygon(v[loop]) for loop in loops]
    logger.debug(f"Decomposed {len(v)}-gon into {len(pieces)} convex pieces")
    return pieces


def fan_triangles(poly: ConvexPolygon) -> np.ndarray:
    """Fan triangulation of a convex polygon from its first vertex, shape (k-2, 3, 2)."""
    v = poly.vertices
    if len(v) < 3:
        return np.zeros((0, 3, 2))
    idx = np.arange(1, len(v) - 1)
    return np.stack([np.broadcast_to(v[0], (len(idx), 2)), v[idx], v[idx + 1]], axis=1)


def clip_segment(
    start: np.ndarray,
    end: np.ndarray,
    poly: ConvexPolygon,
    snap: Optional[float] = None,
) -> Optional[tuple[float, float]]:
    """Parameter range of the segment start + s (end - start) inside a closed convex polygon.

    Returns:
        (s0, s1) with 0 <= s0 <= s1 <= 1, or None when the segment misses the
        polygon. A touching segment returns s0 == s1.
    """
    if poly.is_empty:
        return None
    start = np.asarray(start, dtype=float)
    direction = np.asarray(end, dtype=float) - start
    eps = SNAP_FACTOR * poly.diameter if snap is None else snap
    length = float(np.hypot(direction[0], direction[1]))
    s0, s1 = 0.0, 1.0
    for halfplane in poly.halfplanes():
        room = halfplane.offset - halfplane.normal @ start
        rate = halfplane.normal @ direction
        if abs(rate) <= 1e-14 * length:
            if room < -eps:
                return None
            continue
        s = (room + eps) / rate
        if rate > 0.0:
            s1 = min(s1, s)
        else:
            s0 = max(s0, s)
        if s0 > s1:
            return None
    return s0, s1


def winding_numbers(points: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Winding number of every point with respect to a set of directed edges.

    Args:
        points: Array of shape (..., 2).
        starts: Edge start points, shape (m, 2).
        ends: Edge end points, shape (m, 2).

    Returns:
        Integer array of shape points.shape[:-1].
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, 2)
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    result = np.zeros(len(flat), dtype=int)
    chunk = max(1, 2_000_000 // max(len(starts), 1))
    for first in range(0, len(flat), chunk):
        p = flat[first : first + chunk, None, :]
        a = starts[None, :, :]
        b = ends[None, :, :]
        side = (b[..., 0] - a[..., 0]) * (p[..., 1] - a[..., 1]) - (p[..., 0] - a[..., 0]) * (b[..., 1] - a[..., 1])
        upward = (a[..., 1] <= p[..., 1]) & (b[..., 1] > p[..., 1]) & (side > 0.0)
        downward = (a[..., 1] > p[..., 1]) & (b[..., 1] <= p[..., 1]) & (side < 0.0)
        result[first : first + chunk] = upward.sum(axis=1) - downward.sum(axis=1)
    return result.reshape(pts.shape[:-1])


def polygon_contains(vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Point-in-polygon test for a single loop of either orientation."""
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    return winding_numbers(points, v, np.roll(v, -1, axis=0)) != 0
