"""Bounding-box restriction queries on a uniform bucket grid."""

from collections import defaultdict
from typing import Sequence, Union

import numpy as np

from ..models import ConvexPolygon
from .boundary import OrientedBoundary

BOX_PAD = 1e-10


class SpatialIndex:
    """Bucket grid over axis-aligned boxes, built once per entity set."""

    def __init__(self, lower: np.ndarray, upper: np.ndarray, cell_size: float) -> None:
        """Index a set of boxes.

        Args:
            lower: Lower box corners, shape (m, 2).
            upper: Upper box corners, shape (m, 2).
            cell_size: Bucket edge length, normally the background cell size.
        """
        self._lower = np.asarray(lower, dtype=float).reshape(-1, 2)
        self._upper = np.asarray(upper, dtype=float).reshape(-1, 2)
        if cell_size <= 0.0:
            raise ValueError("bucket size must be positive")
        self._size = float(cell_size)
        self._origin = self._lower.min(axis=0) if len(self._lower) else np.zeros(2)
        self._buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
        first = self._bucket(self._lower)
        last = self._bucket(self._upper)
        for entity in range(len(self._lower)):
            for i in range(first[entity, 0], last[entity, 0] + 1):
                for j in range(first[entity, 1], last[entity, 1] + 1):
                    self._buckets[(i, j)].append(entity)

    def _bucket(self, points: np.ndarray) -> np.ndarray:
        return np.floor((np.asarray(points) - self._origin) / self._size).astype(int).reshape(-1, 2)

    @classmethod
    def for_boundary(cls, boundary: OrientedBoundary, cell_size: float) -> "SpatialIndex":
        """Index the edges of a boundary."""
        starts, ends = boundary.starts, boundary.ends
        return cls(np.minimum(starts, ends), np.maximum(starts, ends), cell_size)

    @classmethod
    def for_polygons(cls, polygons: Sequence[ConvexPolygon], cell_size: float) -> "SpatialIndex":
        """Index a list of polygons (empty ones never match)."""
        lower = np.full((len(polygons), 2), np.inf)
        upper = np.full((len(polygons), 2), -np.inf)
        for index, poly in enumerate(polygons):
            if not poly.is_empty:
                lower[index], upper[index] = poly.bbox
        finite = np.isfinite(lower[:, 0])
        index = cls(np.where(finite[:, None], lower, 0.0), np.where(finite[:, None], upper, 0.0), cell_size)
        index._lower[~finite] = np.inf
        index._upper[~finite] = -np.inf
        return index

    @property
    def size(self) -> int:
        """Number of indexed entities."""
        return len(self._lower)

    def query(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """Entities whose boxes overlap the closed query box.

        Returns:
            Sorted entity ids.
        """
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        pad = BOX_PAD * max(float(np.max(upper - lower)), self._size)
        first = self._bucket(lower - pad)[0]
        last = self._bucket(upper + pad)[0]
        candidates: set[int] = set()
        for i in range(first[0], last[0] + 1):
            for j in range(first[1], last[1] + 1):
                bucket = self._buckets.get((i, j))
                if bucket:
                    candidates.update(bucket)
        if not candidates:
            return np.zeros(0, dtype=int)
        ids = np.fromiter(sorted(candidates), dtype=int)
        overlap = np.all(self._lower[ids] <= upper + pad, axis=1) & np.all(self._upper[ids] >= lower - pad, axis=1)
        return ids[overlap]


def restrict(
    target: Union[SpatialIndex, OrientedBoundary, Sequence[ConvexPolygon]],
    cell: ConvexPolygon,
    cell_size: float | None = None,
) -> np.ndarray:
    """Conservative subset of entities that may intersect a cell.

    Args:
        target: A prebuilt index, a boundary (edges are indexed) or a list of
            polygons.
        cell: Query cell; its bounding box is used.
        cell_size: Bucket size when an index has to be built here. Defaults to
            the cell diameter.

    Returns:
        Sorted ids of every entity whose bounding box meets the cell's box.
    """
    if cell.is_empty:
        return np.zeros(0, dtype=int)
    if not isinstance(target, SpatialIndex):
        size = cell_size or cell.diameter
        if isinstance(target, OrientedBoundary):
            target = SpatialIndex.for_boundary(target, size)
        else:
            target = SpatialIndex.for_polygons(list(target), size)
    return target.query(*cell.bbox)
