"""Cartesian background meshes on the artificial domain, optionally graded and simplexified."""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from ..exceptions import ConfigurationError, NonBijectiveMapError
from ..models import ConvexPolygon

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grading:
    """Per-direction clustering parameters (x0 in the unit interval, exponent alpha)."""

    x0: float = 0.5
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.x0 < 1.0:
            raise ConfigurationError(f"grading x0 must lie in (0, 1), got {self.x0}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError(f"grading alpha must lie in (0, 1], got {self.alpha}")


def grading_map(xhat: np.ndarray, x0: float, alpha: float) -> np.ndarray:
    """Clustering map of the unit interval onto itself.

    Points are pulled towards ``x0`` for ``alpha < 1``; the endpoints and ``x0``
    are fixed.
    """
    if alpha <= 0.0:
        raise ConfigurationError(f"grading alpha must be positive, got {alpha}")
    xhat = np.asarray(xhat, dtype=float)
    lower = x0 * np.power(np.clip(xhat / x0, 0.0, None), alpha)
    upper = 1.0 - (1.0 - x0) * np.power(np.clip((1.0 - xhat) / (1.0 - x0), 0.0, None), alpha)
    return np.where(xhat < x0, lower, upper)


def _axis(origin: float, length: float, count: int, grading: Optional[Grading]) -> np.ndarray:
    xhat = np.linspace(0.0, 1.0, count + 1)
    if grading is not None:
        xhat = grading_map(xhat, grading.x0, grading.alpha)
    coords = origin + length * xhat
    coords[0] = origin
    coords[-1] = origin + length
    if np.any(np.diff(coords) <= 0.0):
        raise ConfigurationError("graded vertex coordinates are not strictly increasing")
    return coords


class CartesianMesh:
    """Structured partition of a box into quads or pairs of triangles.

    Quad ``q = j * nx + i`` has vertices (v00, v10, v11, v01). When simplexified
    it becomes triangles ``2q`` = (v00, v10, v11) and ``2q + 1`` = (v00, v11, v01),
    all counterclockwise. Vertex ``(i, j)`` has id ``j * (nx + 1) + i``.
    """

    def __init__(
        self,
        origin: Sequence[float],
        lengths: Sequence[float],
        counts: Sequence[int],
        grading: Optional[Sequence[Optional[Grading]]] = None,
        simplexified: bool = False,
        vertices: Optional[np.ndarray] = None,
    ) -> None:
        self.origin = np.asarray(origin, dtype=float).reshape(2)
        self.lengths = np.asarray(lengths, dtype=float).reshape(2)
        self.counts = tuple(int(n) for n in counts)
        if len(self.counts) != 2 or min(self.counts) < 1:
            raise ConfigurationError(f"cell counts must be >= 1 in both directions, got {counts}")
        if np.any(self.lengths <= 0.0):
            raise ConfigurationError(f"mesh lengths must be positive, got {lengths}")
        self.grading = tuple(grading) if grading is not None else (None, None)
        self.simplexified = bool(simplexified)
        self.axes = tuple(
            _axis(self.origin[d], self.lengths[d], self.counts[d], self.grading[d]) for d in range(2)
        )
        nx, ny = self.counts
        jj, ii = np.meshgrid(np.arange(ny + 1), np.arange(nx + 1), indexing="ij")
        self.vertex_lattice = np.column_stack([ii.ravel(), jj.ravel()])
        lattice_coords = np.column_stack([self.axes[0][ii.ravel()], self.axes[1][jj.ravel()]])
        if vertices is None:
            self.vertices = lattice_coords
            self.is_deformed = False
        else:
            self.vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
            if self.vertices.shape != lattice_coords.shape:
                raise ConfigurationError("deformed vertex array does not match the lattice")
            self.is_deformed = True
        self.lattice_vertices = lattice_coords

    @property
    def shape(self) -> str:
        """Cell shape name, "triangle" or "quad"."""
        return "triangle" if self.simplexified else "quad"

    @property
    def n_vertices(self) -> int:
        """Number of mesh vertices."""
        return len(self.vertices)

    @property
    def n_quads(self) -> int:
        """Number of Cartesian quads."""
        return self.counts[0] * self.counts[1]

    @property
    def n_cells(self) -> int:
        """Number of cells (quads or triangles)."""
        return 2 * self.n_quads if self.simplexified else self.n_quads

    @property
    def h(self) -> float:
        """Largest Cartesian spacing over both directions."""
        return float(max(np.diff(self.axes[0]).max(), np.diff(self.axes[1]).max()))

    def vertex_id(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Vertex id of lattice position (i, j)."""
        return np.asarray(j) * (self.counts[0] + 1) + np.asarray(i)

    @cached_property
    def cell_vertex_ids(self) -> np.ndarray:
        """Vertex ids per cell, shape (n_cells, 3 or 4), counterclockwise."""
        nx, ny = self.counts
        jj, ii = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
        i, j = ii.ravel(), jj.ravel()
        v00 = self.vertex_id(i, j)
        v10 = self.vertex_id(i + 1, j)
        v11 = self.vertex_id(i + 1, j + 1)
        v01 = self.vertex_id(i, j + 1)
        if not self.simplexified:
            return np.column_stack([v00, v10, v11, v01])
        cells = np.empty((2 * len(v00), 3), dtype=int)
        cells[0::2] = np.column_stack([v00, v10, v11])
        cells[1::2] = np.column_stack([v00, v11, v01])
        return cells

    def quad_of(self, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Quad lattice position (i, j) and triangle kind (0, 1, or 0 for quads) of cells."""
        cells = np.asarray(cells, dtype=int)
        quad = cells // 2 if self.simplexified else cells
        kind = cells % 2 if self.simplexified else np.zeros_like(cells)
        return quad % self.counts[0], quad // self.counts[0], kind

    def cell_coords(self, cells: Optional[np.ndarray] = None) -> np.ndarray:
        """Vertex coordinates per cell, shape (k, 3 or 4, 2)."""
        ids = self.cell_vertex_ids if cells is None else self.cell_vertex_ids[np.asarray(cells, dtype=int)]
        return self.vertices[ids]

    def cell_polygon(self, cell: int) -> ConvexPolygon:
        """Cell as a convex polygon."""
        return ConvexPolygon(self.vertices[self.cell_vertex_ids[cell]])

    @cached_property
    def cell_polygons(self) -> list[ConvexPolygon]:
        """All cells as polygons, indexed by cell id."""
        return [ConvexPolygon(coords) for coords in self.cell_coords()]

    @cached_property
    def cell_areas(self) -> np.ndarray:
        """Shoelace area of every cell."""
        v = self.cell_coords()
        nxt = np.roll(v, -1, axis=1)
        return 0.5 * (v[..., 0] * nxt[..., 1] - nxt[..., 0] * v[..., 1]).sum(axis=1)

    @cached_property
    def cell_diameters(self) -> np.ndarray:
        """Largest vertex distance of every cell, used as h_T."""
        v = self.cell_coords()
        diff = v[:, :, None, :] - v[:, None, :, :]
        return np.sqrt((diff**2).sum(axis=-1)).max(axis=(1, 2))

    @cached_property
    def cell_bboxes(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell bounding boxes (lower, upper)."""
        v = self.cell_coords()
        return v.min(axis=1), v.max(axis=1)

    @cached_property
    def cell_centroids(self) -> np.ndarray:
        """Vertex mean of every cell (the area centroid for these shapes)."""
        return self.cell_coords().mean(axis=1)

    def affine_maps(self, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reference-to-physical affine maps x = origin + jac @ xi.

        The reference cell is the unit square for quads and the unit triangle
        for triangles.

        Returns:
            (origins of shape (k, 2), jacobians of shape (k, 2, 2)).
        """
        coords = self.cell_coords(cells)
        origin = coords[:, 0]
        if self.simplexified:
            jac = np.stack([coords[:, 1] - origin, coords[:, 2] - origin], axis=-1)
        else:
            jac = np.stack([coords[:, 1] - origin, coords[:, 3] - origin], axis=-1)
        return origin, jac

    def to_physical(self, cells: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Map reference points (k, nq, 2) of cells (k,) to physical coordinates."""
        origin, jac = self.affine_maps(cells)
        return origin[:, None, :] + np.einsum("kij,kqj->kqi", jac, xi)

    def to_reference(self, cells: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Map physical points (k, nq, 2) of cells (k,) to reference coordinates."""
        origin, jac = self.affine_maps(cells)
        return np.einsum("kij,kqj->kqi", np.linalg.inv(jac), points - origin[:, None, :])

    @cached_property
    def adjacency(self) -> list[np.ndarray]:
        """Face neighbours of every cell, sorted by id."""
        nx, ny = self.counts
        neighbours: list[list[int]] = [[] for _ in range(self.n_cells)]
        for q in range(self.n_quads):
            i, j = q % nx, q // nx
            left = q - 1 if i > 0 else None
            right = q + 1 if i < nx - 1 else None
            below = q - nx if j > 0 else None
            above = q + nx if j < ny - 1 else None
            if not self.simplexified:
                neighbours[q] = [c for c in (below, left, right, above) if c is not None]
                continue
            lower, upper = 2 * q, 2 * q + 1
            neighbours[lower].append(upper)
            neighbours[upper].append(lower)
            if below is not None:
                neighbours[lower].append(2 * below + 1)
            if right is not None:
                neighbours[lower].append(2 * right + 1)
            if left is not None:
                neighbours[upper].append(2 * left)
            if above is not None:
                neighbours[upper].append(2 * above)
        return [np.array(sorted(n), dtype=int) for n in neighbours]

    @cached_property
    def artificial_boundary_vertices(self) -> np.ndarray:
        """Mask of vertices on the boundary of the artificial domain."""
        i, j = self.vertex_lattice[:, 0], self.vertex_lattice[:, 1]
        nx, ny = self.counts
        return (i == 0) | (j == 0) | (i == nx) | (j == ny)

    @property
    def domain_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Artificial domain as (lower, upper)."""
        return self.origin.copy(), self.origin + self.lengths

    def deformed(self, displacement: np.ndarray) -> "CartesianMesh":
        """Copy with every vertex moved by the given displacement.

        Only simplicial meshes keep affine cells under vertex motion.

        Raises:
            ConfigurationError: For quad meshes.
            NonBijectiveMapError: If a triangle is inverted.
        """
        if not self.simplexified:
            raise ConfigurationError("only simplexified meshes can be deformed")
        mesh = CartesianMesh(
            self.origin,
            self.lengths,
            self.counts,
            self.grading,
            simplexified=True,
            vertices=self.vertices + np.asarray(displacement, dtype=float).reshape(-1, 2),
        )
        if np.any(mesh.cell_areas <= 0.0):
            bad = int(np.argmin(mesh.cell_areas))
            raise NonBijectiveMapError(f"deformed cell {bad} is inverted")
        return mesh

    def reset(self) -> "CartesianMesh":
        """Undeformed copy on the lattice coordinates."""
        return CartesianMesh(self.origin, self.lengths, self.counts, self.grading, self.simplexified)


def build_mesh(
    origin: Sequence[float],
    lengths: Sequence[float],
    counts: Sequence[int],
    grading: Optional[Sequence[Optional[Grading]]] = None,
    simplexify_cells: bool = False,
) -> CartesianMesh:
    """Build the background mesh of the artificial domain.

    Args:
        origin: Lower-left corner.
        lengths: Box side lengths.
        counts: Cells per direction.
        grading: Optional per-direction clustering.
        simplexify_cells: Split every quad into two triangles.

    Returns:
        The mesh.
    """
    mesh = CartesianMesh(origin, lengths, counts, grading, simplexify_cells)
    logger.debug(f"Built {mesh.shape} mesh with {mesh.n_cells} cells, h={mesh.h:.4g}")
    return mesh


def simplexify(mesh: CartesianMesh) -> CartesianMesh:
    """Split every quad into the two triangles (v00, v10, v11) and (v00, v11, v01)."""
    if mesh.simplexified:
        return mesh
    return CartesianMesh(mesh.origin, mesh.lengths, mesh.counts, mesh.grading, simplexified=True)
