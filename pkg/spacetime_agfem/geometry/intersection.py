"""Triple intersection of the current cut mesh, the deformed previous mesh and the domain.

The previous mesh enters as straight-sided simplices: simplicial cells are used
as they are, quads are split along the (v00, v11) diagonal so the deformation
stays affine on every piece.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Union

import numpy as np

from ..exceptions import CoverageError, TransferGeometryError
from ..models import ConvexPolygon, PolyCell
from .boundary import OrientedBoundary
from .classify import CutGeometry, classify_cells
from .polygon import SLIVER_FACTOR, clip_convex_by_convex
from .restriction import SpatialIndex

if TYPE_CHECKING:
    from ..mesh.cartesian import CartesianMesh

logger = logging.getLogger(__name__)

COVERAGE_TOL = 1e-9


@dataclass(eq=False)
class DeformedSimplices:
    """Straight-sided simplices of a mesh pushed forward by vertex displacements.

    Attributes:
        mesh: Mesh the simplices belong to.
        parents: Owning mesh cell per simplex.
        reference: Undeformed simplex vertices, shape (m, 3, 2).
        deformed: Deformed simplex vertices, shape (m, 3, 2).
    """

    mesh: "CartesianMesh"
    parents: np.ndarray
    reference: np.ndarray
    deformed: np.ndarray
    _polygons: Optional[list[ConvexPolygon]] = field(default=None, init=False, repr=False)

    @classmethod
    def from_mesh(
        cls,
        mesh: "CartesianMesh",
        displacement: Optional[np.ndarray] = None,
        cells: Optional[np.ndarray] = None,
    ) -> "DeformedSimplices":
        """Split cells into simplices and move their vertices.

        Args:
            mesh: Previous slab mesh.
            displacement: Vertex displacements (n_vertices, 2); zero if omitted.
            cells: Cells to include, all cells by default.
        """
        cells = np.arange(mesh.n_cells) if cells is None else np.asarray(cells, dtype=int)
        moved = mesh.vertices if displacement is None else mesh.vertices + np.asarray(displacement).reshape(-1, 2)
        ids = mesh.cell_vertex_ids[cells]
        if mesh.simplexified:
            parents, tri = cells, ids
        else:
            parents = np.repeat(cells, 2)
            tri = np.empty((2 * len(cells), 3), dtype=int)
            tri[0::2] = ids[:, [0, 1, 2]]
            tri[1::2] = ids[:, [0, 2, 3]]
        return cls(mesh, parents, mesh.vertices[tri], moved[tri])

    def __len__(self) -> int:
        return len(self.parents)

    @property
    def deformed_areas(self) -> np.ndarray:
        """Signed areas of the deformed simplices."""
        a, b, c = self.deformed[:, 0], self.deformed[:, 1], self.deformed[:, 2]
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))

    @property
    def polygons(self) -> list[ConvexPolygon]:
        """Deformed simplices as polygons; inverted or flat ones are empty."""
        if self._polygons is None:
            areas = self.deformed_areas
            self._polygons = [
                ConvexPolygon(self.deformed[s]) if areas[s] > 0.0 else ConvexPolygon.empty()
                for s in range(len(self))
            ]
        return self._polygons

    def barycentric(self, simplices: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Barycentric coordinates of points (k, nq, 2) in deformed simplices (k,)."""
        tri = self.deformed[np.asarray(simplices, dtype=int)]
        jac = np.stack([tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]], axis=-1)
        local = np.einsum("kij,kqj->kqi", np.linalg.inv(jac), points - tri[:, None, 0])
        return np.concatenate([1.0 - local.sum(axis=-1, keepdims=True), local], axis=-1)

    def pull_back(self, simplices: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Undeformed positions of deformed points, by barycentric interpolation."""
        lam = self.barycentric(simplices, points)
        return np.einsum("kqv,kvd->kqd", lam, self.reference[np.asarray(simplices, dtype=int)])

    def to_reference(self, simplices: np.ndarray, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map deformed points to reference coordinates of the parent cells.

        Returns:
            (parent cells (k,), reference coordinates (k, nq, 2)).
        """
        simplices = np.asarray(simplices, dtype=int)
        parents = self.parents[simplices]
        return parents, self.mesh.to_reference(parents, self.pull_back(simplices, points))


@dataclass(eq=False)
class IntersectionMesh:
    """Partition of the current domain into pieces with one current and one previous parent."""

    cells: list[PolyCell]
    simplices: DeformedSimplices
    current_mesh: "CartesianMesh"

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def total_measure(self) -> float:
        return float(sum(cell.measure for cell in self.cells))

    def pieces_per_cell(self) -> dict[int, int]:
        """Number of intersection cells per current parent."""
        counts: dict[int, int] = {}
        for cell in self.cells:
            counts[cell.parent_current] = counts.get(cell.parent_current, 0) + 1
        return counts

    def containment_defect(self) -> float:
        """Largest distance of a piece vertex outside its parents' reference cells.

        Measured in reference coordinates; zero when every vertex maps inside
        both parent cells.
        """
        worst = 0.0
        for cell in self.cells:
            for piece in cell.pieces:
                pts = piece.vertices[None]
                xi = self.current_mesh.to_reference(np.array([cell.parent_current]), pts)[0]
                worst = max(worst, _outside(xi, self.current_mesh.simplexified))
                _, eta = self.simplices.to_reference(np.array([cell.previous_simplex]), pts)
                worst = max(worst, _outside(eta[0], self.simplices.mesh.simplexified))
        return worst

    def check_containment(self, tol: float = 1e-8) -> None:
        """Raise if a piece leaves a parent cell by more than ``tol`` in reference units."""
        defect = self.containment_defect()
        if defect > tol:
            raise TransferGeometryError(f"intersection pieces leave their parent cells by {defect:.3e}")


def _outside(xi: np.ndarray, simplex: bool) -> float:
    """Distance of reference points outside the unit triangle or unit square."""
    lower = np.maximum(-xi, 0.0).max()
    if simplex:
        return float(max(lower, np.maximum(xi.sum(axis=-1) - 1.0, 0.0).max()))
    return float(max(lower, np.maximum(xi - 1.0, 0.0).max()))


def intersect_triple(
    current: Union[CutGeometry, "CartesianMesh"],
    previous: DeformedSimplices,
    boundary: Optional[OrientedBoundary] = None,
    cells: Optional[np.ndarray] = None,
) -> IntersectionMesh:
    """Intersect the current cut mesh with the deformed previous mesh.

    Interior cells are clipped whole against the candidate previous simplices;
    cut cells contribute their cap pieces.

    Args:
        current: Cut geometry of the current slab, or its background mesh when
            ``boundary`` is given and the classification has to be computed.
        previous: Deformed previous mesh.
        boundary: Current boundary, used only with a bare mesh.
        cells: Current cells to process; all active cells by default.

    Returns:
        The intersection mesh, ordered by current cell and previous simplex.

    Raises:
        CoverageError: If part of a current cap is covered by no previous simplex.
    """
    if not isinstance(current, CutGeometry):
        if boundary is None:
            raise ValueError("a boundary is required to classify a bare mesh")
        current = classify_cells(current, boundary)
    mesh = current.mesh
    cells = current.active_cells if cells is None else np.asarray(cells, dtype=int)
    polys = previous.polygons
    index = SpatialIndex.for_polygons(polys, mesh.h)

    result: list[PolyCell] = []
    for cell in cells:
        caps = current.cap(int(cell))
        if not caps:
            continue
        cap_area = sum(p.area for p in caps)
        sliver = SLIVER_FACTOR * mesh.cell_diameters[cell] ** 2
        grouped: dict[int, list[ConvexPolygon]] = {}
        for piece in caps:
            for simplex in index.query(*piece.bbox):
                clipped = clip_convex_by_convex(piece, polys[simplex])
                if clipped.is_empty or clipped.area <= sliver:
                    continue
                grouped.setdefault(int(simplex), []).append(clipped)
        covered = 0.0
        for simplex in sorted(grouped):
            poly_cell = PolyCell(
                grouped[simplex],
                parent_current=int(cell),
                parent_previous=int(previous.parents[simplex]),
                previous_simplex=simplex,
            )
            covered += poly_cell.measure
            result.append(poly_cell)
        if cap_area - covered > COVERAGE_TOL * max(cap_area, mesh.cell_areas[cell]):
            raise CoverageError(
                f"cell {int(cell)}: {cap_area - covered:.3e} of its domain part is not covered by the deformed previous mesh",
                cell=int(cell),
            )
    intersection = IntersectionMesh(result, previous, mesh)
    logger.debug(
        f"Intersection mesh: {len(result)} cells over {len(cells)} current cells, measure {intersection.total_measure:.12g}"
    )
    return intersection

