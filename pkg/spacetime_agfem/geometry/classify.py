"""Cell classification against an oriented boundary and cut-cell caps."""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..exceptions import InvalidGeometryError, ToleranceError
from ..models import CellState, ConvexPolygon
from .boundary import OrientedBoundary
from .polygon import (
    SNAP_FACTOR,
    clip_convex_by_convex,
    clip_segment,
    convex_decompose,
    subtract_convex,
)
from .restriction import SpatialIndex

if TYPE_CHECKING:
    from ..mesh.cartesian import CartesianMesh

logger = logging.getLogger(__name__)

AREA_FRACTION_TOL = 1e-12
TOLERANCE_BAND = 100.0


class DomainDecomposition:
    """Convex pieces of every boundary loop, with holes attached to their enclosing loop.

    The domain is the union over counterclockwise loops of the loop interior minus
    the interiors of the clockwise loops directly nested in it.
    """

    def __init__(self, boundary: OrientedBoundary) -> None:
        self.boundary = boundary
        areas = boundary.loop_areas
        parents = boundary.loop_parents()
        self.pieces: list[list[ConvexPolygon]] = []
        self._boxes: list[tuple[np.ndarray, np.ndarray]] = []
        for coords in boundary.loop_vertices:
            pieces = convex_decompose(coords)
            self.pieces.append(pieces)
            lower = np.array([p.bbox[0] for p in pieces])
            upper = np.array([p.bbox[1] for p in pieces])
            self._boxes.append((lower, upper))
        for index, parent in enumerate(parents):
            if parent >= 0 and np.sign(areas[parent]) == np.sign(areas[index]):
                raise InvalidGeometryError(
                    f"loop {index} has the same orientation as the loop enclosing it"
                )
            if parent < 0 and areas[index] < 0.0:
                raise InvalidGeometryError(f"clockwise loop {index} is not enclosed by any loop")
        self.outer = [i for i in range(len(areas)) if areas[i] > 0.0]
        self.holes = {i: [k for k in range(len(areas)) if parents[k] == i and areas[k] < 0.0] for i in self.outer}

    def _candidates(self, loop: int, lower: np.ndarray, upper: np.ndarray) -> list[ConvexPolygon]:
        plo, phi = self._boxes[loop]
        mask = np.all(plo <= upper, axis=1) & np.all(phi >= lower, axis=1)
        return [self.pieces[loop][k] for k in np.where(mask)[0]]

    def cap(self, cell: ConvexPolygon) -> list[ConvexPolygon]:
        """Convex pieces tiling cell ∩ domain."""
        lower, upper = cell.bbox
        result: list[ConvexPolygon] = []
        for loop in self.outer:
            for piece in self._candidates(loop, lower, upper):
                inside = clip_convex_by_convex(cell, piece)
                if inside.is_empty:
                    continue
                parts = [inside]
                for hole in self.holes[loop]:
                    for cutter in self._candidates(hole, lower, upper):
                        parts = [rest for part in parts for rest in subtract_convex(part, cutter)]
                result.extend(parts)
        return result


def cell_cap_interior(
    cell: ConvexPolygon,
    domain: Union[DomainDecomposition, OrientedBoundary],
    state: Optional[CellState] = None,
) -> list[ConvexPolygon]:
    """Convex pieces tiling cell ∩ domain.

    Args:
        cell: Background cell.
        domain: Decomposed domain, or a boundary to decompose here.
        state: Known classification; INTERIOR cells are returned unchanged.

    Returns:
        Interior-disjoint convex pieces.

    Raises:
        InvalidGeometryError: If the pieces cover more than the cell, which
            happens for inconsistently oriented loops.
    """
    if state == CellState.INTERIOR:
        return [cell]
    if state == CellState.EXTERIOR:
        return []
    if isinstance(domain, OrientedBoundary):
        domain = DomainDecomposition(domain)
    pieces = domain.cap(cell)
    total = sum(piece.area for piece in pieces)
    if total > cell.area * (1.0 + 1e-9):
        raise InvalidGeometryError(
            f"cap area {total:.6g} exceeds cell area {cell.area:.6g}; boundary orientation is inconsistent"
        )
    return pieces


def cell_cap_exterior(
    cell: ConvexPolygon,
    domain: Union[DomainDecomposition, OrientedBoundary],
) -> list[ConvexPolygon]:
    """Convex pieces tiling the part of the cell outside the domain."""
    if isinstance(domain, OrientedBoundary):
        domain = DomainDecomposition(domain)
    parts = [cell]
    for piece in domain.cap(cell):
        parts = [rest for part in parts for rest in subtract_convex(part, piece)]
    return parts


@dataclass(eq=False)
class BoundarySegments:
    """Pieces of boundary edges, each assigned to the cell on its domain side."""

    cells: np.ndarray
    edges: np.ndarray
    params: np.ndarray
    points: np.ndarray
    normals: np.ndarray

    @classmethod
    def empty(cls) -> "BoundarySegments":
        return cls(
            np.zeros(0, int), np.zeros(0, int), np.zeros((0, 2)), np.zeros((0, 2, 2)), np.zeros((0, 2))
        )

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def lengths(self) -> np.ndarray:
        """Segment lengths."""
        return np.linalg.norm(self.points[:, 1] - self.points[:, 0], axis=1)

    def for_cell(self, cell: int) -> np.ndarray:
        """Indices of the segments owned by a cell."""
        return np.where(self.cells == cell)[0]


@dataclass(eq=False)
class CutGeometry:
    """Classification of a mesh against a boundary, with cut pieces and boundary segments."""

    mesh: "CartesianMesh"
    boundary: OrientedBoundary
    states: np.ndarray
    pieces: dict[int, list[ConvexPolygon]]
    segments: BoundarySegments
    measures: np.ndarray
    domain: Optional[DomainDecomposition] = field(default=None, repr=False)

    @property
    def interior_cells(self) -> np.ndarray:
        return np.where(self.states == CellState.INTERIOR)[0]

    @property
    def cut_cells(self) -> np.ndarray:
        return np.where(self.states == CellState.CUT)[0]

    @property
    def exterior_cells(self) -> np.ndarray:
        return np.where(self.states == CellState.EXTERIOR)[0]

    @property
    def active_cells(self) -> np.ndarray:
        """Cells that are not EXTERIOR."""
        return np.where(self.states != CellState.EXTERIOR)[0]

    @property
    def domain_area(self) -> float:
        """Area of the domain part inside the mesh."""
        return float(self.measures.sum())

    def counts(self) -> dict[str, int]:
        """Number of cells per state label."""
        return {state.label: int(np.sum(self.states == state)) for state in CellState}

    def cap(self, cell: int) -> list[ConvexPolygon]:
        """Pieces of cell ∩ domain."""
        state = CellState(int(self.states[cell]))
        if state == CellState.CUT:
            return self.pieces[cell]
        if state == CellState.INTERIOR:
            return [self.mesh.cell_polygons[cell]]
        return []

    def mapped(self, mesh: "CartesianMesh", boundary: OrientedBoundary) -> "CutGeometry":
        """Carry pieces and segments cell-affinely onto a deformed copy of the mesh.

        Args:
            mesh: Mesh with the same topology and moved vertices.
            boundary: Boundary the mapped segments approximate.

        Returns:
            Geometry on the new mesh with unchanged classification.
        """
        pieces = {}
        measures = mesh.cell_areas.copy()
        measures[self.states == CellState.EXTERIOR] = 0.0
        for cell, polys in self.pieces.items():
            moved = []
            for poly in polys:
                xi = self.mesh.to_reference(np.array([cell]), poly.vertices[None])
                moved.append(ConvexPolygon(mesh.to_physical(np.array([cell]), xi)[0]))
            pieces[cell] = moved
            measures[cell] = sum(p.area for p in moved)
        segs = self.segments
        if len(segs):
            xi = self.mesh.to_reference(segs.cells, segs.points)
            points = mesh.to_physical(segs.cells, xi)
            direction = points[:, 1] - points[:, 0]
            normals = np.column_stack([direction[:, 1], -direction[:, 0]])
            normals /= np.linalg.norm(normals, axis=1, keepdims=True)
            segments = BoundarySegments(segs.cells.copy(), segs.edges.copy(), segs.params.copy(), points, normals)
        else:
            segments = BoundarySegments.empty()
        return CutGeometry(mesh, boundary, self.states.copy(), pieces, segments, measures, None)


def _check_tolerance(mesh: "CartesianMesh", boundary: OrientedBoundary) -> None:
    distance, nearest = cKDTree(mesh.vertices).query(boundary.vertices)
    for k, (dist, vertex) in enumerate(zip(distance, nearest)):
        cell = int(np.where(mesh.cell_vertex_ids == vertex)[0][0])
        eps = SNAP_FACTOR * mesh.cell_diameters[cell]
        if eps < dist < TOLERANCE_BAND * eps:
            raise ToleranceError(
                f"boundary vertex {k} lies {dist:.3e} from mesh vertex {int(vertex)}, inside the snapping band of cell {cell}",
                cell=cell,
            )


def boundary_segments(mesh: "CartesianMesh", boundary: OrientedBoundary, cell_index: Optional[SpatialIndex] = None) -> BoundarySegments:
    """Split boundary edges by the mesh cells and assign every piece to the cell on its domain side."""
    polys = mesh.cell_polygons
    cell_index = cell_index or SpatialIndex.for_polygons(polys, mesh.h)
    starts, ends, normals = boundary.starts, boundary.ends, boundary.outward_normals
    rows: list[tuple[int, int, float, float]] = []
    for edge in range(len(boundary.edges)):
        a, b = starts[edge], ends[edge]
        length = float(np.linalg.norm(b - a))
        for cell in cell_index.query(np.minimum(a, b), np.maximum(a, b)):
            poly = polys[cell]
            span = clip_segment(a, b, poly, snap=0.0)
            if span is None:
                continue
            s0, s1 = span
            if (s1 - s0) * length <= SNAP_FACTOR * mesh.h:
                continue
            inner_point = a + 0.5 * (s0 + s1) * (b - a) - 1e-7 * poly.diameter * normals[edge]
            if np.all([hp.distance(inner_point) <= 0.0 for hp in poly.halfplanes()]):
                rows.append((int(cell), edge, s0, s1))
    if not rows:
        return BoundarySegments.empty()
    rows.sort()
    cells = np.array([r[0] for r in rows], dtype=int)
    edges = np.array([r[1] for r in rows], dtype=int)
    params = np.array([[r[2], r[3]] for r in rows])
    a, b = starts[edges], ends[edges]
    points = np.stack([a + params[:, :1] * (b - a), a + params[:, 1:] * (b - a)], axis=1)
    return BoundarySegments(cells, edges, params, points, normals[edges])


def classify_cells(mesh: "CartesianMesh", boundary: OrientedBoundary, domain: Optional[DomainDecomposition] = None) -> CutGeometry:
    """Classify every background cell as INTERIOR, CUT or EXTERIOR.

    Cells met by a boundary edge get their cap computed and are CUT when the
    cap covers a proper fraction of the cell; edge contact of zero area leaves
    them INTERIOR or EXTERIOR. Untouched cells are flood filled per connected
    component, seeded by a winding-number test at one centroid.

    Args:
        mesh: Background mesh.
        boundary: Domain boundary.
        domain: Precomputed convex decomposition of the boundary loops.

    Returns:
        The cut geometry with states, cap pieces and boundary segments.

    Raises:
        ToleranceError: A boundary vertex lies in the snapping band of a mesh vertex.
    """
    domain = domain or DomainDecomposition(boundary)
    _check_tolerance(mesh, boundary)
    polys = mesh.cell_polygons
    areas = mesh.cell_areas
    edge_index = SpatialIndex.for_boundary(boundary, mesh.h)
    starts, ends = boundary.starts, boundary.ends
    lower, upper = mesh.cell_bboxes

    states = np.full(mesh.n_cells, -1, dtype=np.int8)
    measures = np.zeros(mesh.n_cells)
    pieces: dict[int, list[ConvexPolygon]] = {}
    for cell in range(mesh.n_cells):
        candidates = edge_index.query(lower[cell], upper[cell])
        if not any(clip_segment(starts[e], ends[e], polys[cell]) is not None for e in candidates):
            continue
        cap = cell_cap_interior(polys[cell], domain)
        fraction = sum(p.area for p in cap) / areas[cell]
        if fraction <= AREA_FRACTION_TOL:
            states[cell] = CellState.EXTERIOR
        elif fraction >= 1.0 - AREA_FRACTION_TOL:
            states[cell] = CellState.INTERIOR
            measures[cell] = areas[cell]
        else:
            states[cell] = CellState.CUT
            pieces[cell] = cap
            measures[cell] = fraction * areas[cell]

    untouched = np.where(states < 0)[0]
    if len(untouched):
        local = -np.ones(mesh.n_cells, dtype=int)
        local[untouched] = np.arange(len(untouched))
        rows, cols = [], []
        for k, cell in enumerate(untouched):
            for other in mesh.adjacency[cell]:
                if local[other] >= 0:
                    rows.append(k)
                    cols.append(local[other])
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(untouched), len(untouched)))
        n_components, labels = connected_components(graph, directed=False)
        seeds = np.array([untouched[np.argmax(labels == c)] for c in range(n_components)])
        inside = boundary.contains(mesh.cell_centroids[seeds])
        component_state = np.where(inside, CellState.INTERIOR, CellState.EXTERIOR)
        states[untouched] = component_state[labels]
        measures[untouched] = np.where(inside[labels], areas[untouched], 0.0)

    segments = boundary_segments(mesh, boundary)
    result = CutGeometry(mesh, boundary, states, pieces, segments, measures, domain)
    logger.debug(f"Classified {mesh.n_cells} cells: {result.counts()}")
    return result
