"""Active and extended cell sets of a slab."""

import logging
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from ..exceptions import ArtificialDomainError, ConfigurationError
from ..geometry.boundary import OrientedBoundary
from ..geometry.classify import CutGeometry
from ..geometry.polygon import clip_segment
from ..geometry.restriction import SpatialIndex
from ..models import CellState, ConvexPolygon
from .cartesian import CartesianMesh

logger = logging.getLogger(__name__)

BOX_SHRINK = 1e-9


class VertexDisplacement(Protocol):
    """Anything that can report mesh-vertex displacements at a time."""

    def vertex_displacement(self, t: float) -> np.ndarray:
        ...


@dataclass(eq=False)
class ActiveMesh:
    """Cells of the background mesh that carry unknowns on a slab.

    Attributes:
        mesh: Background mesh of the slab.
        geometry: Classification and cut pieces against the slab's initial boundary.
        active_cells: Sorted ids of the cells that are not EXTERIOR.
        extended_cells: Sorted superset of ``active_cells`` including the cells
            whose deformed image reaches the next slab's domain.
        slab: 1-based slab index, if known.
    """

    mesh: CartesianMesh
    geometry: CutGeometry
    active_cells: np.ndarray
    extended_cells: np.ndarray
    slab: Optional[int] = None

    @property
    def states(self) -> np.ndarray:
        """Per-cell CellState codes of the whole background mesh."""
        return self.geometry.states

    @property
    def interior_cells(self) -> np.ndarray:
        return self.geometry.interior_cells

    @property
    def cut_cells(self) -> np.ndarray:
        return self.geometry.cut_cells

    @property
    def exterior_cells(self) -> np.ndarray:
        return self.geometry.exterior_cells

    @property
    def extension_cells(self) -> np.ndarray:
        """Extended cells that are not active."""
        return np.setdiff1d(self.extended_cells, self.active_cells)

    def is_extension(self, cell: int) -> bool:
        """True for cells added only by the extension."""
        return bool(self.states[cell] == CellState.EXTERIOR and np.isin(cell, self.extended_cells))

    def extruded_measures(self, tau: float) -> np.ndarray:
        """Measure area(K) * tau of every extruded extended cell."""
        return self.mesh.cell_areas[self.extended_cells] * tau


def active_mesh(mesh: CartesianMesh, geometry: CutGeometry, slab: Optional[int] = None) -> ActiveMesh:
    """Drop EXTERIOR cells.

    Raises:
        ConfigurationError: If no cell is active.
    """
    active = geometry.active_cells
    if len(active) == 0:
        raise ConfigurationError("the domain does not meet the background mesh: no active cells")
    logger.debug(f"Active mesh: {len(active)} of {mesh.n_cells} cells")
    return ActiveMesh(mesh, geometry, active, active.copy(), slab)


def extend_active(
    active: ActiveMesh,
    deformation: VertexDisplacement | np.ndarray,
    next_boundary: OrientedBoundary,
    t_end: Optional[float] = None,
) -> ActiveMesh:
    """Add the cells whose deformed image meets the next slab's domain.

    The deformed image of a cell is approximated by the bounding box of its
    deformed vertices, shrunk by a relative ``BOX_SHRINK`` so that contact of
    zero area does not count.

    Args:
        active: Active mesh of the current slab.
        deformation: Vertex displacements at the slab end, shape (n_vertices, 2),
            or an object providing ``vertex_displacement(t_end)``.
        next_boundary: Boundary at the start of the next slab.
        t_end: Slab end time, required when ``deformation`` is not an array.

    Returns:
        A copy of ``active`` with the enlarged extended set.

    Raises:
        ArtificialDomainError: If the next domain leaves the artificial domain.
    """
    mesh = active.mesh
    if isinstance(deformation, np.ndarray):
        displacement = deformation
    else:
        displacement = deformation.vertex_displacement(t_end)
    box_lo, box_hi = mesh.domain_box
    tol = 1e-10 * float(mesh.lengths.max())
    lo, hi = next_boundary.bbox
    if np.any(lo < box_lo - tol) or np.any(hi > box_hi + tol):
        raise ArtificialDomainError(
            f"next domain bounding box [{lo}, {hi}] leaves the artificial domain [{box_lo}, {box_hi}]"
        )

    candidates = np.setdiff1d(np.arange(mesh.n_cells), active.active_cells)
    if len(candidates) == 0:
        return ActiveMesh(mesh, active.geometry, active.active_cells, active.active_cells.copy(), active.slab)
    moved = (mesh.vertices + displacement)[mesh.cell_vertex_ids[candidates]]
    lower, upper = moved.min(axis=1), moved.max(axis=1)
    shrink = BOX_SHRINK * (upper - lower).max(axis=1, keepdims=True)
    lower, upper = lower + shrink, upper - shrink

    hit = next_boundary.contains(0.5 * (lower + upper))
    edge_index = SpatialIndex.for_boundary(next_boundary, mesh.h)
    starts, ends = next_boundary.starts, next_boundary.ends
    for k in np.where(~hit)[0]:
        edges = edge_index.query(lower[k], upper[k])
        if len(edges) == 0:
            continue
        (x0, y0), (x1, y1) = lower[k], upper[k]
        box = ConvexPolygon([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        hit[k] = any(clip_segment(starts[e], ends[e], box, snap=0.0) is not None for e in edges)

    added = candidates[hit]
    extended = np.union1d(active.active_cells, added)
    if len(added):
        logger.debug(f"Extended active mesh by {len(added)} cells")
    return ActiveMesh(mesh, active.geometry, active.active_cells, extended, active.slab)
