"""VTK output: unstructured grids through meshio, polygon soups as legacy polydata."""

import logging
from pathlib import Path
from typing import Optional, Sequence

import meshio
import numpy as np

from ..models import ConvexPolygon

logger = logging.getLogger(__name__)

_CELL_TYPES = {"quad": "quad", "triangle": "triangle"}


def mesh_to_meshio(
    mesh,
    cells: Optional[np.ndarray] = None,
    point_data: Optional[dict[str, np.ndarray]] = None,
    cell_data: Optional[dict[str, np.ndarray]] = None,
    displacement: Optional[np.ndarray] = None,
) -> meshio.Mesh:
    """Convert (a subset of) a Cartesian mesh to a meshio mesh.

    Args:
        mesh: Background mesh.
        cells: Cells to include; all by default.
        point_data: Per-vertex arrays of the whole mesh.
        cell_data: Per-cell arrays of the whole mesh; restricted to ``cells``.
        displacement: Vertex displacement applied to the written coordinates.
    """
    cells = np.arange(mesh.n_cells) if cells is None else np.asarray(cells, dtype=int)
    points = mesh.vertices if displacement is None else mesh.vertices + np.asarray(displacement).reshape(-1, 2)
    points = np.column_stack([points, np.zeros(len(points))])
    data = {name: [np.asarray(values)[cells]] for name, values in (cell_data or {}).items()}
    return meshio.Mesh(
        points,
        [(_CELL_TYPES[mesh.shape], mesh.cell_vertex_ids[cells])],
        point_data={name: np.asarray(values) for name, values in (point_data or {}).items()},
        cell_data=data,
    )


def write_mesh_vtk(path: str | Path, mesh, **kwargs) -> Path:
    """Write a mesh as a legacy ASCII VTK unstructured grid."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meshio.write(path, mesh_to_meshio(mesh, **kwargs), file_format="vtk", binary=False)
    logger.debug(f"Wrote {path}")
    return path


def write_slab_vtk(path: str | Path, slab) -> Path:
    """End-of-slab solution and cell states on the extended cells, drawn in the deformed configuration."""
    mesh = slab.mesh
    values = np.nan_to_num(slab.vertex_values(1.0))
    return write_mesh_vtk(
        path,
        mesh,
        cells=slab.active.extended_cells,
        point_data={"u": values},
        cell_data={"state": slab.active.states.astype(np.int32)},
        displacement=slab.field.vertex_displacement(slab.t1),
    )


def write_polydata(
    path: str | Path,
    polygons: Sequence[ConvexPolygon],
    cell_data: Optional[dict[str, Sequence[float]]] = None,
    title: str = "spacetime-agfem polygons",
) -> Path:
    """Write polygons as legacy ASCII VTK polydata.

    Empty polygons are skipped together with their data entries.
    """
    keep = [k for k, poly in enumerate(polygons) if not poly.is_empty]
    points, faces = [], []
    offset = 0
    for k in keep:
        verts = polygons[k].vertices
        points.extend(verts.tolist())
        faces.append([len(verts), *range(offset, offset + len(verts))])
        offset += len(verts)

    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET POLYDATA", f"POINTS {len(points)} double"]
    lines += [f"{x!r} {y!r} 0.0" for x, y in points]
    lines.append(f"POLYGONS {len(faces)} {sum(len(f) for f in faces)}")
    lines += [" ".join(str(v) for v in face) for face in faces]
    if cell_data and faces:
        lines.append(f"CELL_DATA {len(faces)}")
        for name, values in cell_data.items():
            values = np.asarray(values, dtype=float)[keep]
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [repr(float(v)) for v in values]

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    logger.debug(f"Wrote {len(faces)} polygons to {path}")
    return path
