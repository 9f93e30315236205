"""Runs, convergence studies, geometry debug dumps and the moving-body demo."""

import copy
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..assembly.solver import MarchResult, SlabResult, march
from ..config import RunConfig
from ..exceptions import ConfigurationError
from ..fileio.reports import (
    convergence_slopes,
    dump_system,
    write_conditioning_csv,
    write_report_csv,
    write_resolved_config,
    write_slopes_csv,
)
from ..fileio.vtk import write_mesh_vtk, write_polydata, write_slab_vtk
from ..geometry.boundary import OrientedBoundary
from ..geometry.classify import CutGeometry, cell_cap_interior, classify_cells
from ..geometry.intersection import DeformedSimplices, IntersectionMesh, intersect_triple
from ..mesh.cartesian import CartesianMesh, build_mesh
from ..models import ConvexPolygon, ProblemKind, ReportRow
from .setups import Setup, build_setup

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class RunOutcome:
    """Result of one run and the files it wrote."""

    setup: Setup
    result: MarchResult
    row: ReportRow
    conditioning: list[dict] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)


def conditioning_records(result: MarchResult) -> list[dict]:
    """Per-slab condition numbers of slabs that computed them."""
    records = []
    for slab in result.slabs:
        if slab.conditioning is None:
            continue
        records.append(
            {
                "slab": slab.index,
                "t0": slab.t0,
                "t1": slab.t1,
                "dofs": slab.conditioning.size,
                "cond_M": slab.conditioning.cond_M,
                "cond_A": slab.conditioning.cond_A,
            }
        )
    return records


def report_row(setup: Setup, result: MarchResult) -> ReportRow:
    """CSV row of a march; condition numbers are those of the first slab."""
    row = ReportRow(
        n_cells=int(setup.mesh.counts[0]),
        h=float(setup.mesh.h),
        tau=float(setup.partition.tau),
        p=setup.options.order,
        q=setup.options.time_order,
    )
    if result.report is not None:
        row.dg_err = result.report.dg_error
        row.l2_err = result.report.l2_error
        row.h1_err = result.report.h1_error
    first = result.slabs[0].conditioning
    if first is not None:
        row.cond_M, row.cond_A = first.cond_M, first.cond_A
    return row


class SlabWriter:
    """Per-slab output hook of a march."""

    def __init__(self, directory: Path, vtk: bool, matrix_market: bool) -> None:
        self.directory = directory
        self.vtk = vtk
        self.matrix_market = matrix_market
        self.files: list[Path] = []
        self._logger = logging.getLogger(__name__)

    def __call__(self, slab: SlabResult) -> None:
        if self.vtk:
            self.files.append(write_slab_vtk(self.directory / f"slab_{slab.index:04d}.vtk", slab))
        if self.matrix_market and slab.index == 1:
            reduced = slab.system.reduce(slab.aggregation)
            self.files.extend(dump_system(reduced.matrix, reduced.rhs, self.directory, "slab1"))
            self._logger.info(f"Dumped the reduced slab-1 system ({reduced.size} DOFs)")


def run(
    config: RunConfig,
    counts: Optional[tuple[int, int]] = None,
    slabs: Optional[int] = None,
    write: bool = True,
) -> RunOutcome:
    """March one configuration and write its outputs.

    Args:
        config: Validated config.
        counts: Override of the mesh cell counts.
        slabs: Override of the number of slabs.
        write: Write the CSV report, per-slab VTK, conditioning and resolved config.

    Returns:
        The outcome with the report row.

    Raises:
        SpaceTimeError: From any pipeline stage, tagged with slab and stage.
    """
    setup = build_setup(config, counts, slabs)
    directory = config.output_dir
    writer = SlabWriter(directory, config.output.vtk, config.output.matrix_market) if write else None
    logger.info(
        f"Marching {setup.partition.n_slabs} slabs on a {setup.mesh.counts[0]}x{setup.mesh.counts[1]} "
        f"{setup.mesh.shape} mesh, p={setup.options.order}, q={setup.options.time_order}, "
        f"{setup.options.deformation.value} deformation"
    )
    result = march(
        setup.mesh, setup.partition, setup.boundary, setup.problem, setup.options, setup.exact, on_slab=writer
    )
    row = report_row(setup, result)
    outcome = RunOutcome(setup, result, row, conditioning_records(result))
    if result.report is not None:
        logger.info(f"h={row.h:.4g} tau={row.tau:.4g}: {result.report.message}")
    if result.resets:
        logger.info(f"Re-referenced to the background mesh before slabs {result.resets}")
    if write:
        outcome.files.extend(writer.files)
        outcome.files.append(write_report_csv([row], directory / "report.csv"))
        if outcome.conditioning:
            outcome.files.append(write_conditioning_csv(outcome.conditioning, directory / "conditioning.csv"))
        outcome.files.append(write_resolved_config(config.to_dict(), directory))
    return outcome


def parse_orders(text: str) -> list[tuple[int, int]]:
    """Parse ``"p=1,q=1;p=2,q=2"`` into order pairs.

    Raises:
        ConfigurationError: For malformed entries.
    """
    pairs = []
    for chunk in filter(None, (part.strip() for part in text.split(";"))):
        values = {}
        for item in chunk.split(","):
            key, sep, value = item.partition("=")
            if not sep or key.strip() not in ("p", "q"):
                raise ConfigurationError(f"invalid order entry {chunk!r}; expected p=<int>,q=<int>")
            try:
                values[key.strip()] = int(value)
            except ValueError as e:
                raise ConfigurationError(f"invalid order value in {chunk!r}") from e
        if set(values) != {"p", "q"}:
            raise ConfigurationError(f"order entry {chunk!r} needs both p and q")
        pairs.append((values["p"], values["q"]))
    if not pairs:
        raise ConfigurationError("no order pairs given")
    return pairs


def parse_levels(text: str) -> list[int]:
    try:
        levels = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigurationError(f"invalid levels {text!r}; expected comma separated integers") from e
    if any(n < 1 for n in levels):
        raise ConfigurationError("levels must be positive")
    return levels


def level_config(config: RunConfig, p: int, q: int) -> RunConfig:
    """Copy of the config with the given orders, writing no per-slab files."""
    level = copy.deepcopy(config)
    level.discretization.p = p
    level.discretization.q = q
    level.output.vtk = False
    level.output.matrix_market = False
    return level.validate()


def convergence(
    config: RunConfig, levels: Sequence[int], orders: Sequence[tuple[int, int]], write: bool = True
) -> tuple[list[ReportRow], list[dict]]:
    """Refinement study with n cells per direction and n slabs per level.

    h / tau stays constant across levels, as the same n is used in space
    and time.

    Args:
        config: Base config.
        levels: Cells per direction, one march per entry.
        orders: (p, q) pairs.
        write: Write ``convergence.csv`` and ``slopes.csv``.

    Returns:
        Report rows and slopes.

    Raises:
        ConfigurationError: With fewer than three levels.
    """
    if len(levels) < 3:
        raise ConfigurationError(f"a convergence study needs at least three levels, got {len(levels)}")
    rows = []
    for p, q in orders:
        level = level_config(config, p, q)
        for n in sorted(levels):
            outcome = run(level, counts=(n, n), slabs=n, write=False)
            rows.append(outcome.row)
    slopes = convergence_slopes(rows)
    for entry in slopes:
        logger.info(
            f"p={entry['p']} q={entry['q']}: slopes dg {entry['dg_err']:.3f}, l2 {entry['l2_err']:.3f}, "
            f"h1 {entry['h1_err']:.3f}, cond_A {entry['cond_A']:.3f}"
        )
    if write:
        directory = config.output_dir
        write_report_csv(rows, directory / "convergence.csv")
        write_slopes_csv(slopes, directory / "slopes.csv")
        write_resolved_config(config.to_dict(), directory)
    return rows, slopes


def geom_classify(boundary: OrientedBoundary, mesh: CartesianMesh, directory: Optional[Path] = None) -> CutGeometry:
    """Classify a mesh and dump states and measures as VTK and CSV."""
    geometry = classify_cells(mesh, boundary)
    counts = geometry.counts()
    logger.info(
        f"{counts['interior']} interior, {counts['cut']} cut, {counts['exterior']} exterior cells; "
        f"domain area {geometry.domain_area:.12g}"
    )
    if directory is not None:
        write_mesh_vtk(
            directory / "classify.vtk",
            mesh,
            cell_data={"state": geometry.states.astype(np.int32), "measure": geometry.measures},
        )
        with (directory / "classify.csv").open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["cell", "state", "measure"])
            for cell, (state, measure) in enumerate(zip(geometry.states, geometry.measures)):
                writer.writerow([cell, int(state), repr(float(measure))])
    return geometry


def geom_clip(
    boundary: OrientedBoundary, mesh: CartesianMesh, cell: int, directory: Optional[Path] = None
) -> tuple[list[ConvexPolygon], float]:
    """Pieces of one cell inside the domain and their total area."""
    if not 0 <= cell < mesh.n_cells:
        raise ConfigurationError(f"cell {cell} outside 0..{mesh.n_cells - 1}")
    pieces = cell_cap_interior(mesh.cell_polygons[cell], boundary)
    measure = math.fsum(piece.area for piece in pieces)
    logger.info(f"Cell {cell}: {len(pieces)} pieces, measure {measure:.12g} of {mesh.cell_areas[cell]:.12g}")
    if directory is not None:
        write_polydata(
            directory / f"clip_{cell}.vtk", pieces, {"area": [piece.area for piece in pieces]}, title=f"cell {cell}"
        )
    return pieces, measure


def padded_translate(mesh: CartesianMesh, offset: Sequence[float]) -> DeformedSimplices:
    """A uniform copy of the mesh padded by one cell on each side and moved by ``offset``.

    The padding keeps the translate covering the original box for offsets
    up to one cell.
    """
    counts = np.asarray(mesh.counts, dtype=int)
    lengths = np.asarray(mesh.lengths, dtype=float)
    step = lengths / counts
    if np.any(np.abs(np.asarray(offset, dtype=float)) > step):
        raise ConfigurationError(f"offset {list(offset)} exceeds one cell {list(step)}")
    padded = build_mesh(np.asarray(mesh.origin) - step, lengths + 2 * step, counts + 2, simplexify_cells=mesh.simplexified)
    displacement = np.broadcast_to(np.asarray(offset, dtype=float), padded.vertices.shape)
    return DeformedSimplices.from_mesh(padded, displacement)


def geom_intersect(
    boundary: OrientedBoundary,
    mesh: CartesianMesh,
    offset: Optional[Sequence[float]] = None,
    directory: Optional[Path] = None,
) -> IntersectionMesh:
    """Intersect the cut mesh with a translate of itself, half a cell by default."""
    if offset is None:
        offset = 0.5 * np.asarray(mesh.lengths, dtype=float) / np.asarray(mesh.counts)
    geometry = classify_cells(mesh, boundary)
    intersection = intersect_triple(geometry, padded_translate(mesh, offset))
    logger.info(
        f"{len(intersection)} intersection cells, measure {intersection.total_measure:.12g} "
        f"against domain area {geometry.domain_area:.12g}"
    )
    if directory is not None:
        polygons = [piece for cell in intersection.cells for piece in cell.pieces]
        parents = [cell.parent_current for cell in intersection.cells for _ in cell.pieces]
        previous = [cell.parent_previous for cell in intersection.cells for _ in cell.pieces]
        write_polydata(
            directory / "intersection.vtk",
            polygons,
            {"current": parents, "previous": previous},
            title="intersection mesh",
        )
        with (directory / "intersection.csv").open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["cell", "pieces"])
            for cell, count in sorted(intersection.pieces_per_cell().items()):
                writer.writerow([cell, count])
    return intersection


def demo_config() -> RunConfig:
    """Gear-like hole oscillating and rotating under the time ramp, with a transported bump."""
    config = RunConfig()
    config.mesh.counts = (24, 24)
    config.mesh.grading.alpha = 0.8
    config.time.slabs = 16
    config.geometry.shape = "gear"
    config.motion.kind = "composed_with_time_ramp"
    config.problem.kind = ProblemKind.TRANSPORT.value
    config.problem.mu = 0.01
    config.problem.advection = (1.0, 0.0)
    config.discretization.conditioning = False
    return config.validate()


def demo_moving(config: RunConfig, write: bool = True) -> RunOutcome:
    """Scalar fields around a rigidly moving body, slab by slab.

    Logs the range of the end-of-slab solution; for the constant problem
    the largest deviation from one.
    """
    outcome = run(config, write=write)
    for slab in outcome.result.slabs:
        values = slab.vertex_values(1.0)
        values = values[np.isfinite(values)]
        if config.problem.kind == ProblemKind.CONSTANT.value:
            logger.info(f"Slab {slab.index}: max |u - 1| = {np.max(np.abs(values - 1.0)):.3e}")
        else:
            logger.info(f"Slab {slab.index}: u in [{values.min():.4g}, {values.max():.4g}]")
    return outcome
