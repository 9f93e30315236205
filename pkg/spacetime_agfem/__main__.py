#!/usr/bin/env python3
"""Entry point for the spacetime-agfem command line."""

import json
import sys
from pathlib import Path
from typing import Callable, Optional

import click

from . import __version__
from .config import RunConfig
from .exceptions import ConfigurationError, SpaceTimeError
from .logging_config import close_file_handlers, setup_logging


def _load_config(config_path: Optional[Path], output_dir: Optional[Path], default: Callable[[], RunConfig]) -> RunConfig:
    config = RunConfig.from_json(config_path) if config_path else default()
    config.apply_env()
    if output_dir is not None:
        config.output.directory = str(output_dir)
    return config


def _start_logging(config: RunConfig, debug: bool) -> None:
    level = "DEBUG" if debug else config.output.log_level
    log_file = config.output_dir / "run.log" if config.output.log_file else None
    setup_logging(level=level, log_file=log_file)


def _mesh_config(value: Optional[str]):
    """Mesh block from a JSON file path or an inline JSON object."""
    if value is None:
        return RunConfig().mesh
    path = Path(value)
    try:
        data = json.loads(path.read_text(encoding="utf-8")) if path.is_file() else json.loads(value)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"--mesh: invalid JSON: {e.msg}") from e
    if isinstance(data, dict) and "mesh" in data:
        data = data["mesh"]
    return RunConfig.from_dict({"mesh": data}).mesh


def _execute(action: Callable[[], None]) -> int:
    """Run a command body; errors exit with the code of their class."""
    try:
        action()
        return 0
    except SpaceTimeError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(e.exit_code)
    except Exception as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(1)
    finally:
        close_file_handlers()


config_option = click.option(
    "--config",
    "config_path",
    default=None,
    help="JSON run config",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
output_option = click.option(
    "--output-dir",
    default=None,
    help="Output directory (overrides config and STAGFEM_OUTPUT_DIR)",
    type=click.Path(file_okay=False, path_type=Path),
)
debug_option = click.option("--debug", is_flag=True, help="Enable debug logging")


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """spacetime-agfem - space-time unfitted finite elements on moving domains."""


@main.command()
@config_option
@output_option
@debug_option
def run(config_path: Optional[Path], output_dir: Optional[Path], debug: bool) -> int:
    """March one configuration and write the norm report and field dumps."""

    def action() -> None:
        from .harness.runner import run as run_config

        # Load configuration
        config = _load_config(config_path, output_dir, RunConfig)
        _start_logging(config, debug)
        outcome = run_config(config)

        # Report norms
        row = outcome.row
        click.echo(
            f"h={row.h:.4g} tau={row.tau:.4g} dg={row.dg_err:.4e} l2={row.l2_err:.4e} h1={row.h1_err:.4e} "
            f"cond_M={row.cond_M:.4e} cond_A={row.cond_A:.4e}"
        )
        click.echo(f"Outputs written to {config.output_dir}")

    return _execute(action)


@main.command()
@config_option
@output_option
@click.option("--levels", default="8,16,32", show_default=True, help="Cells per direction, comma separated")
@click.option("--orders", default="p=1,q=1", show_default=True, help='Order pairs, e.g. "p=1,q=1;p=2,q=2"')
@debug_option
def convergence(config_path: Optional[Path], output_dir: Optional[Path], levels: str, orders: str, debug: bool) -> int:
    """Refinement study with least-squares convergence slopes."""

    def action() -> None:
        from .harness.runner import convergence as run_convergence, parse_levels, parse_orders

        config = _load_config(config_path, output_dir, RunConfig)
        _start_logging(config, debug)
        _, slopes = run_convergence(config, parse_levels(levels), parse_orders(orders))
        for entry in slopes:
            click.echo(
                f"p={entry['p']} q={entry['q']}: dg {entry['dg_err']:.3f} l2 {entry['l2_err']:.3f} "
                f"h1 {entry['h1_err']:.3f} cond_M {entry['cond_M']:.3f} cond_A {entry['cond_A']:.3f}"
            )

    return _execute(action)


@main.group()
def geom() -> None:
    """Geometry debug dumps."""


boundary_option = click.option(
    "--boundary",
    "boundary_path",
    required=True,
    help="Boundary file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
mesh_option = click.option("--mesh", "mesh_spec", default=None, help="Mesh block as a JSON file or inline JSON")


def _geometry_inputs(boundary_path: Path, mesh_spec: Optional[str], output_dir: Optional[Path], debug: bool):
    from .fileio.boundary_file import read_boundary
    from .mesh.cartesian import Grading, build_mesh

    config = _load_config(None, output_dir, RunConfig)
    # Geometry dumps never write a run log
    config.output.log_file = False
    _start_logging(config, debug)
    mesh_cfg = _mesh_config(mesh_spec)
    grading = [Grading(mesh_cfg.grading.x0, mesh_cfg.grading.alpha)] * 2 if mesh_cfg.grading.alpha < 1.0 else None
    mesh = build_mesh(mesh_cfg.origin, mesh_cfg.lengths, mesh_cfg.counts, grading, mesh_cfg.simplexify)
    directory = config.output_dir
    directory.mkdir(parents=True, exist_ok=True)
    return read_boundary(boundary_path), mesh, directory


@geom.command()
@boundary_option
@mesh_option
@output_option
@debug_option
def classify(boundary_path: Path, mesh_spec: Optional[str], output_dir: Optional[Path], debug: bool) -> int:
    """Classify background cells as interior, cut or exterior."""

    def action() -> None:
        from .harness.runner import geom_classify

        boundary, mesh, directory = _geometry_inputs(boundary_path, mesh_spec, output_dir, debug)
        geometry = geom_classify(boundary, mesh, directory)
        counts = geometry.counts()
        click.echo(
            f"interior={counts['interior']} cut={counts['cut']} exterior={counts['exterior']} "
            f"total={mesh.n_cells} area={geometry.domain_area:.12g}"
        )

    return _execute(action)


@geom.command()
@boundary_option
@mesh_option
@click.option("--cell", required=True, type=int, help="Background cell index")
@output_option
@debug_option
def clip(boundary_path: Path, mesh_spec: Optional[str], cell: int, output_dir: Optional[Path], debug: bool) -> int:
    """Clip one cell against the domain and dump its pieces."""

    def action() -> None:
        from .harness.runner import geom_clip

        boundary, mesh, directory = _geometry_inputs(boundary_path, mesh_spec, output_dir, debug)
        pieces, measure = geom_clip(boundary, mesh, cell, directory)
        click.echo(f"cell={cell} pieces={len(pieces)} measure={measure:.12g}")

    return _execute(action)


@geom.command()
@boundary_option
@mesh_option
@click.option("--offset", default=None, help="Translation of the second mesh as dx,dy (half a cell by default)")
@output_option
@debug_option
def intersect(
    boundary_path: Path, mesh_spec: Optional[str], offset: Optional[str], output_dir: Optional[Path], debug: bool
) -> int:
    """Intersect the cut mesh with a translated copy of itself."""

    def action() -> None:
        from .harness.runner import geom_intersect

        # Half a cell unless given
        shift = None
        if offset is not None:
            try:
                shift = [float(part) for part in offset.split(",")]
            except ValueError as e:
                raise ConfigurationError(f"--offset: expected dx,dy, got {offset!r}") from e
            if len(shift) != 2:
                raise ConfigurationError(f"--offset: expected dx,dy, got {offset!r}")
        boundary, mesh, directory = _geometry_inputs(boundary_path, mesh_spec, output_dir, debug)
        intersection = geom_intersect(boundary, mesh, shift, directory)
        click.echo(f"cells={len(intersection)} measure={intersection.total_measure:.12g}")

    return _execute(action)


@main.command()
@config_option
@output_option
@debug_option
def demo(config_path: Optional[Path], output_dir: Optional[Path], debug: bool) -> int:
    """Scalar transport around a rigidly moving gear-like body."""

    def action() -> None:
        from .harness.runner import demo_config, demo_moving

        config = _load_config(config_path, output_dir, demo_config)
        _start_logging(config, debug)
        outcome = demo_moving(config)
        click.echo(f"{len(outcome.result.slabs)} slabs written to {config.output_dir}")

    return _execute(action)


if __name__ == "__main__":
    sys.exit(main())
