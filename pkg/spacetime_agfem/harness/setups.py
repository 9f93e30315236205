"""Translate a :class:`RunConfig` into the objects a march needs."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..assembly.problem import ModelProblem
from ..assembly.solver import MarchOptions
from ..config import RunConfig
from ..deformation.motion import MovingBoundary, SmoothCutoff, build_motion, swept_cutoff
from ..fileio.boundary_file import read_boundary
from ..geometry.boundary import OrientedBoundary, rectangle_loop, star_loop
from ..mesh.cartesian import CartesianMesh, Grading, build_mesh
from ..mesh.time import TimePartition
from ..models import DeformationMode, ProblemKind
from ..protocols import ExactSolution
from .manufactured import ConstantSolution, GaussianBump, ManufacturedSolution


@dataclass(eq=False)
class Setup:
    """Everything :func:`~spacetime_agfem.assembly.solver.march` consumes."""

    mesh: CartesianMesh
    partition: TimePartition
    boundary: MovingBoundary
    problem: ModelProblem
    options: MarchOptions
    exact: Optional[ExactSolution] = None


def background_mesh(config: RunConfig, counts: Optional[tuple[int, int]] = None) -> CartesianMesh:
    """Background mesh of the config, optionally with other cell counts."""
    mesh = config.mesh
    grading = None
    if mesh.grading.alpha < 1.0:
        grading = [Grading(mesh.grading.x0, mesh.grading.alpha)] * 2
    return build_mesh(mesh.origin, mesh.lengths, counts or mesh.counts, grading, mesh.simplexify)


def time_partition(config: RunConfig, slabs: Optional[int] = None) -> TimePartition:
    time = config.time
    if slabs is not None:
        return TimePartition.uniform(time.end, slabs, time.start)
    if time.slabs is not None:
        return TimePartition.uniform(time.end, time.slabs, time.start)
    return TimePartition.from_step(time.end, time.tau, time.start)


def initial_boundary(config: RunConfig) -> OrientedBoundary:
    """Boundary at the start time: the mesh box with a hole, or a boundary file."""
    geometry = config.geometry
    if geometry.shape == "file":
        return read_boundary(geometry.boundary_file)
    box = rectangle_loop(config.mesh.origin, config.mesh.upper)
    if geometry.shape == "square_hole":
        hole = rectangle_loop(geometry.hole_lower, geometry.hole_upper, counterclockwise=False)
    else:
        hole = star_loop(
            geometry.gear_center, geometry.gear_inner, geometry.gear_outer, geometry.gear_teeth, counterclockwise=False
        )
    return OrientedBoundary.from_loops([box, hole])


def moving_boundary(config: RunConfig, boundary: Optional[OrientedBoundary] = None) -> MovingBoundary:
    """Attach the configured motion to the selected loops."""
    boundary = boundary if boundary is not None else initial_boundary(config)
    motion = build_motion(config.motion.kind, **config.motion.params())
    loops = config.geometry.moving_loops
    if loops is None and len(boundary.loops) > 1:
        loops = list(range(1, len(boundary.loops)))
    return MovingBoundary(boundary, motion, loops)


def motion_cutoff(config: RunConfig, boundary: MovingBoundary, partition: TimePartition) -> SmoothCutoff:
    """Cut-off equal to one on the padded swept box of the moving loops.

    Raises:
        ConfigurationError: If the moving loops sweep too close to the mesh box.
    """
    lower = np.asarray(config.mesh.origin, dtype=float)
    upper = np.asarray(config.mesh.upper, dtype=float)
    if not boundary.moving.any():
        inset = 0.25 * (upper - lower)
        return SmoothCutoff(tuple(lower + inset), tuple(upper - inset), tuple(lower), tuple(upper))
    return swept_cutoff(boundary, partition.breakpoints, lower, upper, config.motion.cutoff_margin)


def model_problem(config: RunConfig) -> tuple[ModelProblem, Optional[ExactSolution]]:
    """Problem data and, when known, the exact solution."""
    problem = config.problem
    c0 = config.discretization.nitsche_c0
    kind = ProblemKind(problem.kind)
    if kind == ProblemKind.MANUFACTURED:
        exact = ManufacturedSolution(
            problem.manufactured.alpha,
            problem.manufactured.lengths,
            config.time.end,
            problem.mu,
            problem.advection,
        )
        return exact.problem(c0), exact
    if kind == ProblemKind.CONSTANT:
        constant = ConstantSolution(1.0, problem.mu)
        return constant.problem(c0, problem.advection), constant

    w = np.asarray(problem.advection, dtype=float)
    transport = ModelProblem(
        mu=problem.mu,
        advection=(lambda x, t: np.broadcast_to(w, np.shape(x))) if np.any(w) else None,
        initial=GaussianBump(problem.bump_center, problem.bump_width),
        penalty=c0,
    )
    return transport, None


def march_options(config: RunConfig, cutoff: Optional[SmoothCutoff] = None) -> MarchOptions:
    disc = config.discretization
    return MarchOptions(
        order=disc.p,
        time_order=disc.q,
        deformation=DeformationMode(disc.deformation),
        geometry_order=disc.geometry_order,
        geometry_time_order=disc.geometry_time_order,
        extension_penalty=disc.extension_c0,
        lame=tuple(disc.lame),
        cutoff=cutoff,
        shortcut=disc.small_deformation_shortcut,
        shortcut_threshold=disc.transfer_skip_threshold,
        c_mu=disc.c_mu,
        conditioning=disc.conditioning,
        max_dofs=disc.max_dofs,
        check_containment=disc.check_containment,
    )


def build_setup(config: RunConfig, counts: Optional[tuple[int, int]] = None, slabs: Optional[int] = None) -> Setup:
    """Assemble mesh, partition, moving boundary, problem and options.

    Args:
        config: Validated run config.
        counts: Override of the mesh cell counts (convergence levels).
        slabs: Override of the number of slabs.

    Returns:
        The setup.
    """
    mesh = background_mesh(config, counts)
    partition = time_partition(config, slabs)
    boundary = moving_boundary(config)
    cutoff = None
    if config.discretization.deformation == DeformationMode.PRESCRIBED.value:
        cutoff = motion_cutoff(config, boundary, partition)
    problem, exact = model_problem(config)
    return Setup(mesh, partition, boundary, problem, march_options(config, cutoff), exact)
