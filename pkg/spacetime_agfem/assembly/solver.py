"""Slab-by-slab marching of the moving-domain problem."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..deformation.elasticity import ElasticExtensionProblem, solve_extension
from ..deformation.field import DeformationField, max_vertex_gradient
from ..deformation.motion import MovingBoundary, SmoothCutoff, check_fixed_loops, dirichlet_data, swept_cutoff
from ..exceptions import NonBijectiveMapError, SpaceTimeError
from ..fe.aggregation import AggregationMap, build_aggregates
from ..fe.quadrature import CutQuadrature, build_quadrature
from ..fe.space import SpaceTimeSpace, SpatialSpace
from ..geometry.classify import CutGeometry, classify_cells
from ..geometry.intersection import DeformedSimplices, intersect_triple
from ..mesh.active import ActiveMesh, active_mesh, extend_active
from ..mesh.cartesian import CartesianMesh
from ..mesh.time import TimePartition
from ..models import DeformationMode, NormReport
from ..protocols import ExactSolution
from .conditioning import DEFAULT_MAX_DOFS, Conditioning, condition_numbers
from .norms import error_norms
from .problem import ModelProblem
from .slab import SlabSystem, assemble_slab
from .transfer import PreviousSlab, TransferKind, TransferRule, jump_coupling

logger = logging.getLogger(__name__)


@dataclass
class MarchOptions:
    """Discretization and pipeline switches of a march.

    Attributes:
        order: Spatial order p.
        time_order: Temporal order q.
        deformation: Elasticity extension or prescribed motion.
        geometry_order: Spatial order of the deformation space.
        geometry_time_order: Temporal order of the deformation space.
        extension_penalty: c0 of the extension's Nitsche term.
        lame: (lambda, mu) of the extension.
        cutoff: Cut-off applied to the prescribed displacement. When None and
            only some loops move, one is built from the swept box of the moving loops.
        cutoff_margin: Padding of that swept box.
        shortcut: Reuse the deformed mesh as the next reference.
        shortcut_threshold: Largest accumulated deformation gradient under the shortcut.
        c_mu: Weight of the energy term in the DG norm.
        conditioning: Compute condition numbers on every slab.
        max_dofs: Dense-inverse limit for the condition numbers.
        check_containment: Verify intersection pieces against their parents.
    """

    order: int = 1
    time_order: int = 1
    deformation: DeformationMode = DeformationMode.PRESCRIBED
    geometry_order: int = 1
    geometry_time_order: int = 1
    extension_penalty: float = 10.0
    lame: tuple[float, float] = (1.0, 1.0)
    cutoff: Optional[SmoothCutoff] = None
    cutoff_margin: float = 0.25
    shortcut: bool = False
    shortcut_threshold: float = 0.8
    c_mu: float = 1.0
    conditioning: bool = False
    max_dofs: int = DEFAULT_MAX_DOFS
    check_containment: bool = True


@dataclass(eq=False)
class SlabResult:
    """Everything one marched slab produced."""

    index: int
    t0: float
    t1: float
    active: ActiveMesh
    space: SpaceTimeSpace
    coefficients: np.ndarray
    field: DeformationField
    quadrature: CutQuadrature
    transfer: TransferRule
    previous: Optional[PreviousSlab]
    system: SlabSystem
    aggregation: AggregationMap
    reduced_size: int
    conditioning: Optional[Conditioning] = None

    @property
    def mesh(self) -> CartesianMesh:
        return self.active.mesh

    def end_values(self) -> np.ndarray:
        """Spatial coefficients of the solution at the slab end."""
        return self.space.at_time(self.coefficients, 1.0)

    def vertex_values(self, s: float = 1.0) -> np.ndarray:
        """Solution at mesh vertices (NaN where a vertex carries no DOF)."""
        nodes = self.space.spatial.vertex_nodes()
        values = np.full(self.mesh.n_vertices, np.nan)
        nodal = self.space.at_time(self.coefficients, s)
        values[nodes >= 0] = nodal[nodes[nodes >= 0]]
        return values


@dataclass(eq=False)
class MarchResult:
    slabs: list[SlabResult]
    report: Optional[NormReport] = None
    resets: list[int] = field(default_factory=list)

    @property
    def final(self) -> SlabResult:
        return self.slabs[-1]


class SlabMarcher:
    """Solves the slabs of a time partition in order.

    Each slab classifies the current reference mesh, builds the deformation,
    extends the active set to cover the next domain, assembles, couples to
    the previous slab and solves the aggregated system.
    """

    def __init__(
        self,
        mesh: CartesianMesh,
        partition: TimePartition,
        boundary: MovingBoundary,
        problem: ModelProblem,
        options: Optional[MarchOptions] = None,
        exact: Optional[ExactSolution] = None,
        on_slab: Optional[Callable[[SlabResult], None]] = None,
    ) -> None:
        self.background = mesh
        self.partition = partition
        self.boundary = boundary
        self.problem = problem
        self.options = options or MarchOptions()
        self.exact = exact
        self.on_slab = on_slab
        self._logger = logging.getLogger(__name__)
        self._cutoff: Optional[SmoothCutoff] = None

    def _geometry(self, mesh: CartesianMesh, carried: Optional[CutGeometry], t0: float) -> CutGeometry:
        boundary = self.boundary.at(t0)
        if carried is not None:
            return carried.mapped(mesh, boundary)
        return classify_cells(mesh, boundary)

    def _prescribed_cutoff(self) -> Optional[SmoothCutoff]:
        """Cut-off for the rigid displacement, built once per march."""
        if self._cutoff is None:
            cutoff = self.options.cutoff
            if cutoff is None and not self.boundary.moving.all():
                lower, upper = self.background.domain_box
                cutoff = swept_cutoff(
                    self.boundary, self.partition.breakpoints, lower, upper, self.options.cutoff_margin
                )
                self._logger.debug(f"Default cut-off support [{cutoff.support_lower}, {cutoff.support_upper}]")
            check_fixed_loops(cutoff, self.boundary)
            self._cutoff = cutoff
        return self._cutoff

    def _deformation(self, active: ActiveMesh, quadrature: CutQuadrature, t0: float, t1: float) -> DeformationField:
        opts = self.options
        if opts.deformation == DeformationMode.ELASTICITY:
            lam, mu = opts.lame
            extension = ElasticExtensionProblem(
                dirichlet_data(self.boundary, t0),
                lam=lam,
                mu=mu,
                penalty=opts.extension_penalty,
                order=opts.geometry_order,
                time_order=opts.geometry_time_order,
            )
            return solve_extension(extension, active, t0, t1, quadrature=quadrature)

        motion = self.boundary
        cutoff = self._prescribed_cutoff() if motion.moving.any() else None

        def displacement(x: np.ndarray, t: float) -> np.ndarray:
            if not motion.moving.any():
                return np.zeros_like(np.asarray(x, dtype=float))
            moved = motion.relative_displacement(x, t0, t)
            if cutoff is None:
                return moved
            return cutoff(x)[..., None] * moved

        spatial = SpatialSpace(active.mesh, opts.geometry_order, active.active_cells, components=2)
        deformation = DeformationField.from_function(
            SpaceTimeSpace(spatial, opts.geometry_time_order), displacement, t0, t1
        )
        deformation.check_bijectivity(quadrature)
        return deformation

    def _transfer(
        self, geometry: CutGeometry, quadrature: CutQuadrature, previous: Optional[PreviousSlab], same_mesh: bool
    ) -> TransferRule:
        if previous is None:
            return TransferRule.initial_rule(quadrature, self.problem.initial)
        if same_mesh:
            return TransferRule.same_mesh(quadrature, geometry.mesh)
        intersection = intersect_triple(geometry, previous.simplices)
        if self.options.check_containment:
            intersection.check_containment()
        return TransferRule.from_intersection(intersection, quadrature.degree)

    def _next_mesh(self, mesh: CartesianMesh, displacement: np.ndarray) -> Optional[CartesianMesh]:
        """Deformed mesh for the shortcut, or None when the slab must be re-referenced."""
        if not (self.options.shortcut and mesh.simplexified):
            return None
        try:
            moved = mesh.deformed(displacement)
        except NonBijectiveMapError:
            return None
        accumulated = moved.vertices - self.background.vertices
        if max_vertex_gradient(self.background, accumulated) >= self.options.shortcut_threshold:
            return None
        return moved

    def march(self) -> MarchResult:
        """Run every slab.

        Returns:
            Per-slab results and, when an exact solution is known, the norms.

        Raises:
            SpaceTimeError: Any stage error, tagged with slab index and stage.
        """
        opts = self.options
        mesh = self.background
        carried: Optional[CutGeometry] = None
        previous: Optional[PreviousSlab] = None
        same_mesh = False
        result = MarchResult([])
        n_slabs = self.partition.n_slabs

        for n, t0, t1 in self.partition.slabs():
            stage = "classify"
            try:
                geometry = self._geometry(mesh, carried, t0)
                active = active_mesh(mesh, geometry, slab=n)
                stage = "quadrature"
                quadrature = build_quadrature(geometry, opts.order, opts.time_order)
                stage = "deformation"
                deformation = self._deformation(active, quadrature, t0, t1)
                displacement = deformation.vertex_displacement(t1)
                if n < n_slabs:
                    stage = "extend"
                    active = extend_active(active, displacement, self.boundary.at(t1))
                stage = "aggregate"
                spatial = SpatialSpace(mesh, opts.order, active.extended_cells)
                space = SpaceTimeSpace(spatial, opts.time_order)
                aggregation = build_aggregates(spatial, active.states)
                stage = "assemble"
                system = assemble_slab(self.problem, space, deformation, quadrature)
                stage = "transfer"
                rule = self._transfer(geometry, quadrature, previous, same_mesh)
                system.coupling = jump_coupling(space, rule, previous).rhs
                stage = "solve"
                reduced = system.reduce(aggregation)
                coefficients = reduced.solve()
                conditioning = None
                if opts.conditioning:
                    stage = "conditioning"
                    conditioning = condition_numbers(system, aggregation, opts.max_dofs)
            except SpaceTimeError as e:
                raise e.with_context(n, stage)

            slab = SlabResult(
                n, t0, t1, active, space, coefficients, deformation, quadrature, rule, previous,
                system, aggregation, reduced.size, conditioning,
            )
            result.slabs.append(slab)
            counts = geometry.counts()
            self._logger.info(
                f"Slab {n}/{n_slabs} [{t0:.4g}, {t1:.4g}]: {counts['interior']} interior, {counts['cut']} cut, "
                f"{len(active.extension_cells)} extension cells; {reduced.size} of {space.n_dofs} DOFs free; "
                f"transfer {rule.kind.value}"
            )
            if self.on_slab is not None:
                self.on_slab(slab)

            if n == n_slabs:
                break
            next_mesh = self._next_mesh(mesh, displacement)
            simplices = DeformedSimplices.from_mesh(mesh, displacement, cells=active.extended_cells)
            previous = PreviousSlab(space, coefficients, simplices)
            if next_mesh is None:
                if mesh is not self.background:
                    result.resets.append(n + 1)
                    self._logger.info(f"Slab {n + 1} re-referenced to the background mesh")
                mesh, carried, same_mesh = self.background, None, False
            else:
                mesh, carried, same_mesh = next_mesh, geometry, True

        if self.exact is not None:
            try:
                result.report = error_norms(result.slabs, self.exact, self.problem, opts.c_mu)
            except SpaceTimeError as e:
                raise e.with_context(None, "norms")
        return result


def march(
    mesh: CartesianMesh,
    partition: TimePartition,
    boundary: MovingBoundary,
    problem: ModelProblem,
    options: Optional[MarchOptions] = None,
    exact: Optional[ExactSolution] = None,
    on_slab: Optional[Callable[[SlabResult], None]] = None,
) -> MarchResult:
    """Convenience wrapper around :class:`SlabMarcher`."""
    return SlabMarcher(mesh, partition, boundary, problem, options, exact, on_slab).march()


__all__ = ["MarchOptions", "MarchResult", "SlabMarcher", "SlabResult", "TransferKind", "march"]
