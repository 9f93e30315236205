"""Catalog of boundary motions D(x, t) and the Dirichlet data they induce."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..exceptions import ConfigurationError
from ..geometry.boundary import OrientedBoundary
from ..models import MotionKind

logger = logging.getLogger(__name__)


def rotation(angle: float) -> np.ndarray:
    """2x2 counterclockwise rotation matrix."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _rotation_rate(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[-s, -c], [c, -s]])


@dataclass(frozen=True)
class Static:
    """No motion."""

    kind = MotionKind.STATIC

    def position(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.array(x, dtype=float)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))

    def inverse(self, y: np.ndarray, t: float) -> np.ndarray:
        return np.array(y, dtype=float)


@dataclass(frozen=True)
class Translation:
    """D(x, t) = x + c t."""

    velocity_vector: tuple[float, float] = (0.2, 0.0)
    kind = MotionKind.PRESCRIBED_TRANSLATION

    def position(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(x, dtype=float) + t * np.asarray(self.velocity_vector)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.velocity_vector, dtype=float), np.shape(x)).copy()

    def inverse(self, y: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(y, dtype=float) - t * np.asarray(self.velocity_vector)


@dataclass(frozen=True)
class RigidOscillation:
    """D_s(x, t) = x0 + R(omega t)(x - x0) + A sin(omega_x t)."""

    center: tuple[float, float] = (0.0, 0.0)
    omega: float = math.pi / 2
    amplitude: tuple[float, float] = (0.0, 0.2)
    omega_x: float = math.pi / 2
    kind = MotionKind.RIGID_ROTATION_OSCILLATION

    def position(self, x: np.ndarray, t: float) -> np.ndarray:
        x0 = np.asarray(self.center)
        rel = np.asarray(x, dtype=float) - x0
        return x0 + rel @ rotation(self.omega * t).T + np.asarray(self.amplitude) * math.sin(self.omega_x * t)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        rel = np.asarray(x, dtype=float) - np.asarray(self.center)
        spin = self.omega * rel @ _rotation_rate(self.omega * t).T
        return spin + np.asarray(self.amplitude) * self.omega_x * math.cos(self.omega_x * t)

    def inverse(self, y: np.ndarray, t: float) -> np.ndarray:
        x0 = np.asarray(self.center)
        shifted = np.asarray(y, dtype=float) - x0 - np.asarray(self.amplitude) * math.sin(self.omega_x * t)
        return x0 + shifted @ rotation(-self.omega * t).T


@dataclass(frozen=True)
class PitchingRotation:
    """Rotation about x0 by theta(t) = theta_max sin(omega_theta t)."""

    center: tuple[float, float] = (0.0, 0.0)
    theta_max: float = math.pi / 10
    omega_theta: float = math.pi
    kind = MotionKind.PITCHING_ROTATION

    def angle(self, t: float) -> float:
        return self.theta_max * math.sin(self.omega_theta * t)

    def position(self, x: np.ndarray, t: float) -> np.ndarray:
        x0 = np.asarray(self.center)
        return x0 + (np.asarray(x, dtype=float) - x0) @ rotation(self.angle(t)).T

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        rate = self.theta_max * self.omega_theta * math.cos(self.omega_theta * t)
        rel = np.asarray(x, dtype=float) - np.asarray(self.center)
        return rate * rel @ _rotation_rate(self.angle(t)).T

    def inverse(self, y: np.ndarray, t: float) -> np.ndarray:
        x0 = np.asarray(self.center)
        return x0 + (np.asarray(y, dtype=float) - x0) @ rotation(-self.angle(t)).T


@dataclass(frozen=True)
class TimeRamp:
    """Time reparametrisation with zero initial slope.

    phi_t(t) = (t_a / gamma) (t / t_a)^gamma for t < t_a and
    (t - t_a) + t_a / gamma afterwards, so phi_t is C1 at t_a.
    """

    gamma: float = 2.0
    t_a: float = 0.125

    def __post_init__(self) -> None:
        if self.gamma < 1.0 or self.t_a <= 0.0:
            raise ConfigurationError(f"time ramp needs gamma >= 1 and t_a > 0, got {self.gamma}, {self.t_a}")

    def __call__(self, t: float) -> float:
        if t < self.t_a:
            return self.t_a / self.gamma * (max(t, 0.0) / self.t_a) ** self.gamma
        return (t - self.t_a) + self.t_a / self.gamma

    def rate(self, t: float) -> float:
        if t < self.t_a:
            return (max(t, 0.0) / self.t_a) ** (self.gamma - 1.0)
        return 1.0


@dataclass(frozen=True)
class RampedMotion:
    """A motion evaluated at the ramped time phi_t(t)."""

    base: object
    ramp: TimeRamp = field(default_factory=TimeRamp)
    kind = MotionKind.COMPOSED_WITH_TIME_RAMP

    def position(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.base.position(x, self.ramp(t))

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.base.velocity(x, self.ramp(t)) * self.ramp.rate(t)

    def inverse(self, y: np.ndarray, t: float) -> np.ndarray:
        return self.base.inverse(y, self.ramp(t))


@dataclass(frozen=True)
class CustomMotion:
    """User-supplied position, with optional velocity and inverse callables."""

    position_fn: Callable[[np.ndarray, float], np.ndarray]
    velocity_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    inverse_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    kind = MotionKind.CUSTOM

    def position(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(self.position_fn(np.asarray(x, dtype=float), t), dtype=float)

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        if self.velocity_fn is not None:
            return np.asarray(self.velocity_fn(np.asarray(x, dtype=float), t), dtype=float)
        dt = 1e-6
        return (self.position(x, t + dt) - self.position(x, t - dt)) / (2.0 * dt)

    def inverse(self, y: np.ndarray, t: float) -> np.ndarray:
        if self.inverse_fn is None:
            raise ConfigurationError("this custom motion has no inverse; prescribed deformation is unavailable")
        return np.asarray(self.inverse_fn(np.asarray(y, dtype=float), t), dtype=float)


def relative_displacement(motion, x: np.ndarray, t_start: float, t: float) -> np.ndarray:
    """D(t) o D(t_start)^-1 (x) - x for points x of the configuration at t_start."""
    x = np.asarray(x, dtype=float)
    return motion.position(motion.inverse(x, t_start), t) - x


def build_motion(kind: MotionKind | str, **params) -> object:
    """Create a catalog motion from its kind and parameters.

    ``composed_with_time_ramp`` takes ``base`` (a kind name, default
    rigid_rotation_oscillation), ``base_params``, ``gamma`` and ``t_a``.

    Raises:
        ConfigurationError: For unknown kinds or parameters.
    """
    resolved = kind if isinstance(kind, MotionKind) else MotionKind.from_string(str(kind))
    if resolved is None:
        raise ConfigurationError(f"unknown motion kind {kind!r}; expected one of {MotionKind.choices()}")
    try:
        if resolved == MotionKind.STATIC:
            return Static()
        if resolved == MotionKind.PRESCRIBED_TRANSLATION:
            return Translation(tuple(params.get("velocity", (0.2, 0.0))))
        if resolved == MotionKind.RIGID_ROTATION_OSCILLATION:
            return RigidOscillation(
                tuple(params.get("center", (0.0, 0.0))),
                float(params.get("omega", math.pi / 2)),
                tuple(params.get("amplitude", (0.0, 0.2))),
                float(params.get("omega_x", math.pi / 2)),
            )
        if resolved == MotionKind.PITCHING_ROTATION:
            return PitchingRotation(
                tuple(params.get("center", (0.0, 0.0))),
                float(params.get("theta_max", math.pi / 10)),
                float(params.get("omega_theta", math.pi)),
            )
        if resolved == MotionKind.COMPOSED_WITH_TIME_RAMP:
            base_kind = params.get("base", MotionKind.RIGID_ROTATION_OSCILLATION.value)
            if MotionKind.from_string(str(base_kind)) == MotionKind.COMPOSED_WITH_TIME_RAMP:
                raise ConfigurationError("a time ramp cannot wrap another time ramp")
            base = build_motion(base_kind, **params.get("base_params", {}))
            return RampedMotion(base, TimeRamp(float(params.get("gamma", 2.0)), float(params.get("t_a", 0.125))))
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"invalid parameters for motion {resolved.value}: {e}") from e
    raise ConfigurationError("custom motions are supplied programmatically, not by configuration")


class MovingBoundary:
    """An oriented boundary whose selected loops follow a motion."""

    def __init__(self, initial: OrientedBoundary, motion: object, loops: Optional[Sequence[int]] = None) -> None:
        self.initial = initial
        self.motion = motion
        n_loops = len(initial.loops)
        selected = range(n_loops) if loops is None else loops
        self.moving = np.zeros(len(initial.vertices), dtype=bool)
        for loop in selected:
            if not 0 <= loop < n_loops:
                raise ConfigurationError(f"motion loop index {loop} outside 0..{n_loops - 1}")
            self.moving[initial.edges[initial.loops[loop], 0]] = True

    def vertex_positions(self, t: float) -> np.ndarray:
        positions = self.initial.vertices.copy()
        if self.moving.any():
            positions[self.moving] = self.motion.position(self.initial.vertices[self.moving], t)
        return positions

    def vertex_velocities(self, t: float) -> np.ndarray:
        velocities = np.zeros_like(self.initial.vertices)
        if self.moving.any():
            velocities[self.moving] = self.motion.velocity(self.initial.vertices[self.moving], t)
        return velocities

    def at(self, t: float) -> OrientedBoundary:
        """Boundary configuration B_h(t)."""
        if t == 0.0 or not self.moving.any():
            return self.initial
        return self.initial.moved(self.vertex_positions(t))

    def relative_displacement(self, x: np.ndarray, t_start: float, t: float) -> np.ndarray:
        """Relative rigid displacement of points near the moving loops."""
        return relative_displacement(self.motion, x, t_start, t)


@dataclass(eq=False)
class DirichletData:
    """Boundary displacement of one slab relative to its initial configuration."""

    boundary: MovingBoundary
    t_start: float

    def vertices(self, t: float) -> np.ndarray:
        """Displacement of every boundary vertex, zero at t_start."""
        return self.boundary.vertex_positions(t) - self.boundary.vertex_positions(self.t_start)

    def on_edges(self, edges: np.ndarray, params: np.ndarray, t: float) -> np.ndarray:
        """Displacement at edge parameters, linear along each boundary edge.

        Args:
            edges: Edge ids, shape (k,).
            params: Edge parameters, shape (k, ng).
            t: Time.

        Returns:
            Displacements, shape (k, ng, 2).
        """
        disp = self.vertices(t)
        edge_vertices = self.boundary.initial.edges[np.asarray(edges, dtype=int)]
        a, b = disp[edge_vertices[:, 0]], disp[edge_vertices[:, 1]]
        s = np.asarray(params)[..., None]
        return (1.0 - s) * a[:, None, :] + s * b[:, None, :]


def dirichlet_data(boundary: MovingBoundary, t_start: float) -> DirichletData:
    """Slab Dirichlet data D(t) o D(t_start)^-1 - id sampled at boundary vertices."""
    return DirichletData(boundary, t_start)


def smoothstep(r: np.ndarray) -> np.ndarray:
    r = np.clip(r, 0.0, 1.0)
    return r * r * (3.0 - 2.0 * r)


def smoothstep_rate(r: np.ndarray) -> np.ndarray:
    inside = (r > 0.0) & (r < 1.0)
    return np.where(inside, 6.0 * r * (1.0 - r), 0.0)


@dataclass(frozen=True)
class SmoothCutoff:
    """C1 function equal to 1 on a support box and 0 on the artificial boundary."""

    support_lower: tuple[float, float]
    support_upper: tuple[float, float]
    domain_lower: tuple[float, float]
    domain_upper: tuple[float, float]

    def __post_init__(self) -> None:
        lo, hi = np.asarray(self.support_lower), np.asarray(self.support_upper)
        dlo, dhi = np.asarray(self.domain_lower), np.asarray(self.domain_upper)
        if np.any(lo <= dlo) or np.any(hi >= dhi) or np.any(lo >= hi):
            raise ConfigurationError("cutoff support box must lie strictly inside the artificial domain")

    def _ramps(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = np.asarray(self.support_lower), np.asarray(self.support_upper)
        dlo, dhi = np.asarray(self.domain_lower), np.asarray(self.domain_upper)
        below = (x - dlo) / (lo - dlo)
        above = (dhi - x) / (dhi - hi)
        return below, above

    def __call__(self, x: np.ndarray) -> np.ndarray:
        below, above = self._ramps(np.asarray(x, dtype=float))
        return np.prod(smoothstep(np.minimum(below, above)), axis=-1)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = np.asarray(self.support_lower), np.asarray(self.support_upper)
        dlo, dhi = np.asarray(self.domain_lower), np.asarray(self.domain_upper)
        below, above = self._ramps(x)
        use_below = below <= above
        r = np.where(use_below, below, above)
        slope = np.where(use_below, 1.0 / (lo - dlo), -1.0 / (dhi - hi))
        factors = smoothstep(r)
        rates = smoothstep_rate(r) * slope
        return np.stack([rates[..., 0] * factors[..., 1], factors[..., 0] * rates[..., 1]], axis=-1)


SWEEP_SAMPLES = 64
CUTOFF_INSET = 0.05


def swept_cutoff(
    boundary: MovingBoundary,
    breakpoints: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    margin: float = 0.25,
) -> SmoothCutoff:
    """Cut-off equal to one on the padded box swept by the moving loops.

    The sweep is sampled uniformly over the time interval and at every
    breakpoint. The support is clamped to stay a small inset away from the
    artificial boundary [lower, upper].

    Raises:
        ConfigurationError: If nothing moves or the sweep reaches the inset.
    """
    if not boundary.moving.any():
        raise ConfigurationError("a swept cut-off needs at least one moving loop")
    lower, upper = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    breakpoints = np.asarray(breakpoints, dtype=float)
    times = np.union1d(np.linspace(breakpoints[0], breakpoints[-1], SWEEP_SAMPLES), breakpoints)
    swept = np.concatenate([boundary.vertex_positions(t)[boundary.moving] for t in times])
    inset = CUTOFF_INSET * (upper - lower)
    if np.any(swept.min(axis=0) <= lower + inset) or np.any(swept.max(axis=0) >= upper - inset):
        raise ConfigurationError("moving loops sweep too close to the artificial boundary for a cut-off")
    support_lower = np.maximum(swept.min(axis=0) - margin, lower + inset)
    support_upper = np.minimum(swept.max(axis=0) + margin, upper - inset)
    logger.debug(f"Cut-off support [{support_lower}, {support_upper}]")
    return SmoothCutoff(tuple(support_lower), tuple(support_upper), tuple(lower), tuple(upper))


def check_fixed_loops(cutoff: Optional[SmoothCutoff], boundary: MovingBoundary, tol: float = 1e-12) -> None:
    """Ensure a cut-off rigid displacement leaves every fixed loop in place.

    Raises:
        ConfigurationError: If a fixed vertex would be carried by the motion.
    """
    fixed = ~boundary.moving
    if not fixed.any() or not boundary.moving.any():
        return
    vertices = boundary.initial.vertices[fixed]
    weight = np.ones(len(vertices)) if cutoff is None else cutoff(vertices)
    if np.any(weight > tol):
        raise ConfigurationError(
            "prescribed deformation would move a fixed boundary loop; "
            "fixed loops must lie on the artificial boundary, otherwise use the elasticity extension"
        )
