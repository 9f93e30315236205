"""Configuration management for spacetime-agfem.

A run is described by a JSON document whose top-level keys are the blocks of
:class:`RunConfig`. Loading is strict: unknown keys, wrong types and values
out of range raise :class:`ConfigurationError` naming the dotted key path.
"""

import dataclasses
import json
import math
import os
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from .exceptions import ConfigurationError
from .models import DeformationMode, MotionKind, ProblemKind

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
GEOMETRY_SHAPES = ("square_hole", "gear", "file")


@dataclass
class GradingConfig:
    """Per-axis mesh grading; alpha = 1 keeps the mesh uniform."""

    x0: float = 0.5
    alpha: float = 1.0

    def validate(self, path: str) -> None:
        if not 0.0 < self.x0 < 1.0:
            raise ConfigurationError(f"{path}.x0: must lie in (0, 1), got {self.x0}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError(f"{path}.alpha: must lie in (0, 1], got {self.alpha}")


@dataclass
class MeshConfig:
    """Cartesian background mesh."""

    origin: tuple[float, float] = (0.0, 0.0)
    lengths: tuple[float, float] = (3.0, 3.0)
    counts: tuple[int, int] = (8, 8)
    grading: GradingConfig = field(default_factory=GradingConfig)
    simplexify: bool = False

    def validate(self, path: str) -> None:
        if min(self.counts) < 1:
            raise ConfigurationError(f"{path}.counts: every count must be at least 1, got {list(self.counts)}")
        if min(self.lengths) <= 0.0:
            raise ConfigurationError(f"{path}.lengths: must be positive, got {list(self.lengths)}")
        self.grading.validate(f"{path}.grading")

    @property
    def upper(self) -> tuple[float, float]:
        return (self.origin[0] + self.lengths[0], self.origin[1] + self.lengths[1])


@dataclass
class TimeConfig:
    """Time interval and its partition; give exactly one of ``slabs`` and ``tau``."""

    start: float = 0.0
    end: float = 1.0
    slabs: Optional[int] = 8
    tau: Optional[float] = None

    def validate(self, path: str) -> None:
        if self.end <= self.start:
            raise ConfigurationError(f"{path}.end: must exceed start {self.start}, got {self.end}")
        if (self.slabs is None) == (self.tau is None):
            raise ConfigurationError(f"{path}: give exactly one of 'slabs' and 'tau'")
        if self.slabs is not None and self.slabs < 1:
            raise ConfigurationError(f"{path}.slabs: need at least one slab, got {self.slabs}")
        if self.tau is not None and self.tau <= 0.0:
            raise ConfigurationError(f"{path}.tau: must be positive, got {self.tau}")


@dataclass
class ManufacturedConfig:
    """Parameters of the sine manufactured solution."""

    alpha: float = 0.5
    lengths: tuple[float, float] = (3.0, 3.0)

    def validate(self, path: str) -> None:
        if min(self.lengths) <= 0.0:
            raise ConfigurationError(f"{path}.lengths: must be positive, got {list(self.lengths)}")


@dataclass
class ProblemConfig:
    """Scalar problem data."""

    kind: str = ProblemKind.MANUFACTURED.value
    mu: float = 1.0
    advection: tuple[float, float] = (0.0, 0.0)
    manufactured: ManufacturedConfig = field(default_factory=ManufacturedConfig)
    bump_center: tuple[float, float] = (0.6, 1.5)
    bump_width: float = 0.2

    def validate(self, path: str) -> None:
        if self.kind not in ProblemKind.choices():
            raise ConfigurationError(f"{path}.kind: expected one of {ProblemKind.choices()}, got {self.kind!r}")
        if self.mu <= 0.0:
            raise ConfigurationError(f"{path}.mu: must be positive, got {self.mu}")
        if self.bump_width <= 0.0:
            raise ConfigurationError(f"{path}.bump_width: must be positive, got {self.bump_width}")
        self.manufactured.validate(f"{path}.manufactured")


@dataclass
class GeometryConfig:
    """Domain boundary: the box with a square hole, a gear-like hole, or a boundary file.

    The outer loop of the built-in shapes is the mesh box; ``moving_loops``
    defaults to every loop but the first when the boundary has several.
    """

    shape: str = "square_hole"
    boundary_file: Optional[str] = None
    hole_lower: tuple[float, float] = (1.0, 1.0)
    hole_upper: tuple[float, float] = (2.0, 2.0)
    gear_center: tuple[float, float] = (1.5, 1.5)
    gear_inner: float = 0.35
    gear_outer: float = 0.6
    gear_teeth: int = 6
    moving_loops: Optional[list[int]] = None

    def validate(self, path: str) -> None:
        if self.shape not in GEOMETRY_SHAPES:
            raise ConfigurationError(f"{path}.shape: expected one of {list(GEOMETRY_SHAPES)}, got {self.shape!r}")
        if self.shape == "file" and not self.boundary_file:
            raise ConfigurationError(f"{path}.boundary_file: required when shape is 'file'")
        if any(lo >= hi for lo, hi in zip(self.hole_lower, self.hole_upper)):
            raise ConfigurationError(f"{path}.hole_lower: must lie below hole_upper")
        if not 0.0 < self.gear_inner < self.gear_outer:
            raise ConfigurationError(f"{path}.gear_inner: need 0 < gear_inner < gear_outer")
        if self.gear_teeth < 3:
            raise ConfigurationError(f"{path}.gear_teeth: need at least 3 teeth, got {self.gear_teeth}")


@dataclass
class MotionConfig:
    """Catalog motion of the moving loops.

    ``cutoff_margin`` pads the swept bounding box of the moving loops to the
    region where the prescribed displacement is applied unattenuated.
    """

    kind: str = MotionKind.PRESCRIBED_TRANSLATION.value
    velocity: tuple[float, float] = (0.2, 0.0)
    center: tuple[float, float] = (1.5, 1.5)
    omega: float = math.pi / 2
    amplitude: tuple[float, float] = (0.0, 0.2)
    omega_x: float = math.pi / 2
    theta_max: float = math.pi / 10
    omega_theta: float = math.pi
    base: str = MotionKind.RIGID_ROTATION_OSCILLATION.value
    gamma: float = 2.0
    t_a: float = 0.125
    cutoff_margin: float = 0.25

    def validate(self, path: str) -> None:
        configurable = [k for k in MotionKind.choices() if k != MotionKind.CUSTOM.value]
        if self.kind not in configurable:
            raise ConfigurationError(f"{path}.kind: expected one of {configurable}, got {self.kind!r}")
        if self.base not in configurable or self.base == MotionKind.COMPOSED_WITH_TIME_RAMP.value:
            raise ConfigurationError(f"{path}.base: not a rampable motion: {self.base!r}")
        if self.gamma < 1.0 or self.t_a <= 0.0:
            raise ConfigurationError(f"{path}.gamma: the ramp needs gamma >= 1 and t_a > 0")
        if self.cutoff_margin <= 0.0:
            raise ConfigurationError(f"{path}.cutoff_margin: must be positive, got {self.cutoff_margin}")

    def params(self, kind: Optional[str] = None) -> dict[str, Any]:
        """Keyword parameters for the motion factory."""
        kind = kind or self.kind
        if kind == MotionKind.PRESCRIBED_TRANSLATION.value:
            return {"velocity": self.velocity}
        if kind == MotionKind.RIGID_ROTATION_OSCILLATION.value:
            return {"center": self.center, "omega": self.omega, "amplitude": self.amplitude, "omega_x": self.omega_x}
        if kind == MotionKind.PITCHING_ROTATION.value:
            return {"center": self.center, "theta_max": self.theta_max, "omega_theta": self.omega_theta}
        if kind == MotionKind.COMPOSED_WITH_TIME_RAMP.value:
            return {"base": self.base, "base_params": self.params(self.base), "gamma": self.gamma, "t_a": self.t_a}
        return {}


@dataclass
class DiscretizationConfig:
    """Orders, penalties and pipeline switches."""

    p: int = 1
    q: int = 1
    deformation: str = DeformationMode.PRESCRIBED.value
    geometry_order: int = 1
    geometry_time_order: int = 1
    nitsche_c0: float = 10.0
    extension_c0: float = 10.0
    lame: tuple[float, float] = (1.0, 1.0)
    c_mu: float = 1.0
    small_deformation_shortcut: bool = False
    transfer_skip_threshold: float = 0.8
    conditioning: bool = True
    max_dofs: int = 4000
    check_containment: bool = True

    def validate(self, path: str) -> None:
        if self.p < 1:
            raise ConfigurationError(f"{path}.p: spatial order must be at least 1, got {self.p}")
        if self.q < 0:
            raise ConfigurationError(f"{path}.q: temporal order must be non-negative, got {self.q}")
        if self.deformation not in DeformationMode.choices():
            raise ConfigurationError(
                f"{path}.deformation: expected one of {DeformationMode.choices()}, got {self.deformation!r}"
            )
        if self.geometry_order < 1 or self.geometry_time_order < 1:
            raise ConfigurationError(f"{path}.geometry_order: the map needs spatial and time order >= 1")
        if self.nitsche_c0 <= 0.0 or self.extension_c0 <= 0.0:
            raise ConfigurationError(f"{path}.nitsche_c0: penalties must be positive")
        if min(self.lame) <= 0.0:
            raise ConfigurationError(f"{path}.lame: Lame parameters must be positive, got {list(self.lame)}")
        if self.c_mu <= 0.0:
            raise ConfigurationError(f"{path}.c_mu: must be positive, got {self.c_mu}")
        if not 0.0 < self.transfer_skip_threshold < 1.0:
            raise ConfigurationError(f"{path}.transfer_skip_threshold: must lie in (0, 1)")
        if self.max_dofs < 1:
            raise ConfigurationError(f"{path}.max_dofs: must be positive, got {self.max_dofs}")


@dataclass
class OutputConfig:
    """Where and what to write."""

    directory: str = "output"
    vtk: bool = True
    matrix_market: bool = False
    log_file: bool = True
    log_level: str = "INFO"

    def validate(self, path: str) -> None:
        if self.log_level.upper() not in LOG_LEVELS:
            raise ConfigurationError(f"{path}.log_level: expected one of {list(LOG_LEVELS)}, got {self.log_level!r}")


@dataclass
class RunConfig:
    """Complete description of one run.

    The defaults reproduce the translating square hole in the box [0, 3]^2
    with the sine manufactured solution, p = q = 1 and n = 8.
    """

    mesh: MeshConfig = field(default_factory=MeshConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    motion: MotionConfig = field(default_factory=MotionConfig)
    discretization: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> "RunConfig":
        """Check every block and the cross-block rules.

        Raises:
            ConfigurationError: Naming the offending dotted key.
        """
        for block in dataclasses.fields(self):
            getattr(self, block.name).validate(block.name)
        if self.discretization.small_deformation_shortcut and not self.mesh.simplexify:
            raise ConfigurationError("discretization.small_deformation_shortcut: requires mesh.simplexify = true")
        return self

    @property
    def output_dir(self) -> Path:
        return Path(self.output.directory)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Build and validate a config from nested mappings.

        Raises:
            ConfigurationError: For unknown keys, wrong types or invalid values.
        """
        return _load(cls, data, "").validate()

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "RunConfig":
        """Load a JSON config file."""
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigurationError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
        return cls.from_dict(data)

    @classmethod
    def from_env(cls) -> "RunConfig":
        """Default config with environment overrides applied."""
        return cls().apply_env()

    def apply_env(self) -> "RunConfig":
        """Apply environment overrides in place.

        Environment variables:
            STAGFEM_OUTPUT_DIR: Output directory.
            STAGFEM_LOG_LEVEL: Logging level (DEBUG, INFO, WARNING, ERROR).

        Invalid values are ignored.

        Returns:
            This config.
        """
        if output_dir := os.environ.get("STAGFEM_OUTPUT_DIR"):
            self.output.directory = output_dir

        if log_level := os.environ.get("STAGFEM_LOG_LEVEL"):
            if log_level.upper() in LOG_LEVELS:
                self.output.log_level = log_level.upper()

        return self

    def to_dict(self) -> dict:
        """Resolved config as JSON-ready nested dicts."""
        return _jsonable(dataclasses.asdict(self))

    @classmethod
    def schema(cls) -> dict[str, str]:
        """Dotted key to type name for every accepted key."""
        table: dict[str, str] = {}
        _describe(cls, "", table)
        return table


def _hints(cls) -> dict[str, Any]:
    return typing.get_type_hints(cls)


def _is_optional(tp) -> tuple[bool, Any]:
    origin = typing.get_origin(tp)
    if origin in (Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1 and len(typing.get_args(tp)) == 2:
            return True, args[0]
    return False, tp


def _coerce(tp, value, path: str):
    optional, tp = _is_optional(tp)
    if value is None:
        if optional:
            return None
        raise ConfigurationError(f"{path}: may not be null")
    if dataclasses.is_dataclass(tp):
        return _load(tp, value, path)
    origin = typing.get_origin(tp)
    if origin in (tuple, list):
        if not isinstance(value, (list, tuple)):
            raise ConfigurationError(f"{path}: expected a list, got {type(value).__name__}")
        args = typing.get_args(tp)
        if origin is tuple:
            if len(value) != len(args):
                raise ConfigurationError(f"{path}: expected {len(args)} entries, got {len(value)}")
            return tuple(_coerce(a, v, f"{path}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
        return [_coerce(args[0], v, f"{path}[{i}]") for i, v in enumerate(value)]
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"{path}: expected true or false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{path}: expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"{path}: expected a string, got {value!r}")
        return value
    raise ConfigurationError(f"{path}: unsupported config type {tp}")


def _load(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path or 'config'}: expected an object, got {type(data).__name__}")
    hints = _hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigurationError(f"unknown config key {where}{unknown[0]}")
    values = {key: _coerce(hints[key], value, f"{path}.{key}" if path else key) for key, value in data.items()}
    return cls(**values)


def _describe(cls, path: str, table: dict[str, str]) -> None:
    for f in dataclasses.fields(cls):
        key = f"{path}.{f.name}" if path else f.name
        tp = _hints(cls)[f.name]
        if dataclasses.is_dataclass(tp):
            _describe(tp, key, table)
        else:
            table[key] = tp.__name__ if isinstance(tp, type) else str(tp).replace("typing.", "")


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
