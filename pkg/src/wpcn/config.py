"""Line-oriented ``key=value`` run configuration.

Keys are the snake_case field names of SystemParams, Geometry, ChannelSet,
SolverConfig and the sweep settings. Blank lines and ``#`` comments are
ignored. Explicit channel gains override the ones derived from geometry.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .channel import ChannelSet, Geometry, SystemParams
from .experiments import FIGURE_RANGES, SweepKind, SweepSpec
from .rates import Scheme
from .solver import SolverConfig


class ConfigError(ValueError):
    """Bad configuration file, key, value or command-line flag."""


def _field_names(cls) -> tuple[str, ...]:
    return tuple(f.name for f in dataclasses.fields(cls))


SYSTEM_KEYS = _field_names(SystemParams)
GEOMETRY_KEYS = _field_names(Geometry)
GAIN_KEYS = _field_names(ChannelSet)
SOLVER_KEYS = _field_names(SolverConfig)
SWEEP_KEYS = ("sweep_kind", "start", "stop", "num_points", "schemes")
ALL_KEYS = SYSTEM_KEYS + GEOMETRY_KEYS + GAIN_KEYS + SOLVER_KEYS + SWEEP_KEYS

_INT_KEYS = {"max_bisection_iters", "num_points"}
_BOOL_KEYS = {"refine_t1"}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(key: str, text: str):
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _BOOL_KEYS:
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if key == "sweep_kind":
            return SweepKind(text)
        if key == "schemes":
            return tuple(Scheme(tag.strip()) for tag in text.split(",") if tag.strip())
        return float(text)
    except ValueError:
        raise ConfigError(f"invalid value for '{key}': {text!r}") from None


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw ``key -> value`` strings from config text; later keys win."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in ALL_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown config key '{key}'")
        values[key] = value
    return values


def read_config(path: str | Path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


@dataclass(frozen=True)
class RunConfig:
    """Typed configuration: instance, solver settings and optional sweep."""

    params: SystemParams = field(default_factory=SystemParams)
    geometry: Geometry = field(default_factory=Geometry)
    gains: dict = field(default_factory=dict)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: dict = field(default_factory=dict)

    def channels(self) -> ChannelSet:
        """Geometry-derived gains with any explicit gains applied on top."""
        gains = dict(self.gains)
        if "h_xy" in gains and "h_yx" not in gains:
            gains["h_yx"] = gains["h_xy"]  # reciprocity
        return ChannelSet.from_geometry(self.geometry).with_gains(**gains)

    def explicit_channels(self) -> ChannelSet | None:
        return self.channels() if self.gains else None

    def sweep_spec(self, kind: SweepKind | None = None) -> SweepSpec:
        """Sweep built from the config; ``kind`` overrides ``sweep_kind``."""
        kind = kind or self.sweep.get("sweep_kind")
        if kind is None:
            raise ConfigError("sweep needs 'sweep_kind' in the config")
        start, stop = FIGURE_RANGES[kind]
        try:
            return SweepSpec(
                sweep_kind=kind,
                start=self.sweep.get("start", start),
                stop=self.sweep.get("stop", stop),
                num_points=self.sweep.get("num_points", 25),
                params=self.params,
                geometry=self.geometry,
                channels=self.explicit_channels(),
                schemes=self.sweep.get("schemes", tuple(Scheme)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def build_config(values: dict[str, str]) -> RunConfig:
    """Validate raw values and assemble a RunConfig."""
    typed = {}
    for key, text in values.items():
        if key not in ALL_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        typed[key] = _convert(key, text)

    def pick(keys):
        return {k: typed[k] for k in keys if k in typed}

    try:
        config = RunConfig(
            params=SystemParams(**pick(SYSTEM_KEYS)),
            geometry=Geometry(**pick(GEOMETRY_KEYS)),
            gains=pick(GAIN_KEYS),
            solver=SolverConfig(**pick(SOLVER_KEYS)),
            sweep=pick(SWEEP_KEYS),
        )
        config.channels()
        if not config.solver.t1_step < config.params.usable_time:
            raise ValueError(
                f"t1_step {config.solver.t1_step} must be below the usable time "
                f"{config.params.usable_time}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config
