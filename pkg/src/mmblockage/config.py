"""Config files, CLI units and parameter sweeps.

Config files are TOML. Top-level keys are :class:`SystemParams` field names
given in CLI units: BS and static-blockage densities per km^2, the
self-blockage angle in degrees, everything else as stored. Optional
``[sweep]`` and ``[sim]`` tables describe a sweep grid and simulation
settings; a ``[recipe]`` table is ignored here and read by the
figure-reproduction script.

Sweep axes are written ``name=min:max:count[:log]`` or ``name=v1,v2,...``
on the command line, and as tables or lists in a file.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from .params import PARAM_NAMES, ParameterError, SystemParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

# field -> (CLI units per SI unit)
_CLI_SCALE = {
    "bs_density_lambda_T": 1e6,
    "static_density_lambda_S": 1e6,
    "self_block_angle_omega": 180.0 / math.pi,
}
CLI_UNITS = {
    "bs_density_lambda_T": "BS/km^2",
    "static_density_lambda_S": "1/km^2",
    "self_block_angle_omega": "deg",
}


def to_si(name: str, value: float) -> float:
    if name not in PARAM_NAMES:
        raise ParameterError(f"unknown parameter {name!r}")
    return float(value) / _CLI_SCALE.get(name, 1.0)


def to_cli(name: str, value: float) -> float:
    if name not in PARAM_NAMES:
        raise ParameterError(f"unknown parameter {name!r}")
    scale = _CLI_SCALE.get(name)
    # trim the last-bit noise of the unit conversion (60 deg, not 59.99999999999999)
    return float(f"{float(value) * scale:.15g}") if scale else float(value)


def params_from_cli(values: dict[str, Any], base: SystemParams | None = None) -> SystemParams:
    """Build SystemParams from CLI-unit values; unknown keys are an error."""
    base = base or SystemParams()
    unknown = sorted(set(values) - set(PARAM_NAMES))
    if unknown:
        raise ParameterError(f"unknown parameter(s): {', '.join(unknown)}")
    changes = {}
    for name, value in values.items():
        try:
            changes[name] = to_si(name, float(value))
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"{name}: expected a number, got {value!r}") from exc
    return base.with_(**changes)


def params_to_cli(params: SystemParams) -> dict[str, float]:
    return {f.name: to_cli(f.name, getattr(params, f.name)) for f in fields(params)}


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]  # CLI units


@dataclass(frozen=True)
class SweepSpec:
    """A Cartesian grid over one or more parameter axes plus fixed overrides."""

    axes: tuple[Axis, ...] = ()
    fixed: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        for name in [a.name for a in self.axes] + [k for k, _ in self.fixed]:
            if name not in PARAM_NAMES:
                raise ParameterError(f"sweep: unknown parameter {name!r}")
        for a in self.axes:
            if len(a.values) < 1:
                raise ParameterError(f"sweep axis {a.name!r} needs at least one value")

    def __len__(self) -> int:
        return math.prod(len(a.values) for a in self.axes)

    def points(self, base: SystemParams) -> Iterator[tuple[dict[str, float], SystemParams]]:
        """Yield (CLI-unit axis values, params) in grid order, last axis fastest."""
        fixed = base.with_(**{k: to_si(k, v) for k, v in self.fixed}) if self.fixed else base
        for combo in itertools.product(*(a.values for a in self.axes)):
            point = dict(zip((a.name for a in self.axes), combo))
            yield point, params_from_cli(point, fixed) if point else fixed


def grid(lo: float, hi: float, count: int, scale: str = "lin") -> tuple[float, ...]:
    if count < 1:
        raise ParameterError(f"grid count must be >= 1, got {count}")
    if count == 1:
        return (float(lo),)
    if scale == "log":
        if not (lo > 0 and hi > 0):
            raise ParameterError("log grid needs positive bounds")
        return tuple(np.geomspace(lo, hi, count).tolist())
    if scale != "lin":
        raise ParameterError(f"grid scale must be 'lin' or 'log', got {scale!r}")
    return tuple(np.linspace(lo, hi, count).tolist())


def parse_axis(text: str) -> Axis:
    """Parse ``name=min:max:count[:lin|log]`` or ``name=v1,v2,...``."""
    name, sep, rhs = text.partition("=")
    if not sep:
        raise ParameterError(f"sweep axis {text!r}: expected name=...")
    name = name.strip()
    try:
        if ":" in rhs:
            parts = rhs.split(":")
            if len(parts) not in (3, 4):
                raise ValueError
            scale = parts[3] if len(parts) == 4 else "lin"
            return Axis(name, grid(float(parts[0]), float(parts[1]), int(parts[2]), scale))
        return Axis(name, tuple(float(v) for v in rhs.split(",")))
    except ValueError:
        raise ParameterError(f"sweep axis {text!r}: malformed values") from None


def _axis_from_table(name: str, spec: Any) -> Axis:
    if isinstance(spec, list):
        return Axis(name, tuple(float(v) for v in spec))
    if isinstance(spec, dict):
        try:
            return Axis(name, grid(spec["min"], spec["max"], int(spec["count"]), spec.get("scale", "lin")))
        except KeyError as exc:
            raise ParameterError(f"sweep axis {name!r}: missing {exc.args[0]!r}") from None
    return Axis(name, (float(spec),))


@dataclass(frozen=True)
class Config:
    params: SystemParams
    sweep: SweepSpec
    sim: dict
    recipe: dict = field(default_factory=dict)


def load_config(path: str | Path | None) -> Config:
    """Read a TOML config; ``None`` gives the defaults."""
    if path is None:
        return Config(SystemParams(), SweepSpec(), {})
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParameterError(f"{path}: {exc}") from None
    sweep_raw = raw.pop("sweep", {})
    sim = raw.pop("sim", {})
    recipe = raw.pop("recipe", {})
    params = params_from_cli(raw)
    axes = tuple(_axis_from_table(k, v) for k, v in sweep_raw.items())
    return Config(params, SweepSpec(axes), dict(sim), dict(recipe))
