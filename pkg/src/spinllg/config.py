"""Line-oriented ``key = value`` run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Optional

from .core import ModelParams
from .semiclassical import IntegratorConfig

MODES = ("simulate", "oracle", "compare", "sweep", "analyze")

_MODEL_KEYS = ("J", "eta", "omega_c", "eps", "h")
_INTEGRATOR_KEYS = ("t_end", "dt_init", "dt_max", "rel_tol", "abs_tol", "sample_interval")
_STATE_KEYS = ("a", "b")
SWEEPABLE = _MODEL_KEYS + _INTEGRATOR_KEYS + _STATE_KEYS
KEYS = SWEEPABLE + ("n_modes", "n_max", "sweep_key", "sweep_values")


class ConfigError(ValueError):
    def __init__(self, message: str, where: Optional[str] = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class RunSpec:
    mode: str = "simulate"
    params: ModelParams = field(default_factory=ModelParams)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    a: float = 0.7
    b: float = 0.3
    n_modes: int = 2
    n_max: int = 1
    sweep_key: Optional[str] = None
    sweep_values: tuple[float, ...] = ()
    out_dir: Path = Path(".")

    def with_value(self, key: str, value: float) -> "RunSpec":
        """Copy with one sweepable parameter replaced."""
        if key in _MODEL_KEYS:
            return replace(self, params=replace(self.params, **{key: value}))
        if key in _INTEGRATOR_KEYS:
            return replace(self, integrator=replace(self.integrator, **{key: value}))
        if key in _STATE_KEYS:
            return replace(self, **{key: value})
        raise KeyError(key)


def _finite(v):
    return math.isfinite(v)


_RANGES = {
    "J": (lambda v: _finite(v) and v >= 0, "must be >= 0"),
    "eta": (lambda v: _finite(v) and v >= 0, "must be >= 0"),
    "omega_c": (lambda v: _finite(v) and v > 0, "must be > 0"),
    "eps": (_finite, "must be finite"),
    "h": (_finite, "must be finite"),
    "a": (lambda v: 0 < v < 1, "must lie strictly inside (0, 1)"),
    "b": (lambda v: 0 < v < 1, "must lie strictly inside (0, 1)"),
}
for _k in _INTEGRATOR_KEYS:
    _RANGES[_k] = (lambda v: _finite(v) and v > 0, "must be > 0")


def _parse_value(key: str, raw: str, where: str):
    if key in ("n_modes", "n_max"):
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{key} needs an integer, got {raw!r}", where) from None
        if value < 0:
            raise ConfigError(f"{key} must be >= 0, got {value}", where)
        return value
    if key == "sweep_key":
        if raw not in SWEEPABLE:
            raise ConfigError(f"sweep_key must be one of {', '.join(SWEEPABLE)}; got {raw!r}",
                              where)
        return raw
    if key == "sweep_values":
        try:
            values = tuple(float(x) for x in raw.split(",") if x.strip())
        except ValueError:
            raise ConfigError(f"sweep_values needs comma-separated numbers, got {raw!r}",
                              where) from None
        if not values or not all(math.isfinite(v) for v in values):
            raise ConfigError("sweep_values must be a non-empty list of finite numbers", where)
        return values
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key} needs a number, got {raw!r}", where) from None
    check, msg = _RANGES[key]
    if not check(value):
        raise ConfigError(f"{key} {msg}, got {value}", where)
    return value


def _parse_lines(lines: Iterable[tuple[str, str]], values: dict, allow_repeat: bool):
    seen = {}
    for where, line in lines:
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"expected 'key = value', got {text!r}", where)
        key, raw = (s.strip() for s in text.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", where)
        if not raw:
            raise ConfigError(f"missing value for {key!r}", where)
        if key in seen and not allow_repeat:
            raise ConfigError(f"duplicate key {key!r} (first set at {seen[key]})", where)
        seen[key] = where
        values[key] = _parse_value(key, raw, where)


def parse_config(text: str, mode: str = "simulate", out_dir=Path("."),
                 overrides: Iterable[str] = ()) -> RunSpec:
    """Build a RunSpec from config text plus ``key=value`` overrides.

    Missing keys take the defaults of ``RunSpec``.  Unknown keys, malformed
    lines and out-of-range values raise ConfigError naming the line.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}; got {mode!r}")
    values: dict = {}
    _parse_lines(((f"line {i}", ln) for i, ln in enumerate(text.splitlines(), 1)),
                 values, allow_repeat=False)
    _parse_lines(((f"--set #{i}", ov) for i, ov in enumerate(overrides, 1)),
                 values, allow_repeat=True)

    try:
        params = ModelParams(**{k: values[k] for k in _MODEL_KEYS if k in values})
        integrator = IntegratorConfig(
            **{k: values[k] for k in _INTEGRATOR_KEYS if k in values})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    spec = RunSpec(
        mode=mode, params=params, integrator=integrator,
        **{k: values[k] for k in ("a", "b", "n_modes", "n_max", "sweep_key", "sweep_values")
           if k in values},
        out_dir=Path(out_dir),
    )
    if mode == "sweep":
        if spec.sweep_key is None or not spec.sweep_values:
            raise ConfigError("sweep mode needs sweep_key and sweep_values")
        for v in spec.sweep_values:
            try:
                _parse_value(spec.sweep_key, repr(v), "sweep_values")
                spec.with_value(spec.sweep_key, v)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    return spec


def emit_config(spec: RunSpec) -> str:
    """Config text that parses back to ``spec`` (mode and out_dir excluded)."""
    lines = []
    for f in fields(spec.params):
        lines.append(f"{f.name} = {getattr(spec.params, f.name)!r}")
    for f in fields(spec.integrator):
        value = getattr(spec.integrator, f.name)
        if value is not None:
            lines.append(f"{f.name} = {value!r}")
    lines += [f"a = {spec.a!r}", f"b = {spec.b!r}",
              f"n_modes = {spec.n_modes}", f"n_max = {spec.n_max}"]
    if spec.sweep_key is not None:
        lines.append(f"sweep_key = {spec.sweep_key}")
    if spec.sweep_values:
        lines.append("sweep_values = " + ", ".join(repr(v) for v in spec.sweep_values))
    return "\n".join(lines) + "\n"
