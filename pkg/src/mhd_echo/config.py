"""Experiment configuration: per-command key schemas, TOML loading and validation."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .records import read_config_from_output


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


REQUIRED = object()


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # float, int, bool, str, floats, path
    default: Any = REQUIRED
    help: str = ""
    # runtime keys (output paths, worker counts) never enter the recorded config
    runtime: bool = False

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


def _phys(c_default=REQUIRED, c_help="wave amplitude c"):
    return [
        Key("alpha", "float", help="magnetic field strength alpha"),
        Key("kappa", "float", help="magnetic resistivity kappa"),
        Key("c", "float", c_default, c_help),
    ]


SCHEMAS: dict[str, list[Key]] = {
    "wave": [
        Key("alpha", "float", help="magnetic field strength alpha"),
        Key("kappa", "float", help="magnetic resistivity kappa"),
        Key("t_end", "float", help="final time"),
        Key("special", "bool", True, "start from the data normalised to (1, 0) at t0 = 4/beta"),
        Key("f0", "float", 1.0, "initial f when not using the special data"),
        Key("g0", "float", 0.0, "initial g when not using the special data"),
        Key("rtol", "float", 1e-10, "relative tolerance"),
        Key("out", "path", None, "trajectory CSV (t,f,g,energy)", runtime=True),
    ],
    "single-mode": [
        Key("k", "int", help="horizontal wavenumber k >= 1"),
        Key("xi", "float", help="vertical frequency xi > 0"),
        Key("alpha", "float", help="magnetic field strength alpha"),
        Key("kappa", "float", help="magnetic resistivity kappa"),
        Key("samples", "int", 16, "number of initial angles on the unit circle"),
        Key("t_end", "float", None, "final time (default xi/k + 10 (kappa k^2)^(-1/3))"),
        Key("w0", "float", 1.0, "initial w of the written trajectory"),
        Key("j0", "float", 0.0, "initial j of the written trajectory"),
        Key("rtol", "float", 1e-9, "relative tolerance"),
        Key("out", "path", None, "trajectory CSV (t,w,j,energy)", runtime=True),
        Key("summary", "path", None, "JSON summary {ratio, bound, pass}", runtime=True),
    ],
    "toy": [
        Key("k", "int", help="resonant mode k >= 2"),
        Key("xi", "float", help="vertical frequency xi"),
        *_phys(),
        Key("rtol", "float", 1e-9, "relative tolerance"),
        Key("out", "path", None, "JSON report", runtime=True),
    ],
    "chain": [
        Key("xi", "float", help="vertical frequency xi"),
        Key("k_start", "int", help="initially excited mode"),
        *_phys(),
        Key("k_max", "int", None, "truncation (default k_start + 20)"),
        Key("k_stop", "int", 1, "last interval to traverse"),
        Key("tail_threshold", "float", 1e-8, "tail-mass alarm threshold"),
        Key("tol", "float", 1e-8, "relative tolerance"),
        Key("weight", "str", "uniform", "spectral weight: uniform or sobolev"),
        Key("weight_s", "float", 0.0, "exponent s of the (1+k^2)^s weight"),
        Key("stop_at_lower_failure", "bool", False, "stop before the first interval violating the lower-bound hypotheses"),
        Key("out", "path", None, "per-interval CSV", runtime=True),
        Key("snapshots", "path", None, "JSON-lines snapshots at interval boundaries", runtime=True),
    ],
    "growth-factor": [
        Key("beta_grid", "floats", help="beta values"),
        Key("K_grid", "floats", help="effective dissipation values K"),
        Key("c", "float", None, "wave amplitude (default min((8 pi)^(-4/3) beta^(16/3), 1e-4) per beta)"),
        Key("grid", "int", 9, "number of start times tau in [-d, d]"),
        Key("rtol", "float", 1e-8, "relative tolerance"),
        Key("out", "path", None, "CSV table", runtime=True),
    ],
    "sweep": [
        *_phys(),
        Key("xi_grid", "floats", None, "explicit xi values"),
        Key("xi_min", "float", None, "smallest xi of a log-spaced grid"),
        Key("xi_max", "float", None, "largest xi of a log-spaced grid"),
        Key("n_xi", "int", None, "number of log-spaced xi values"),
        Key("k_start", "int", None, "initial mode (default: largest k with xi/k^2 >= 10/c)"),
        Key("k_max_pad", "int", 20, "k_max = k_start + k_max_pad"),
        Key("tail_threshold", "float", 1e-8, "tail-mass alarm threshold"),
        Key("tol", "float", 1e-8, "relative tolerance"),
        Key("weight", "str", "uniform", "spectral weight: uniform or sobolev"),
        Key("weight_s", "float", 0.0, "exponent s of the (1+k^2)^s weight"),
        Key("stop_at_lower_failure", "bool", True, "end each chain at the first mode violating the lower-bound hypotheses"),
        Key("workers", "int", 1, "worker processes", runtime=True),
        Key("out", "path", None, "per-xi CSV", runtime=True),
        Key("intervals", "path", None, "per-interval CSV over all xi", runtime=True),
        Key("summary", "path", None, "JSON summary with the sqrt(xi) fit", runtime=True),
    ],
    "analyze": [
        Key("inputs", "paths", help="chain or sweep CSV files", runtime=True),
        Key("out", "path", None, "fit JSON", runtime=True),
        Key("annotated", "path", None, "envelope-annotated CSV", runtime=True),
    ],
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    values: dict

    def __getitem__(self, name):
        return self.values[name]

    def recorded(self) -> dict:
        """Computational keys only, as written into output headers."""
        keys = {k.name for k in SCHEMAS[self.command] if not k.runtime}
        return {"command": self.command, **{k: v for k, v in self.values.items() if k in keys}}


def _flatten(doc: dict) -> dict:
    out = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            for k, v in _flatten(value).items():
                if k in out:
                    raise ConfigError(f"key {k!r} given twice")
                out[k] = v
        else:
            if key in out:
                raise ConfigError(f"key {key!r} given twice")
            out[key] = value
    return out


def load_config_file(path) -> dict:
    """Read a TOML file, or the recorded configuration of an earlier output file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix.lower() == ".toml":
        try:
            with open(path, "rb") as fh:
                return _flatten(tomllib.load(fh))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    try:
        return dict(read_config_from_output(path))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _coerce(key: Key, value):
    if value is None:
        return None
    try:
        if key.kind == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if key.kind == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if key.kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if key.kind in ("str", "path"):
            if not isinstance(value, str):
                raise TypeError
            return value
        if key.kind == "floats":
            return [float(v) for v in value]
        if key.kind == "paths":
            return [str(v) for v in value]
    except (TypeError, ValueError):
        pass
    raise ConfigError(f"{key.name}: expected {key.kind}, got {value!r}")


def resolve(command: str, file_values: dict | None, overrides: dict) -> ExperimentConfig:
    """Merge defaults, file values and flag overrides; reject unknown keys."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = {k.name: k for k in SCHEMAS[command]}
    merged: dict = {}
    for source in (file_values or {}), overrides:
        for name, value in source.items():
            if name == "command":
                if value != command:
                    raise ConfigError(f"config is for command {value!r}, not {command!r}")
                continue
            if name not in schema:
                raise ConfigError(f"unknown key {name!r} for command {command!r}")
            merged[name] = value
    values = {}
    for name, key in schema.items():
        if name in merged:
            values[name] = _coerce(key, merged[name])
        elif key.default is REQUIRED:
            raise ConfigError(f"missing required key {name!r} (flag {key.flag})")
        else:
            values[name] = key.default
    for name, key in schema.items():
        v = values[name]
        if key.kind == "float" and v is not None and not math.isfinite(v):
            raise ConfigError(f"{name} must be finite")
    return ExperimentConfig(command, values)


def check(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)

