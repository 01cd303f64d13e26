"""Run configuration: line-oriented ``key = value`` files with ``#`` comments."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

EXPERIMENTS = (
    "scalar_1d",
    "acoustic_1d_scatter",
    "plane_wave_2d",
    "convergence",
    "free_stream",
    "random_2d",
)

REQUIRED = ("degrees", "t_end")
ALIASES = {"degree": "degrees", "out": "out_dir", "tend": "t_end"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str = "scalar_1d"
    degrees: tuple[int, ...] = ()
    t_end: float | None = None
    cfl: float = 0.5
    cadence: int = 10
    out_dir: str = "out"
    seed: int = 0
    threads: int = 1
    boundary: str = "exact_dirichlet"
    verify: bool = False
    dump_field: bool = False
    exact_energy: bool = True
    energy_norm: str = "symmetrized"
    # mesh
    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0
    nx: int = 8
    ny: int = 8
    interface_x: float | None = 0.0
    # materials (scalar advection uses c as the wave speed)
    rho_left: float = 1.0
    c_left: float = 1.0
    rho_right: float = 1.0
    c_right: float = 1.0
    # incident wave packet
    amplitude: float = 1.0
    kx: float = 0.5
    ky: float = math.sqrt(1.5)
    omega: float = 4.0 * math.pi
    t0: float = 3.0
    cycles: float = 4.0
    normalize_k: bool = True
    transmission: str = "rh"
    # scalar pulse and discount weight
    pulse_center: float = -0.5
    pulse_width: float = 0.15
    alpha_c: float | None = None

    def validate(self) -> "RunConfig":
        for key in REQUIRED:
            if getattr(self, key) in ((), None):
                raise ConfigError(f"missing required key {key!r}")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if any(d < 1 for d in self.degrees):
            raise ConfigError(f"polynomial degrees must be >= 1, got {self.degrees}")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.cadence < 1 or self.threads < 1:
            raise ConfigError("cadence and threads must be >= 1")
        if self.nx < 1 or self.ny < 1:
            raise ConfigError("element counts must be >= 1")
        for key in ("rho_left", "c_left", "rho_right", "c_right"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"material parameter {key} must be positive")
        if self.boundary not in ("exact_dirichlet", "homogeneous_inflow"):
            raise ConfigError(f"unknown boundary mode {self.boundary!r}")
        if self.transmission not in ("rh", "printed"):
            raise ConfigError(f"unknown transmission rule {self.transmission!r}")
        if self.energy_norm not in ("symmetrized", "plain"):
            raise ConfigError(f"unknown energy norm {self.energy_norm!r}")
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _convert(name: str, raw: Any):
    if not isinstance(raw, str):
        if name == "degrees":
            return tuple(int(d) for d in (raw if isinstance(raw, (list, tuple)) else [raw]))
        return raw
    typ = str(_FIELDS[name].type)
    text = raw.strip()
    if name == "degrees":
        return tuple(int(p) for p in text.replace(",", " ").split())
    if "None" in typ and text.lower() == "none":
        return None
    if typ.startswith("bool"):
        return _parse_bool(text)
    if typ.startswith("int"):
        return int(text)
    if typ.startswith("float"):
        return float(text)
    return text


def _canonical(key: str) -> str:
    return ALIASES.get(key, key)


def read_config_lines(lines) -> dict:
    values = {}
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        name = _canonical(key)
        if name not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[name] = _convert(name, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {raw!r} ({exc})") from None
    return values


def parse_config(path: str | Path | None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Read ``path`` (if given), apply ``overrides`` (ignoring ``None``) and validate."""
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} not found")
        values = read_config_lines(p.read_text().splitlines())
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        name = _canonical(key)
        if name not in _FIELDS:
            raise ConfigError(f"unknown override {key!r}")
        try:
            values[name] = _convert(name, val)
        except ValueError as exc:
            raise ConfigError(f"bad override for {key!r}: {val!r} ({exc})") from None
    return RunConfig(**values).validate()
