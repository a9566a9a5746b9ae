"""Run configuration: an INI-style text file resolved into a frozen record.

Only ``d, a, a0, b, c, h0`` are required; every other field has a default.
The configuration hash is the SHA-256 of the canonical text, which lists
every resolved field as ``section.key = value`` in sorted order, so comments,
key order, whitespace and explicitly spelled-out defaults do not change it.
"""
from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .model import (
    ClimateProfile,
    ExpansionRate,
    InitialData,
    ModelParams,
    make_initial_bump,
    validate,
)
from .stefan import StefanNumerics, StefanProblem

REQUIRED = ("d", "a", "a0", "b", "c", "h0")

# field -> section of the config file
SECTIONS = {
    "d": "model", "a": "model", "a0": "model", "b": "model", "l0": "model",
    "c": "model", "h0": "model", "relaxed": "model",
    "climate": "climate",
    "mu_kind": "expansion", "mu_a0": "expansion", "mu_a": "expansion",
    "shape": "initial", "sigma": "initial",
    "n_grid": "numerics", "dt": "numerics", "t_max": "numerics", "record_every": "numerics",
    "snapshot_every": "numerics", "interior_margin": "numerics", "predictor_corrector": "numerics",
    "bvp_spacing": "numerics", "bvp_tol": "numerics", "speed_tol": "numerics", "shift_tol": "numerics",
    "eps_v": "classify", "eps_h": "classify", "decay_window": "classify", "gap_window": "classify",
    "sigma_lo": "classify", "sigma_hi": "classify", "sigma_cap": "classify", "threshold_rel_tol": "classify",
    "out_dir": "output",
}


class ConfigError(ValueError):
    """Missing, unknown or invalid configuration entries."""


@dataclass(frozen=True)
class RunConfig:
    d: float
    a: float
    a0: float
    b: float
    c: float
    h0: float
    l0: float = 1.0
    relaxed: bool = False
    climate: str = "linear"
    mu_kind: str = "affine"
    mu_a0: float = 0.5
    mu_a: float = 1.0
    shape: str = "cosine"
    sigma: float = 1.0
    n_grid: int = 8192
    dt: float = 0.01
    t_max: float = 200.0
    record_every: float = 1.0
    snapshot_every: float = 0.0
    interior_margin: float = 10.0
    predictor_corrector: bool = False
    bvp_spacing: float = 0.005
    bvp_tol: float = 1e-12
    speed_tol: float = 1e-10
    shift_tol: float = 1e-9
    eps_v: float = 1e-4
    eps_h: float = 1e-3
    decay_window: float = 0.5
    gap_window: float = 0.1
    sigma_lo: float = 1e-4
    sigma_hi: float = 10.0
    sigma_cap: float = 1e3
    threshold_rel_tol: float = 1e-2
    out_dir: str = "out"

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type in ("float", float):
                object.__setattr__(self, f.name, float(value))
            elif f.type in ("int", int):
                if float(value) != int(value):
                    raise ConfigError(f"{f.name} must be an integer (got {value!r})")
                object.__setattr__(self, f.name, int(value))
        if self.climate not in ("linear", "cubic"):
            raise ConfigError(f"climate must be 'linear' or 'cubic' (got {self.climate!r})")
        if self.mu_kind not in ("affine", "constant"):
            raise ConfigError(f"mu_kind must be 'affine' or 'constant' (got {self.mu_kind!r})")
        if not self.n_grid >= 8:
            raise ConfigError("n_grid must be at least 8")
        for name in ("dt", "t_max", "record_every", "sigma"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "RunConfig":
        unknown = sorted(set(values) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
        missing = [k for k in REQUIRED if k not in values]
        if missing:
            raise ConfigError(f"missing required field(s): {', '.join(missing)}")
        typed = {}
        for f in fields(cls):
            if f.name not in values:
                continue
            raw = values[f.name]
            typed[f.name] = _coerce(f.name, f.type, raw)
        return cls(**typed)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        values: dict[str, str] = {}
        for section in parser.sections():
            for key, raw in parser.items(section):
                expected = SECTIONS.get(key)
                if expected is None:
                    raise ConfigError(f"unknown field {section}.{key}")
                if expected != section:
                    raise ConfigError(f"field {key} belongs in section [{expected}], found in [{section}]")
                values[key] = raw
        return cls.from_mapping(values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.from_text(text)

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    # -- canonical form ---------------------------------------------------

    def canonical_text(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: (SECTIONS[f.name], f.name)):
            lines.append(f"{SECTIONS[f.name]}.{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def to_text(self) -> str:
        """A complete config file that reads back to an equal record."""
        order = list(dict.fromkeys(SECTIONS.values()))
        out = []
        current = None
        for f in sorted(fields(self), key=lambda f: order.index(SECTIONS[f.name])):
            section = SECTIONS[f.name]
            if section != current:
                out.append(f"\n[{section}]" if out else f"[{section}]")
                current = section
            out.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(out) + "\n"

    # -- model objects ----------------------------------------------------

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.d, self.a, self.a0, self.b, self.l0, self.c, self.h0, self.relaxed)

    @property
    def climate_profile(self) -> ClimateProfile:
        return ClimateProfile(self.params, self.climate)

    @property
    def mu(self) -> ExpansionRate:
        if self.mu_kind == "constant":
            return ExpansionRate.constant(self.mu_a, self.params)
        return ExpansionRate.affine_from_endpoints(self.mu_a0, self.mu_a, self.params)

    @property
    def u0(self) -> InitialData:
        return make_initial_bump(self.h0, self.sigma, self.shape)

    @property
    def problem(self) -> StefanProblem:
        return StefanProblem(self.params, self.climate_profile, self.mu, self.u0)

    @property
    def numerics(self) -> StefanNumerics:
        return StefanNumerics(
            n_grid=self.n_grid,
            dt=self.dt,
            predictor_corrector=self.predictor_corrector,
            record_every=self.record_every,
            snapshot_every=self.snapshot_every or None,
            interior_margin=self.interior_margin,
        )

    def validate(self) -> "RunConfig":
        """Raise :class:`ConfigError` listing every model violation."""
        try:
            report = validate(self.params, self.climate_profile, self.mu, self.u0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not report.ok:
            raise ConfigError("; ".join(report.messages()))
        return self


def _coerce(name: str, kind, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind in ("bool", bool):
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind in ("float", float):
            value = float(text)
            if not math.isfinite(value):
                raise ValueError(text)
            return value
        if kind in ("int", int):
            value = float(text)
            if not value.is_integer():
                raise ConfigError(f"field {name} must be an integer (got {raw!r})")
            return int(value)
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"field {name}: cannot parse {raw!r} as {kind}") from None
    return text


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_number(x: Optional[float]) -> str:
    """Fixed 12-significant-digit rendering used by every output file."""
    if x is None:
        return "nan"
    return f"{x:.12g}"
