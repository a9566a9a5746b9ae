"""Problem data for the shifting-climate free boundary problem.

The model is

    u_t = d u_xx + A(x - c t) u - b u^2,      0 < x < h(t),
    u_x(0, t) = u(h(t), t) = 0,
    h'(t) = -mu(A(h(t) - c t)) u_x(h(t), t),

with a growth profile ``A`` that equals ``a`` behind the climate edge and
``a0`` ahead of the transition zone ``[0, l0]``.  This module holds the
constants, the two coefficient functions and the initial data, together
with a report-valued validator.
"""
from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

STRICT = "strict"
RELAXED = "relaxed"


@dataclass(frozen=True)
class ModelParams:
    """Constants of one problem instance.

    ``relaxed=True`` admits ``a0 <= a`` (including the homogeneous case
    ``a0 == a``) and ``b == 0``; it exists for oracle and reduction tests.
    """

    d: float
    a: float
    a0: float
    b: float
    l0: float
    c: float
    h0: float
    relaxed: bool = False

    @property
    def mode(self) -> str:
        return RELAXED if self.relaxed else STRICT

    @property
    def carrying_capacity(self) -> float:
        return self.a / self.b

    @property
    def critical_length(self) -> float:
        """Range length beyond which vanishing is impossible."""
        return 0.5 * math.pi * math.sqrt(self.d / self.a)

    @property
    def kpp_speed(self) -> float:
        return 2.0 * math.sqrt(self.a * self.d)

    def replace(self, **changes) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **changes)

    def homogeneous(self) -> "ModelParams":
        """Same instance with the climate frozen at the favourable value."""
        return self.replace(a0=self.a, relaxed=True)


@dataclass(frozen=True)
class ClimateProfile:
    """Growth rate ``A(xi)`` with plateaus ``a`` (xi <= 0) and ``a0`` (xi >= l0).

    ``kind`` selects the transition: ``"linear"`` or ``"cubic"`` (smoothstep,
    C^1 at both ends).  Both are strictly monotone on ``[0, l0]`` whenever
    ``a0 != a``.
    """

    params: ModelParams
    kind: str = "linear"

    def __post_init__(self):
        if self.kind not in ("linear", "cubic"):
            raise ValueError(f"unknown climate transition kind {self.kind!r}")

    def __call__(self, xi):
        return eval_climate(self, xi)

    @property
    def lipschitz_constant(self) -> float:
        slope = abs(self.params.a - self.params.a0) / self.params.l0
        return slope if self.kind == "linear" else 1.5 * slope

    def describe(self) -> str:
        p = self.params
        return f"climate:{self.kind}:a={p.a!r}:a0={p.a0!r}:l0={p.l0!r}"


def eval_climate(profile: ClimateProfile, xi):
    """Evaluate ``A(xi)``; exact plateau values outside ``[0, l0]``."""
    p = profile.params
    if isinstance(xi, (float, int)):
        if xi <= 0.0:
            return float(p.a)
        if xi >= p.l0:
            return float(p.a0)
        s = xi / p.l0
        if profile.kind == "cubic":
            s = s * s * (3.0 - 2.0 * s)
        return p.a + (p.a0 - p.a) * s
    xi_arr = np.asarray(xi, dtype=float)
    s = np.clip(xi_arr / p.l0, 0.0, 1.0)
    if profile.kind == "cubic":
        s = s * s * (3.0 - 2.0 * s)
    out = p.a + (p.a0 - p.a) * s
    # keep the plateaus bit-exact
    out = np.where(xi_arr <= 0.0, p.a, np.where(xi_arr >= p.l0, p.a0, out))
    if np.ndim(xi) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ExpansionRate:
    """Front expansion coefficient ``mu(zeta) = mu0 + slope * (zeta - a0)``.

    ``a0`` and ``a`` delimit the admissible range of ``zeta``.  ``slope = 0``
    gives a constant coefficient.
    """

    mu0: float
    a0: float
    a: float
    slope: float = 0.0

    @classmethod
    def constant(cls, value: float, params: ModelParams) -> "ExpansionRate":
        return cls(mu0=value, a0=params.a0, a=params.a, slope=0.0)

    @classmethod
    def affine_from_endpoints(cls, mu_a0: float, mu_a: float, params: ModelParams) -> "ExpansionRate":
        span = params.a - params.a0
        slope = 0.0 if span == 0 else (mu_a - mu_a0) / span
        return cls(mu0=mu_a0, a0=params.a0, a=params.a, slope=slope)

    @property
    def at_favourable(self) -> float:
        return self.mu0 + self.slope * (self.a - self.a0)

    def __call__(self, zeta):
        return eval_mu(self, zeta)

    def frozen_at_favourable(self) -> "ExpansionRate":
        return ExpansionRate(mu0=self.at_favourable, a0=self.a, a=self.a, slope=0.0)

    def describe(self) -> str:
        return f"mu:affine:mu0={self.mu0!r}:slope={self.slope!r}:a0={self.a0!r}:a={self.a!r}"


def eval_mu(mu: ExpansionRate, zeta):
    """Evaluate ``mu(zeta)``; arguments outside ``[a0, a]`` are clamped with a warning."""
    lo, hi = min(mu.a0, mu.a), max(mu.a0, mu.a)
    if isinstance(zeta, (float, int)) and lo - 1e-12 <= zeta <= hi + 1e-12:
        return mu.mu0 + mu.slope * (min(max(zeta, lo), hi) - mu.a0)
    z = np.asarray(zeta, dtype=float)
    if np.any(z < lo - 1e-12) or np.any(z > hi + 1e-12):
        warnings.warn(f"mu evaluated outside [{lo}, {hi}]; clamping", RuntimeWarning, stacklevel=2)
    z = np.clip(z, lo, hi)
    out = mu.mu0 + mu.slope * (z - mu.a0)
    if np.ndim(zeta) == 0:
        return float(out)
    return out


_SHAPES: dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    "cosine": lambda x, h0: np.cos(0.5 * np.pi * x / h0),
    "parabola": lambda x, h0: 1.0 - (x / h0) ** 2,
}


@dataclass(frozen=True)
class InitialData:
    """Initial density on ``[0, h0]``.

    ``values`` are samples on the uniform grid ``x``.  When the data come
    from a shape family, ``shape`` and ``sigma`` are kept so that any other
    grid can be sampled exactly.
    """

    h0: float
    x: np.ndarray
    values: np.ndarray
    shape: Optional[str] = None
    sigma: Optional[float] = None

    def evaluate(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.shape is not None:
            out = self.sigma * _SHAPES[self.shape](xs, self.h0)
            out = np.where(xs >= self.h0, 0.0, np.maximum(out, 0.0))
            return out
        return np.interp(xs, self.x, self.values, right=0.0)

    @property
    def sup(self) -> float:
        return float(np.max(self.values))

    def scaled(self, factor: float) -> "InitialData":
        sigma = None if self.sigma is None else self.sigma * factor
        return InitialData(self.h0, self.x, self.values * factor, self.shape, sigma)

    def describe(self) -> str:
        if self.shape is not None:
            return f"u0:{self.shape}:h0={self.h0!r}:sigma={self.sigma!r}"
        digest = hashlib.sha256(np.ascontiguousarray(self.values, dtype=float).tobytes()).hexdigest()[:12]
        return f"u0:sampled:h0={self.h0!r}:n={self.values.size}:{digest}"


def make_initial_bump(h0: float, sigma: float, shape: str = "cosine", n: int = 1025) -> InitialData:
    """Build ``u0 = sigma * phi`` for a named shape family.

    ``"cosine"`` is ``cos(pi x / (2 h0))``; ``"parabola"`` is ``1 - (x/h0)^2``.
    Both satisfy the no-flux and Dirichlet conditions exactly.
    """
    if shape not in _SHAPES:
        raise ValueError(f"unknown initial shape family {shape!r}; known: {sorted(_SHAPES)}")
    if not sigma > 0:
        raise ValueError("sigma must be positive (u0 > 0 on [0, h0) is required)")
    if not h0 > 0:
        raise ValueError("h0 must be positive")
    x = np.linspace(0.0, h0, n)
    values = sigma * _SHAPES[shape](x, h0)
    values[-1] = 0.0
    return InitialData(h0=h0, x=x, values=values, shape=shape, sigma=float(sigma))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    location: Optional[float] = None


@dataclass
class ValidationReport:
    mode: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, message: str, location: Optional[float] = None) -> None:
        self.violations.append(Violation(code, message, location))

    def messages(self) -> list[str]:
        return [v.message for v in self.violations]


# derivative tolerance, in units of max|u0| per grid step
DERIVATIVE_TOL = 1e-6


def validate(
    params: ModelParams,
    profile: Optional[ClimateProfile] = None,
    mu: Optional[ExpansionRate] = None,
    u0: Optional[InitialData] = None,
) -> ValidationReport:
    """Check every invariant of the problem data; never raises."""
    rep = ValidationReport(mode=params.mode)
    p = params
    for name in ("d", "l0", "c", "h0"):
        if not getattr(p, name) > 0:
            rep.add(f"{name}_positive", f"{name} must be positive (got {getattr(p, name)})")
    if p.relaxed:
        if not p.a >= 0:
            rep.add("a_nonnegative", f"relaxed mode requires a >= 0 (got {p.a})")
        if not p.b >= 0:
            rep.add("b_nonnegative", f"relaxed mode requires b >= 0 (got {p.b})")
        if not p.a0 <= p.a:
            rep.add("a0_le_a", f"relaxed mode requires a0 <= a (got a0={p.a0}, a={p.a})")
    else:
        if not p.b > 0:
            rep.add("b_positive", f"b must be positive (got {p.b})")
        if not p.a > 0:
            rep.add("a_positive", f"strict mode requires a > 0 (got {p.a})")
        if not p.a0 < 0:
            rep.add("a0_negative", f"strict mode requires a0 < 0 < a (got a0={p.a0})")

    if profile is not None and profile.params != params:
        rep.add("profile_params", "climate profile was built for different parameters")

    if mu is not None:
        if not mu.mu0 > 0:
            rep.add("mu_positive", f"mu(a0) must be positive (got {mu.mu0})")
        if mu.slope < 0:
            rep.add("mu_monotone", f"mu must be nondecreasing (slope {mu.slope} < 0)")
        if (mu.a0, mu.a) != (p.a0, p.a):
            rep.add("mu_range", f"mu defined on [{mu.a0}, {mu.a}] but climate spans [{p.a0}, {p.a}]")

    if u0 is not None:
        _validate_initial(rep, params, u0)
    return rep


def _validate_initial(rep: ValidationReport, params: ModelParams, u0: InitialData) -> None:
    x, v = np.asarray(u0.x, float), np.asarray(u0.values, float)
    if x.size < 3 or v.shape != x.shape:
        rep.add("u0_grid", "initial data needs at least three samples on a matching grid")
        return
    if abs(u0.h0 - params.h0) > 1e-12 * max(1.0, params.h0):
        rep.add("u0_h0", f"initial data defined on [0, {u0.h0}] but h0 = {params.h0}")
    if not np.all(np.isfinite(v)):
        rep.add("u0_finite", "initial data contain non-finite values")
        return
    dx = x[1] - x[0]
    scale = max(float(np.max(np.abs(v))), np.finfo(float).tiny)
    if v[-1] != 0.0:
        rep.add("u0_dirichlet", f"u0(h0) != 0 (got {v[-1]})", float(x[-1]))
    bad = np.flatnonzero(v[:-1] <= 0.0)
    if bad.size:
        rep.add("u0_positive", f"u0 must be positive on [0, h0); fails at {bad.size} points", float(x[bad[0]]))
    slope0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx)
    if abs(slope0) * dx > DERIVATIVE_TOL * scale:
        rep.add("u0_noflux", f"u0'(0) != 0 (one-sided estimate {slope0:.3e})", 0.0)
    slope_end = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dx)
    if not slope_end * dx < -DERIVATIVE_TOL * scale:
        rep.add("u0_front_slope", f"u0'(h0) must be negative (one-sided estimate {slope_end:.3e})", float(x[-1]))
