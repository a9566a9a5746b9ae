"""Logistic two-point boundary value problems.

Solves

    -d v'' - c v' = kappa(x) v - b v^2,   xl < x < xr,
    v(xl) = left_value,  v(xr) = right_value,

with centred second-order differences on a uniform grid.  The nonlinear
system is solved by Newton's method globalised with pseudo-transient
continuation: each iterate solves ``(I/tau - J) dv = F(v)`` with a
tridiagonal Jacobian, and ``tau`` grows as the residual falls.  The
positive solution is the stable steady state of the associated parabolic
flow, so starting from a positive iterate the iteration follows that flow
until Newton takes over.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError, SolverError, TrivialBranchError
from .model import ModelParams

Coefficient = Union[float, Callable[[np.ndarray], np.ndarray]]

#: Default grid spacing for semi-infinite truncations, in units of sqrt(d/a).
SPACING = 0.005
#: Starting truncation radius, in units of sqrt(d/a).
START_RADIUS = 20.0


@dataclass(frozen=True)
class Shifted:
    """Coefficient ``x -> profile(x - shift)``."""

    profile: Callable
    shift: float = 0.0

    def __call__(self, x):
        return self.profile(np.asarray(x, dtype=float) - self.shift)

    def describe(self) -> str:
        inner = getattr(self.profile, "describe", lambda: repr(self.profile))()
        return f"{inner}:shift={self.shift!r}"


@dataclass(frozen=True)
class BvpSpec:
    xl: float
    xr: float
    left_value: float
    right_value: float
    c: float
    d: float
    b: float
    coefficient: Coefficient

    def __post_init__(self):
        if not self.xl < self.xr:
            raise ValueError(f"empty interval [{self.xl}, {self.xr}]")
        if self.left_value < 0 or self.right_value < 0:
            raise ValueError("boundary values must be nonnegative")
        if not self.d > 0:
            raise ValueError("d must be positive")

    def kappa(self, x: np.ndarray) -> np.ndarray:
        if callable(self.coefficient):
            return np.broadcast_to(np.asarray(self.coefficient(x), dtype=float), np.shape(x)).copy()
        return np.full(np.shape(x), float(self.coefficient))

    def describe(self) -> str:
        coef = self.coefficient
        if callable(coef):
            coef = getattr(coef, "describe", lambda: repr(coef))()
        return (
            f"bvp:[{self.xl!r},{self.xr!r}]:bc=({self.left_value!r},{self.right_value!r})"
            f":c={self.c!r}:d={self.d!r}:b={self.b!r}:kappa={coef}"
        )

    def digest(self) -> str:
        return hashlib.sha256(self.describe().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Profile:
    x: np.ndarray
    v: np.ndarray
    spec_digest: str = ""
    iterations: int = 0
    residual: float = 0.0
    branch: str = "positive"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    def __call__(self, xs, left=None, right=None):
        return np.interp(xs, self.x, self.v, left=left, right=right)


def _operators(spec: BvpSpec, n: int):
    x = np.linspace(spec.xl, spec.xr, n)
    hx = x[1] - x[0]
    diff = spec.d / hx**2
    lo = diff - spec.c / (2.0 * hx)
    up = diff + spec.c / (2.0 * hx)
    return x, hx, diff, lo, up


def residual(spec: BvpSpec, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Interior residual ``d v'' + c v' + kappa v - b v^2`` of the discrete system."""
    hx = x[1] - x[0]
    k = spec.kappa(x[1:-1])
    vi = v[1:-1]
    return (
        spec.d * (v[2:] - 2.0 * vi + v[:-2]) / hx**2
        + spec.c * (v[2:] - v[:-2]) / (2.0 * hx)
        + k * vi
        - spec.b * vi**2
    )


def initial_iterate(spec: BvpSpec, x: np.ndarray) -> np.ndarray:
    """Linear interpolation of the boundary values, lifted to a positive bump.

    The bump has the height of the largest equilibrium ``max(kappa)/b``, so the
    iterate lies below the constant supersolution and away from zero.
    """
    k = spec.kappa(x)
    level = max(spec.left_value, spec.right_value)
    if spec.b > 0:
        level = max(level, float(np.max(k)) / spec.b)
    s = (x - spec.xl) / (spec.xr - spec.xl)
    v = spec.left_value + (spec.right_value - spec.left_value) * s
    floor = level * np.sin(np.pi * s)
    v = np.maximum(v, floor)
    v[0], v[-1] = spec.left_value, spec.right_value
    return v


def solve_logistic_bvp(
    spec: BvpSpec,
    n: int,
    tol: float = 1e-12,
    max_iter: int = 500,
    allow_trivial: bool = False,
    initial: Optional[np.ndarray] = None,
) -> Profile:
    """Solve the logistic BVP on ``n`` uniform points.

    The reported residual is ``max |F| * dx^2 / (2 d)``: the discrete
    residual measured in density units, which is what round-off limits.
    Convergence means this residual is at most ``tol`` times the density
    scale of the problem.

    Raises
    ------
    ConvergenceError
        No convergence within ``max_iter`` iterations.
    TrivialBranchError
        The iteration collapsed onto the zero solution and ``allow_trivial``
        is false (interval too short for a positive solution).
    """
    if n < 16:
        raise ValueError("n must be at least 16")
    x, hx, diff, lo, up = _operators(spec, n)
    k = spec.kappa(x[1:-1])
    level = max(spec.left_value, spec.right_value, float(np.max(np.abs(k))) / spec.b if spec.b > 0 else 0.0, 1e-300)
    scale = hx**2 / (2.0 * spec.d)
    v = initial_iterate(spec, x) if initial is None else np.array(initial, dtype=float)
    v[0], v[-1] = spec.left_value, spec.right_value

    m = n - 2
    ab = np.zeros((3, m))
    ab[0, 1:] = -up
    ab[2, :-1] = -lo
    rate = float(np.max(np.abs(k))) + spec.b * level + 1e-12
    tau = 1.0 / rate
    F = residual(spec, x, v)
    fnorm = float(np.max(np.abs(F)))
    it = 0
    for it in range(1, max_iter + 1):
        if fnorm * scale <= tol * level:
            break
        ab[1] = 1.0 / tau + 2.0 * diff - k + 2.0 * spec.b * v[1:-1]
        try:
            dv = solve_banded((1, 1), ab, F, check_finite=False)
        except np.linalg.LinAlgError:
            tau *= 0.1
            continue
        trial = v.copy()
        trial[1:-1] += dv
        Ft = residual(spec, x, trial)
        tnorm = float(np.max(np.abs(Ft)))
        if not np.isfinite(tnorm) or tnorm > 10.0 * fnorm + 1e-300:
            tau *= 0.1
            if tau * rate < 1e-12:
                raise ConvergenceError("pseudo-time step collapsed", fnorm * scale, it)
            continue
        growth = fnorm / tnorm if tnorm > 0 else 10.0
        tau *= min(max(growth, 0.5), 10.0)
        v, F, fnorm = trial, Ft, tnorm
    else:
        if fnorm * scale > tol * level:
            raise ConvergenceError(
                f"no convergence after {max_iter} iterations (residual {fnorm * scale:.3e})",
                fnorm * scale,
                max_iter,
            )

    zero_data = spec.left_value == 0 and spec.right_value == 0
    if zero_data and float(np.max(v)) < 0.05 * level:
        # small iterate: undamped Newton separates a small positive solution from zero
        for _ in range(30):
            ab[1] = 2.0 * diff - k + 2.0 * spec.b * v[1:-1]
            v[1:-1] += solve_banded((1, 1), ab, F, check_finite=False)
            F = residual(spec, x, v)
            fnorm = float(np.max(np.abs(F)))
            if float(np.max(np.abs(v))) < 1e-12 * level:
                break

    branch = "positive"
    vmax = float(np.max(v[1:-1])) if m else 0.0
    if vmax < 1e-6 * level and spec.left_value == 0 and spec.right_value == 0:
        branch = "trivial"
        if not allow_trivial:
            raise TrivialBranchError(f"iteration converged to the zero solution on [{spec.xl}, {spec.xr}]")
    if float(np.min(v)) < -1e-8 * level:
        raise SolverError(f"converged to a sign-changing solution (min {np.min(v):.3e})")
    return Profile(x=x, v=v, spec_digest=spec.digest(), iterations=it, residual=fnorm * scale, branch=branch)


def derivative_at_right(p: Profile) -> float:
    """Second-order one-sided estimate of ``v'(xr)``."""
    if p.v.size < 4:
        raise ValueError("need at least four grid points")
    hx = p.x[-1] - p.x[-2]
    return float((3.0 * p.v[-1] - 4.0 * p.v[-2] + p.v[-3]) / (2.0 * hx))


def default_spacing(params: ModelParams, spacing: float = SPACING) -> float:
    return spacing * math.sqrt(params.d / params.a)


def grid_points(length: float, dx: float) -> int:
    return max(16, int(round(length / dx)) + 1)


def plateau_spec(params: ModelParams, c: float, X: float, xr: float = 0.0, coefficient: Coefficient | None = None) -> BvpSpec:
    """Problem on ``[min(xr, 0) - X, xr]`` with plateau value ``a/b`` on the left and 0 on the right."""
    coef = params.a if coefficient is None else coefficient
    return BvpSpec(
        xl=min(xr, 0.0) - X,
        xr=xr,
        left_value=params.a / params.b,
        right_value=0.0,
        c=c,
        d=params.d,
        b=params.b,
        coefficient=coef,
    )


def slope_scale(params: ModelParams) -> float:
    """Natural slope unit ``(a/b) sqrt(a/d)``."""
    return params.a / params.b * math.sqrt(params.a / params.d)


def left_truncation_radius(
    params: ModelParams,
    c: float,
    tol: float = 1e-6,
    spacing: float = SPACING,
    cap: float = 2.0**12,
) -> float:
    """Smallest radius on the doubling ladder whose semi-wave slope is stable under doubling.

    Starting at ``20 sqrt(d/a)``, ``X`` doubles until the slope at 0 of the
    semi-wave truncated at ``-X`` and at ``-2X`` differ by less than
    ``tol`` (measured in units of ``(a/b) sqrt(a/d)``).  The grid spacing is
    held fixed across the ladder.
    """
    if not c > 0 or not tol > 0:
        raise ValueError("need c > 0 and tol > 0")
    unit = math.sqrt(params.d / params.a)
    dx = spacing * unit
    X = START_RADIUS * unit
    ref = slope_scale(params)
    prev = derivative_at_right(solve_logistic_bvp(plateau_spec(params, c, X), grid_points(X, dx)))
    while X <= cap * unit:
        nxt = derivative_at_right(solve_logistic_bvp(plateau_spec(params, c, 2 * X), grid_points(2 * X, dx)))
        if abs(nxt - prev) < tol * ref:
            return X
        X, prev = 2 * X, nxt
    raise SolverError(f"truncation radius exceeded cap {cap} sqrt(d/a) for c={c}")


def write_profile_csv(path: Union[str, Path], profile: Profile, header: Optional[dict] = None) -> Path:
    path = Path(path)
    lines = [f"# spec_hash={profile.spec_digest}", f"# residual={profile.residual:.12g}", f"# branch={profile.branch}"]
    for key, value in (header or {}).items():
        lines.append(f"# {key}={value}")
    lines.append("x,v")
    lines += [f"{xi:.12g},{vi:.12g}" for xi, vi in zip(profile.x, profile.v)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_profile_csv(path: Union[str, Path]) -> Profile:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line and line != "x,v":
            xs, vs = line.split(",")
            rows.append((float(xs), float(vs)))
    arr = np.array(rows)
    return Profile(
        x=arr[:, 0],
        v=arr[:, 1],
        spec_digest=meta.pop("spec_hash", ""),
        residual=float(meta.pop("residual", "nan")),
        branch=meta.pop("branch", "positive"),
        meta=meta,
    )
