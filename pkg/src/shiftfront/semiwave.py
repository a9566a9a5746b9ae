"""Constant-coefficient semi-waves and the critical spreading speed.

A semi-wave with speed ``c`` solves ``d q'' + c q' + a q - b q^2 = 0`` on
``(-inf, 0)`` with ``q(-inf) = a/b`` and ``q(0) = 0``.  The critical speed
``c0`` is the root of ``f(c) = -mu(a) q_c'(0) - c`` in ``(0, 2 sqrt(a d))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bvp
from .errors import PreconditionError, SolverError
from .model import ExpansionRate, ModelParams


@dataclass(frozen=True)
class SemiWave:
    c: float
    x: np.ndarray
    v: np.ndarray
    slope0: float
    X: float
    residual: float
    spec_digest: str = ""

    @property
    def profile(self) -> bvp.Profile:
        return bvp.Profile(self.x, self.v, self.spec_digest, residual=self.residual)

    def __call__(self, xs):
        """Evaluate with the plateau value to the left and zero to the right."""
        return np.interp(xs, self.x, self.v, left=self.v[0], right=0.0)


def solve_semiwave(
    c: float,
    params: ModelParams,
    tol: float = 1e-12,
    X: Optional[float] = None,
    truncation_tol: float = 1e-6,
    spacing: float = bvp.SPACING,
) -> SemiWave:
    """Semi-wave with speed ``c`` truncated to ``[-X, 0]``.

    ``X`` defaults to :func:`bvp.left_truncation_radius`.  The grid holds
    ``X / (spacing sqrt(d/a))`` intervals.
    """
    if not 0 < c < params.kpp_speed:
        raise PreconditionError(f"semi-wave speed must lie in (0, {params.kpp_speed}); got {c}")
    if X is None:
        X = bvp.left_truncation_radius(params, c, truncation_tol, spacing)
    spec = bvp.plateau_spec(params, c, X)
    n = bvp.grid_points(X, bvp.default_spacing(params, spacing))
    prof = bvp.solve_logistic_bvp(spec, n, tol=tol)
    if np.any(np.diff(prof.v) > 1e-10 * params.carrying_capacity):
        raise SolverError(f"semi-wave for c={c} is not monotone decreasing")
    return SemiWave(
        c=c,
        x=prof.x,
        v=prof.v,
        slope0=bvp.derivative_at_right(prof),
        X=X,
        residual=prof.residual,
        spec_digest=prof.spec_digest,
    )


@dataclass(frozen=True)
class CriticalSpeed:
    c0: float
    residual: float
    iterations: int
    X: float
    wave: SemiWave
    scan: tuple


def speed_mismatch(c: float, params: ModelParams, mu_a: float, X: float, spacing: float = bvp.SPACING) -> float:
    """``f(c) = -mu(a) q_c'(0) - c`` on a fixed truncation."""
    return -mu_a * solve_semiwave(c, params, X=X, spacing=spacing).slope0 - c


def critical_speed(
    params: ModelParams,
    mu: ExpansionRate,
    tol: float = 1e-10,
    truncation_tol: float = 1e-6,
    spacing: float = bvp.SPACING,
    max_iter: int = 60,
) -> CriticalSpeed:
    """Bisection for ``c0`` with a residual certificate ``|f(c0)| <= tol * 2 sqrt(a d)``.

    A pre-flight scan over eight speeds inside ``(0, 2 sqrt(a d))`` checks that
    ``f`` is strictly decreasing and supplies the bisection bracket.  All
    evaluations share one truncation radius (the largest certified over the
    scan), which keeps ``f`` continuous in ``c``.
    """
    if not params.a > 0 or not params.b > 0:
        raise PreconditionError("critical speed needs a > 0 and b > 0")
    mu_a = mu.at_favourable
    K = params.kpp_speed
    speeds = [K * k / 9.0 for k in range(1, 9)]
    X = max(bvp.left_truncation_radius(params, s, truncation_tol, spacing) for s in speeds)
    values = [speed_mismatch(s, params, mu_a, X, spacing) for s in speeds]
    for (s1, f1), (s2, f2) in zip(zip(speeds, values), zip(speeds[1:], values[1:])):
        if not f2 < f1:
            raise SolverError(f"f(c) not strictly decreasing between c={s1} (f={f1}) and c={s2} (f={f2})")
    scan = tuple(zip(speeds, values))

    first_negative = next((i for i, f in enumerate(values) if f < 0), None)
    if first_negative == 0:
        lo, hi = 1e-6 * K, speeds[0]
        flo, fhi = speed_mismatch(lo, params, mu_a, X, spacing), values[0]
    elif first_negative is None:
        lo, hi = speeds[-1], (1.0 - 1e-6) * K
        flo, fhi = values[-1], speed_mismatch(hi, params, mu_a, X, spacing)
    else:
        lo, hi = speeds[first_negative - 1], speeds[first_negative]
        flo, fhi = values[first_negative - 1], values[first_negative]
    if not (flo > 0 > fhi):
        raise SolverError(f"bracket failure: f({lo})={flo}, f({hi})={fhi}")

    target = tol * K
    mid, fmid = lo, flo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        fmid = speed_mismatch(mid, params, mu_a, X, spacing)
        if abs(fmid) <= target:
            break
        if fmid > 0:
            lo = mid
        else:
            hi = mid
    else:
        raise SolverError(f"bisection for c0 did not reach |f| <= {target} in {max_iter} steps (|f|={abs(fmid)})")
    wave = solve_semiwave(mid, params, X=X, spacing=spacing)
    return CriticalSpeed(c0=mid, residual=abs(fmid), iterations=it, X=X, wave=wave, scan=scan)


def zero_speed_slope(params: ModelParams) -> float:
    """Closed-form ``q'(0)`` at ``c = 0`` from the first integral."""
    return -(params.a / params.b) * math.sqrt(params.a / (3.0 * params.d))
