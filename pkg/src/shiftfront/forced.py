"""Forced semi-waves ``v_L`` and the critical shift ``L0``.

For ``0 < c <= c0`` and a shift ``L``, ``v_L`` is the positive solution of

    -d v'' - c v' = A(x) v - b v^2  on (-inf, L),   v(L) = 0,

which tends to ``a/b`` at ``-inf``.  ``L0 >= 0`` is the unique root of
``g(L) = -mu(A(L)) v_L'(L) - c``.

Truncation: the problem is solved on ``[min(L, 0) - X, L]`` with the
plateau value imposed at the left end, where ``X`` is certified by
:func:`bvp.left_truncation_radius`.  For ``L < 0`` the whole interval sits
in the favourable plateau, so the discrete problem is the ``L = 0`` problem
translated by ``L``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import bvp
from .errors import PreconditionError, SolverError
from .model import ClimateProfile, ExpansionRate, ModelParams
from .semiwave import critical_speed

# speeds closer than this (relative) are treated as c == c0
SPEED_MATCH = 1e-8


@dataclass(frozen=True)
class ForcedWave:
    L: float
    c: float
    x: np.ndarray
    v: np.ndarray
    slopeL: float
    X: float
    residual: float
    spec_digest: str = ""

    @property
    def profile(self) -> bvp.Profile:
        return bvp.Profile(self.x, self.v, self.spec_digest, residual=self.residual)

    def __call__(self, xs):
        return np.interp(xs, self.x, self.v, left=self.v[0], right=0.0)


def _check_speed(c: float, c0: Optional[float]) -> None:
    if not c > 0:
        raise PreconditionError(f"forced semi-wave needs c > 0 (got {c})")
    if c0 is not None and c > c0 * (1.0 + SPEED_MATCH):
        raise PreconditionError(
            f"forced semi-waves exist only for 0 < c <= c0; got c={c} > c0={c0}"
        )


def forced_spec(L: float, params: ModelParams, profile: ClimateProfile, c: float, X: float) -> bvp.BvpSpec:
    return bvp.plateau_spec(params, c, X, xr=L, coefficient=profile)


def solve_forced_semiwave(
    L: float,
    params: ModelParams,
    profile: ClimateProfile,
    c: float,
    tol: float = 1e-12,
    c0: Optional[float] = None,
    X: Optional[float] = None,
    spacing: float = bvp.SPACING,
) -> ForcedWave:
    """Solve for ``v_L``; ``c0`` (when given) enforces ``c <= c0``."""
    _check_speed(c, c0)
    if X is None:
        X = bvp.left_truncation_radius(params, c, spacing=spacing)
    spec = forced_spec(L, params, profile, c, X)
    n = bvp.grid_points(X + max(L, 0.0), bvp.default_spacing(params, spacing))
    prof = bvp.solve_logistic_bvp(spec, n, tol=tol)
    if np.any(np.diff(prof.v) > 1e-10 * params.carrying_capacity):
        raise SolverError(f"forced semi-wave at L={L} is not monotone decreasing")
    return ForcedWave(
        L=L,
        c=c,
        x=prof.x,
        v=prof.v,
        slopeL=bvp.derivative_at_right(prof),
        X=X,
        residual=prof.residual,
        spec_digest=prof.spec_digest,
    )


def slope_at_L(L: float, params: ModelParams, profile: ClimateProfile, c: float, **kwargs) -> float:
    return solve_forced_semiwave(L, params, profile, c, **kwargs).slopeL


def stefan_mismatch(L: float, params, profile, mu: ExpansionRate, c: float, **kwargs) -> float:
    """``g(L) = -mu(A(L)) v_L'(L) - c``."""
    return -mu(profile(L)) * slope_at_L(L, params, profile, c, **kwargs) - c


@dataclass(frozen=True)
class L0Result:
    L0: float
    residual: float
    c: float
    c0: float
    iterations: int
    wave: ForcedWave
    ladder: tuple = field(default=())


def find_L0(
    params: ModelParams,
    profile: ClimateProfile,
    mu: ExpansionRate,
    c: float,
    tol: float = 1e-9,
    c0: Optional[float] = None,
    spacing: float = bvp.SPACING,
    max_iter: int = 200,
    max_doublings: int = 12,
) -> L0Result:
    """Locate ``L0`` by bisection of ``g`` on ``[0, L_hi]``.

    ``L_hi`` doubles from ``l0`` until ``g(L_hi) < 0``.  When ``|g(0)| <= tol``
    (which happens at ``c = c0``) the answer is ``L0 = 0``.

    Raises
    ------
    SolverError
        ``g(0) < -tol``, no sign change on the doubling ladder,
        or ``g`` increasing somewhere on the ladder; the message carries the
        ladder values.
    """
    if c0 is None:
        c0 = critical_speed(params, mu).c0
    _check_speed(c, c0)
    X = bvp.left_truncation_radius(params, c, spacing=spacing)
    kw = dict(c0=c0, X=X, spacing=spacing)

    def g(L):
        return stefan_mismatch(L, params, profile, mu, c, **kw)

    ladder = [(0.0, g(0.0))]
    if abs(ladder[0][1]) <= tol:
        # g is constant on L <= 0, so a root at 0 is the critical shift (c = c0)
        wave = solve_forced_semiwave(0.0, params, profile, c, **kw)
        return L0Result(0.0, abs(ladder[0][1]), c, c0, 0, wave, tuple(ladder))
    if not ladder[0][1] > 0:
        raise SolverError(f"g(0) = {ladder[0][1]} is not positive, so c exceeds c0; ladder {ladder}")
    L_hi = params.l0
    for _ in range(max_doublings):
        ladder.append((L_hi, g(L_hi)))
        if ladder[-1][1] >= ladder[-2][1]:
            raise SolverError(f"g is not decreasing on the ladder: {ladder}")
        if ladder[-1][1] < 0:
            break
        L_hi *= 2.0
    else:
        raise SolverError(f"no sign change of g up to L={L_hi}; ladder {ladder}")

    lo, flo = ladder[-2]
    hi, fhi = ladder[-1]
    mid, fmid = lo, flo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        fmid = g(mid)
        if abs(fmid) <= tol or hi - lo <= 1e-14 * max(1.0, hi):
            break
        if fmid > 0:
            lo = mid
        else:
            hi = mid
    wave = solve_forced_semiwave(mid, params, profile, c, **kw)
    return L0Result(mid, abs(fmid), c, c0, it, wave, tuple(ladder))


@dataclass
class MonotonicityReport:
    rows: list
    ok: bool
    offending: Optional[tuple] = None

    def table(self) -> str:
        lines = ["L,slope"]
        lines += [f"{L:.12g},{s:.12g}" for L, s in self.rows]
        return "\n".join(lines)


def slope_monotonicity_scan(
    L_list: Sequence[float],
    params: ModelParams,
    profile: ClimateProfile,
    c: float,
    **kwargs,
) -> MonotonicityReport:
    """Slopes ``v_L'(L)`` along ``L_list``; strictly increasing on ``[0, inf)``.

    Pairs with both shifts negative must agree (shift identity) rather than
    increase.
    """
    L_list = list(L_list)
    if L_list != sorted(L_list):
        raise ValueError("L_list must be sorted")
    if "X" not in kwargs:
        kwargs["X"] = bvp.left_truncation_radius(params, c, spacing=kwargs.get("spacing", bvp.SPACING))
    rows = [(L, slope_at_L(L, params, profile, c, **kwargs)) for L in L_list]
    for (L1, s1), (L2, s2) in zip(rows, rows[1:]):
        if L2 <= 0.0:
            if abs(s1 - s2) > 1e-9 * bvp.slope_scale(params):
                return MonotonicityReport(rows, False, (L1, L2))
        elif L1 >= 0.0 and not s1 < s2:
            return MonotonicityReport(rows, False, (L1, L2))
    return MonotonicityReport(rows, True)


def psi_spec(params: ModelParams, profile: ClimateProfile, c: float, l: float, L1: float, M: float) -> bvp.BvpSpec:
    """Upper barrier problem on ``(-l, L1)`` with ``psi(-l) = M``, ``psi(L1) = 0``."""
    return bvp.BvpSpec(-l, L1, M, 0.0, c, params.d, params.b, profile)


def w_spec(params: ModelParams, profile: ClimateProfile, c: float, l: float, L: float) -> bvp.BvpSpec:
    """Lower barrier problem on ``(-l, L)`` with zero data at both ends."""
    return bvp.BvpSpec(-l, L, 0.0, 0.0, c, params.d, params.b, profile)


def u_spec(params: ModelParams, c: float, l: float) -> bvp.BvpSpec:
    """Constant-coefficient problem on ``(-l, 0)`` with zero data at both ends."""
    return bvp.BvpSpec(-l, 0.0, 0.0, 0.0, c, params.d, params.b, params.a)
