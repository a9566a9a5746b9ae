"""Independent oracles and convergence studies.

Nothing here reuses the discretisations of :mod:`bvp` or :mod:`stefan`:

* :func:`oracle_simulate` steps the front-fixed system explicitly (forward
  Euler) on a finer grid and reads the front slope with a third-order
  one-sided stencil;
* :func:`oracle_bvp` shoots from the left boundary with an adaptive
  Runge-Kutta integrator and corrects the launch slope with a safeguarded
  secant iteration (Brent's method) on its logarithm;
* :func:`oracle_semiwave_slope` follows the unstable manifold of the plateau
  state, which needs no truncation at all.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.optimize import brentq

from .bvp import BvpSpec, Profile
from .errors import PreconditionError, SolverError
from .model import ExpansionRate, ModelParams
from .stefan import StefanProblem, Trajectory

# --------------------------------------------------------------------------
# Stefan problem: explicit fine-grid integration


def _slope_third_order(u: np.ndarray, h: float) -> float:
    n = u.size - 1
    return float((11.0 * u[-1] - 18.0 * u[-2] + 9.0 * u[-3] - 2.0 * u[-4]) * n / (6.0 * h))


def _explicit_run(problem: StefanProblem, t_max: float, n: int, safety: float, record: Sequence[float], c0: float):
    p = problem.params
    y = np.linspace(0.0, 1.0, n + 1)
    h = p.h0
    u = problem.u0.evaluate(y * h)
    u[-1] = 0.0
    t = 0.0
    amax = max(abs(p.a), abs(p.a0))
    rows = []
    min_u, max_u = float(u.min()), float(u.max())
    nonincreasing = 0
    steps = 0
    targets = list(record)
    lap = np.empty(n)
    adv = np.empty(n)

    def sample():
        rows.append((t, h, h - p.c * t, h - c0 * t, float(u.max()), _slope_third_order(u, h), math.nan))

    if targets and targets[0] <= 0.0:
        sample()
        targets.pop(0)
    while targets:
        slope = _slope_third_order(u, h)
        hp = -problem.mu(problem.climate(h - p.c * t)) * slope
        dy = 1.0 / n
        dt = safety * min((h * dy) ** 2 / (2.0 * p.d), 1.0 / (amax + p.b * max_u + 1e-300))
        if hp > 0:
            dt = min(dt, safety * h * dy / hp)
        dt = min(dt, targets[0] - t)
        interior = u[:-1]
        lap[1:] = u[2:] - 2.0 * u[1:-1] + u[:-2]
        lap[0] = 2.0 * (u[1] - u[0])
        adv[1:] = y[1:-1] * (u[2:] - u[:-2]) / 2.0
        adv[0] = 0.0
        growth = problem.climate(y[:-1] * h - p.c * t)
        rate = p.d * lap / (h * dy) ** 2 + hp * adv / (h * dy) + growth * interior - p.b * interior**2
        u = u.copy()
        u[:-1] = interior + dt * rate
        h_new = h + dt * hp
        if (not hp > 0 and np.any(u > 0)) or h_new < h:
            nonincreasing += 1
        h = h_new
        t += dt
        steps += 1
        umin = float(u.min())
        if not np.isfinite(umin) or umin < -1e-12 * max(1.0, max_u):
            return None
        min_u, max_u = min(min_u, umin), max(max_u, float(u.max()))
        if t >= targets[0] - 1e-12:
            t = targets[0]
            sample()
            targets.pop(0)
    return rows, u, h, t, min_u, max_u, nonincreasing, steps


def oracle_simulate(
    problem: StefanProblem,
    t_max: float,
    n_grid: int = 512,
    c0: float = math.nan,
    record_every: Optional[float] = None,
    safety: float = 0.4,
    max_halvings: int = 6,
    lineage: str = "",
) -> Trajectory:
    """Explicit fine-grid integration of the free boundary problem.

    The step obeys the diffusive, advective and reactive stability limits
    scaled by ``safety``.  A negative or non-finite density is treated as a
    stability violation: the run restarts with half the safety factor, up to
    ``max_halvings`` times.
    """
    from .stefan import FrontState, front_slope

    if record_every is None:
        record_every = t_max
    count = max(1, int(round(t_max / record_every)))
    record = [0.0] + [t_max * k / count for k in range(1, count + 1)]
    for _ in range(max_halvings + 1):
        out = _explicit_run(problem, t_max, n_grid, safety, record, c0)
        if out is not None:
            break
        safety *= 0.5
    else:
        raise SolverError(f"explicit oracle unstable after {max_halvings} halvings (safety={safety})")
    rows, u, h, t, min_u, max_u, nonincreasing, steps = out
    cols = np.array(rows, dtype=float).T
    state = FrontState(t, h, u, front_slope(u, h))
    return Trajectory(
        *cols,
        final_state=state,
        c=problem.params.c,
        c0=c0,
        bound=problem.bound,
        min_u=min_u,
        max_u=max_u,
        nonincreasing_steps=nonincreasing,
        steps=steps,
        lineage=lineage,
    )


def mass(u: np.ndarray, h: float) -> float:
    """``int_0^h u dx`` on a uniform front-fixed grid (trapezoid rule)."""
    return float(trapezoid(u, dx=h / (u.size - 1)))


# --------------------------------------------------------------------------
# Boundary value problems: shooting


def _rhs(spec: BvpSpec):
    def f(x, z):
        v, w = z
        kappa = spec.coefficient(x) if callable(spec.coefficient) else spec.coefficient
        return [w, -(spec.c * w + (kappa - spec.b * v) * v) / spec.d]

    return f


def _shoot(spec: BvpSpec, theta: float, launch: float, dense: bool = False):
    rv = spec.right_value
    level = max(spec.left_value, spec.right_value, float(np.max(spec.kappa(np.array([spec.xl, spec.xr])))) / max(spec.b, 1e-300))

    def hit(x, z):
        return z[0] - rv

    hit.terminal = True
    hit.direction = 1.0 if spec.left_value < rv else -1.0

    def turn(x, z):
        return z[1]

    turn.terminal = spec.left_value != rv
    turn.direction = -launch

    def blowup(x, z):
        return abs(z[0]) - 10.0 * max(level, 1.0)

    blowup.terminal = True
    z0 = [spec.left_value, launch * math.exp(theta)]
    return solve_ivp(
        _rhs(spec), (spec.xl, spec.xr), z0, method="DOP853", rtol=1e-12, atol=min(1e-14, 1e-6 * math.exp(theta)),
        events=(hit, turn, blowup), dense_output=dense,
    )


def _miss(spec: BvpSpec, theta: float, launch: float) -> float:
    """Signed miss: negative when the target value is reached before ``xr``.

    Launches that never reach it (turning back, blowing up, or arriving at
    ``xr`` short of the target) give positive values; the function is
    continuous through the root.
    """
    sol = _shoot(spec, theta, launch)
    rv = spec.right_value
    if sol.t_events[0].size:
        return -(spec.xr - sol.t_events[0][0])
    for k in (1, 2):
        if spec.left_value != rv or k == 2:
            if sol.t_events[k].size:
                return abs(sol.y_events[k][0][0] - rv) + (spec.xr - sol.t_events[k][0])
    above = spec.left_value >= rv
    return (sol.y[0, -1] - rv) if above else (rv - sol.y[0, -1])


def oracle_bvp(spec: BvpSpec, n: int = 2001, theta_bracket: tuple = (-120.0, 8.0)) -> Profile:
    """Shooting solution of a two-point logistic boundary value problem.

    Launches ``v(xl) = left_value`` with slope ``-exp(theta)`` when the data
    decrease from left to right, ``+exp(theta)`` otherwise, and solves for
    ``theta`` with Brent's method (a safeguarded secant iteration).  The
    slope at ``xr`` is read from the ODE state and stored in
    ``meta["slope_right"]``.

    Raises
    ------
    SolverError
        No sign change of the miss function over ``theta_bracket`` (for
        zero data this means only the trivial solution exists).
    """
    x = np.linspace(spec.xl, spec.xr, n)
    kappa = spec.kappa(x)
    if spec.b > 0 and spec.left_value == spec.right_value and np.all(kappa == spec.b * spec.left_value):
        v = np.full(n, spec.left_value)
        return Profile(x, v, spec.digest(), 0, 0.0, "constant", {"slope_right": 0.0, "theta": -math.inf})
    launch = -1.0 if spec.left_value > spec.right_value else 1.0

    def miss(theta):
        return _miss(spec, theta, launch)

    lo, hi = theta_bracket
    mlo, mhi = miss(lo), miss(hi)
    if not mlo * mhi < 0:
        raise SolverError(f"shooting bracket does not straddle a root: miss({lo})={mlo}, miss({hi})={mhi}")
    theta, info = brentq(miss, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=400, full_output=True)
    sol = _shoot(spec, theta, launch, dense=True)
    end = sol.y[:, -1]
    v = sol.sol(np.minimum(x, sol.t[-1]))[0]
    v[-1] = end[0]
    return Profile(
        x, v, spec.digest(), info.iterations, abs(end[0] - spec.right_value), "shooting",
        {"slope_right": float(end[1]), "theta": float(theta), "x_end": float(sol.t[-1])},
    )


# --------------------------------------------------------------------------
# Semi-waves and the critical speed: unstable-manifold integration


def oracle_semiwave_slope(c: float, params: ModelParams, eps: float = 1e-9) -> float:
    """``q_c'(0)`` from the unstable manifold of ``(a/b, 0)``.

    The travelling-wave system is autonomous, so the semi-wave is the branch
    of the unstable manifold leaving the plateau, followed to its first
    zero.  The launch point is the linearised manifold at depth
    ``eps * a/b``.
    """
    d, a, b = params.d, params.a, params.b
    if not 0 < c < 2.0 * math.sqrt(a * d):
        raise PreconditionError(f"semi-wave speed must lie in (0, {2.0 * math.sqrt(a * d)})")
    lam = (-c + math.sqrt(c * c + 4.0 * a * d)) / (2.0 * d)
    depth = eps * a / b

    def f(x, z):
        return [z[1], -(c * z[1] + (a - b * z[0]) * z[0]) / d]

    def zero(x, z):
        return z[0]

    zero.terminal = True
    zero.direction = -1
    span = 200.0 * math.sqrt(d / a) + 50.0 / lam
    sol = solve_ivp(f, (0.0, span), [a / b - depth, -lam * depth], method="DOP853", rtol=1e-12, atol=1e-15, events=zero)
    if not sol.t_events[0].size:
        raise SolverError(f"unstable manifold at c={c} did not reach zero within x={span}")
    return float(sol.y_events[0][0][1])


@dataclass(frozen=True)
class OracleSpeed:
    c0: float
    scan: tuple


def oracle_critical_speed(params: ModelParams, mu: ExpansionRate, points: int = 40, xtol: float = 1e-13) -> OracleSpeed:
    """Root of ``-mu(a) q_c'(0) - c`` by a uniform scan followed by Brent's method."""
    K = 2.0 * math.sqrt(params.a * params.d)
    mu_a = mu.at_favourable

    def f(c):
        return -mu_a * oracle_semiwave_slope(c, params) - c

    speeds = [K * k / (points + 1) for k in range(1, points + 1)]
    values = [f(c) for c in speeds]
    for (c1, f1), (c2, f2) in zip(zip(speeds, values), zip(speeds[1:], values[1:])):
        if f1 > 0 >= f2:
            return OracleSpeed(brentq(f, c1, c2, xtol=xtol), tuple(zip(speeds, values)))
    raise SolverError(f"no sign change of the speed mismatch on the scan: {list(zip(speeds, values))}")


# --------------------------------------------------------------------------
# Convergence studies


@dataclass
class ConvergenceReport:
    quantity: str
    resolutions: list
    values: list
    differences: list = field(default_factory=list)
    orders: list = field(default_factory=list)
    monotone: bool = True

    @property
    def order(self) -> float:
        return self.orders[-1]

    def table(self) -> str:
        lines = [f"{self.quantity}: resolution,value"]
        lines += [f"{r:.12g},{v:.12g}" for r, v in zip(self.resolutions, self.values)]
        lines.append("orders: " + ", ".join(f"{o:.3f}" for o in self.orders))
        return "\n".join(lines)


def richardson(quantity: str, resolutions: Sequence[float], values: Sequence[float]) -> ConvergenceReport:
    """Observed orders ``log(|D_k| / |D_{k+1}|) / log(r)`` from consecutive differences.

    ``resolutions`` are mesh sizes refined by a constant ratio ``r``.
    """
    if len(values) < 3:
        raise ValueError("a convergence study needs at least three levels")
    res = list(resolutions)
    ratio = res[0] / res[1]
    diffs = [values[k] - values[k + 1] for k in range(len(values) - 1)]
    orders = []
    for d1, d2 in zip(diffs, diffs[1:]):
        orders.append(math.log(abs(d1) / abs(d2)) / math.log(ratio) if d1 != 0 and d2 != 0 else math.nan)
    monotone = all(abs(d2) < abs(d1) and d1 * d2 > 0 for d1, d2 in zip(diffs, diffs[1:]))
    return ConvergenceReport(quantity, res, list(values), diffs, orders, monotone)


def convergence_study(
    target: str,
    levels: Sequence[float],
    *,
    params: Optional[ModelParams] = None,
    c: Optional[float] = None,
    X: float = 20.0,
    problem: Optional[StefanProblem] = None,
    t_max: float = 10.0,
    n_grid: int = 512,
    dt: float = 0.01,
) -> ConvergenceReport:
    """Run one of the standard studies over ``levels``.

    ``target`` selects the quantity and the meaning of ``levels``:

    * ``"bvp_slope"``: semi-wave slope on ``[-X, 0]``; levels are mesh widths;
    * ``"stefan_space"``: ``h(t_max)``; levels are grid sizes ``N`` at fixed ``dt``;
    * ``"stefan_time"``: ``h(t_max)``; levels are time steps at fixed ``n_grid``.
    """
    from . import bvp, stefan

    if target == "bvp_slope":
        spec = bvp.plateau_spec(params, c, X)
        vals = [bvp.derivative_at_right(bvp.solve_logistic_bvp(spec, bvp.grid_points(X, dx))) for dx in levels]
        return richardson(target, levels, vals)
    if target == "stefan_space":
        vals = [
            stefan.simulate(problem, stefan.StefanNumerics(n_grid=int(n), dt=dt, record_every=t_max), t_max).h[-1]
            for n in levels
        ]
        return richardson(target, [1.0 / n for n in levels], vals)
    if target == "stefan_time":
        vals = [
            stefan.simulate(problem, stefan.StefanNumerics(n_grid=n_grid, dt=k, record_every=t_max), t_max).h[-1]
            for k in levels
        ]
        return richardson(target, levels, vals)
    raise ValueError(f"unknown convergence target {target!r}")


# --------------------------------------------------------------------------
# Manifest


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    lineage: str
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": float(f"{self.value:.12g}"),
            "tolerance": float(f"{self.tolerance:.12g}"),
            "lineage": self.lineage,
            "detail": self.detail,
        }


@dataclass
class Manifest:
    config_hash: str
    checks: list

    @property
    def lineage_ok(self) -> bool:
        return all(ch.lineage == self.config_hash for ch in self.checks)

    @property
    def passed(self) -> bool:
        return self.lineage_ok and all(ch.passed for ch in self.checks)

    def as_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "lineage_ok": self.lineage_ok,
            "passed": self.passed,
            "checks": [ch.as_dict() for ch in self.checks],
        }

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n")
        return path


def run_suite(config, log: Optional[Callable[[str], None]] = None) -> Manifest:
    """Desk-scale oracle cross-checks for one configuration.

    Each check is tagged with the configuration hash it ran under; the
    manifest refuses to pass when any tag differs.
    """
    from . import bvp, semiwave, stefan

    lineage = config.hash
    params, mu, problem = config.params, config.mu, config.problem
    checks: list[Check] = []

    def add(name, value, tol, passed=None, detail=""):
        ok = value <= tol if passed is None else passed
        checks.append(Check(name, ok, value, tol, lineage, detail))
        if log:
            log(f"{'PASS' if ok else 'FAIL'} {name}: {value:.6g} (tol {tol:.3g}) {detail}")

    cs = semiwave.critical_speed(params, mu)
    ref = oracle_critical_speed(params, mu)
    add("critical_speed_vs_shooting", abs(cs.c0 - ref.c0) / ref.c0, 1e-4, detail=f"c0={cs.c0:.12g}")

    c_probe = min(params.c, 0.9 * params.kpp_speed)
    spec = bvp.plateau_spec(params, c_probe, 20.0 * math.sqrt(params.d / params.a))
    main = bvp.derivative_at_right(bvp.solve_logistic_bvp(spec, bvp.grid_points(spec.xr - spec.xl, bvp.default_spacing(params))))
    shot = oracle_bvp(spec).meta["slope_right"]
    add("bvp_slope_vs_shooting", abs(main - shot), 1e-5, detail=f"slope={main:.12g}")

    t_short = 100 * config.dt
    fast = stefan.simulate(problem, stefan.StefanNumerics(n_grid=64, dt=config.dt, record_every=t_short), t_short, lineage=lineage)
    slow = oracle_simulate(problem, t_short, n_grid=256, lineage=lineage)
    add("stefan_100_steps_vs_oracle", abs(fast.h[-1] - slow.h[-1]) / slow.h[-1], 2e-3)
    t_long = 20.0
    fast = stefan.simulate(problem, stefan.StefanNumerics(n_grid=64, dt=config.dt, record_every=t_long), t_long, lineage=lineage)
    slow = oracle_simulate(problem, t_long, n_grid=256, lineage=lineage)
    add("stefan_h_T_vs_oracle", abs(fast.h[-1] - slow.h[-1]) / slow.h[-1], 1e-2, detail=f"T={t_long:g}")

    study = convergence_study("stefan_time", [0.04, 0.02, 0.01], problem=problem, t_max=4.0, n_grid=256)
    add("stefan_time_order", abs(study.order - 1.0), 0.3, detail=f"order={study.order:.3f}")
    study = convergence_study("stefan_space", [64, 128, 256], problem=problem, t_max=4.0, dt=1e-3)
    add("stefan_space_order", abs(study.order - 2.0), 0.3, detail=f"order={study.order:.3f}")

    run = stefan.simulate(problem, stefan.StefanNumerics(n_grid=256, dt=config.dt), t_short, c0=cs.c0, lineage=lineage)
    inv = run.invariants()
    add("invariant_bound", run.max_u / run.bound - 1.0, 1e-6, passed=inv["positive"] and inv["bounded"])
    add("invariant_front_monotone", float(run.nonincreasing_steps), 0.0, passed=inv["front_monotone"])
    again = stefan.simulate(problem, stefan.StefanNumerics(n_grid=256, dt=config.dt), t_short, c0=cs.c0, lineage=lineage)
    same = np.array_equal(run.h, again.h) and np.array_equal(run.final_state.u, again.final_state.u)
    add("deterministic_rerun", 0.0 if same else 1.0, 0.0, passed=same)
    return Manifest(lineage, checks)
