"""Spreading/vanishing verdicts, the amplitude threshold and phase sweeps.

Spreading is certified exactly: once the front passes the critical length
``pi/2 sqrt(d/a)`` vanishing is impossible.  Vanishing has no finite-time
certificate, so it is declared from decay evidence (small density and a
stalled front over the trailing part of the run) and anything else is
reported as ``Undetermined``.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .config import RunConfig
from .errors import PreconditionError, SolverError
from .stefan import FrontState, Recorder, Trajectory, simulate

log = logging.getLogger(__name__)

SPREADING = "Spreading"
VANISHING = "Vanishing"
UNDETERMINED = "Undetermined"


@dataclass
class Classification:
    verdict: str
    certificate: dict
    diagnostics: dict
    config_hash: str = ""
    trajectory: Optional[Trajectory] = field(default=None, repr=False, compare=False)

    def record(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "verdict": self.verdict,
            "certificate": self.certificate,
            "diagnostics": self.diagnostics,
        }

    def json_line(self) -> str:
        return json.dumps(_round(self.record()), sort_keys=True)


def _round(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _stop_rule(config: RunConfig):
    p = config.params
    crit = p.critical_length
    eps_v = config.eps_v * p.a / p.b
    eps_h = config.eps_h * p.h0

    def rule(state: FrontState, rec: Recorder) -> Optional[str]:
        if state.h >= crit:
            return SPREADING
        if state.t <= 0 or float(np.max(state.u)) >= eps_v:
            return None
        t, h = rec.t, rec.h
        start = (1.0 - config.decay_window) * state.t
        earlier = np.searchsorted(t, start)
        if earlier >= t.size - 1:
            return None  # the window must hold an earlier sample
        if state.h - h[earlier] < eps_h:
            return VANISHING
        return None

    return rule


def classify_run(config: RunConfig, t_max: Optional[float] = None, c0: float = math.nan) -> Classification:
    """Simulate until a verdict is reached or ``t_max`` (default ``config.t_max``)."""
    t_max = config.t_max if t_max is None else t_max
    p = config.params
    traj = simulate(config.problem, config.numerics, t_max, c0=c0, stop=_stop_rule(config), lineage=config.hash)
    state = traj.final_state
    verdict = traj.stop_reason or UNDETERMINED
    if verdict == SPREADING:
        certificate = {"rule": "critical_length", "t": state.t, "h": state.h, "threshold": p.critical_length}
    elif verdict == VANISHING:
        certificate = {
            "rule": "decay",
            "t": state.t,
            "sup_u": float(np.max(state.u)),
            "eps_v": config.eps_v * p.a / p.b,
            "h_gain": float(state.h - traj.h[np.searchsorted(traj.t, (1 - config.decay_window) * state.t)]),
            "eps_h": config.eps_h * p.h0,
        }
    else:
        certificate = {"rule": "none", "t": state.t}
    diagnostics = {
        "final_t": state.t,
        "final_h": state.h,
        "final_sup_u": float(np.max(state.u)),
        "critical_length": p.critical_length,
        "sigma": config.sigma,
        "h0": config.h0,
        "c": config.c,
    }
    return Classification(verdict, certificate, diagnostics, config.hash, traj)


# --------------------------------------------------------------------------
# amplitude threshold


@dataclass
class ThresholdResult:
    sigma_lo: float
    sigma_hi: float
    status: str
    evaluations: list

    @property
    def relative_width(self) -> float:
        return (self.sigma_hi - self.sigma_lo) / self.sigma_hi if math.isfinite(self.sigma_hi) else math.inf

    def record(self) -> dict:
        return {
            "sigma_lo": self.sigma_lo,
            "sigma_hi": self.sigma_hi,
            "relative_width": self.relative_width,
            "status": self.status,
            "evaluations": [[s, v] for s, v in self.evaluations],
        }


def find_sigma_star(
    config: RunConfig,
    bracket: Optional[tuple] = None,
    rel_tol: Optional[float] = None,
    t_max: Optional[float] = None,
    cap: Optional[float] = None,
) -> ThresholdResult:
    """Bisect the initial amplitude between a vanishing and a spreading run.

    The upper end is widened by factors of 10 up to ``cap`` while it still
    vanishes; failing that the result carries ``status="sigma_star_infinite"``.
    An undetermined verdict anywhere stops the search with the partial
    bracket and ``status="undetermined"``.

    Raises
    ------
    PreconditionError
        ``h0`` already exceeds the critical length, or the lower end spreads.
    """
    p = config.params
    if p.h0 >= p.critical_length:
        raise PreconditionError(
            f"h0={p.h0} >= pi/2*sqrt(d/a)={p.critical_length}: every amplitude spreads, no threshold exists"
        )
    lo, hi = bracket or (config.sigma_lo, config.sigma_hi)
    rel_tol = config.threshold_rel_tol if rel_tol is None else rel_tol
    cap = config.sigma_cap if cap is None else cap
    evaluations = []

    def verdict(sigma):
        v = classify_run(config.replace(sigma=sigma), t_max).verdict
        evaluations.append((sigma, v))
        log.info("sigma=%.12g -> %s", sigma, v)
        return v

    v_lo = verdict(lo)
    if v_lo == SPREADING:
        raise PreconditionError(f"lower bracket end sigma={lo} already spreads; lower it")
    if v_lo == UNDETERMINED:
        return ThresholdResult(lo, hi, "undetermined", evaluations)
    v_hi = verdict(hi)
    while v_hi == VANISHING:
        if hi >= cap:
            return ThresholdResult(hi, math.inf, "sigma_star_infinite", evaluations)
        lo, hi = hi, min(10.0 * hi, cap)
        v_hi = verdict(hi)
    if v_hi == UNDETERMINED:
        return ThresholdResult(lo, hi, "undetermined", evaluations)
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        v = verdict(mid)
        if v == UNDETERMINED:
            return ThresholdResult(lo, hi, "undetermined", evaluations)
        if v == VANISHING:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(lo, hi, "ok", evaluations)


def monotonicity_audit(config: RunConfig, sigmas: Sequence[float], t_max: Optional[float] = None) -> tuple[bool, list]:
    """Verdicts along increasing ``sigmas``; ok when no vanishing follows a spreading."""
    sigmas = sorted(sigmas)
    verdicts = [classify_run(config.replace(sigma=s), t_max).verdict for s in sigmas]
    seen_spreading = False
    ok = True
    for v in verdicts:
        if v == SPREADING:
            seen_spreading = True
        elif v == VANISHING and seen_spreading:
            ok = False
    return ok, list(zip(sigmas, verdicts))


def audit_grid(result: ThresholdResult, points: int = 8, spread: float = 4.0) -> list[float]:
    """Geometric grid of ``points`` amplitudes straddling a threshold bracket."""
    centre = math.sqrt(result.sigma_lo * result.sigma_hi)
    return list(np.geomspace(centre / spread, centre * spread, points))


# --------------------------------------------------------------------------
# asymptotics


def regime(c: float, c0: float, rel: float = 1e-6) -> str:
    if abs(c - c0) <= rel * c0:
        return "c=c0"
    return "c<c0" if c < c0 else "c>c0"


@dataclass
class AsymptoticReport:
    regime: str
    series: str
    gap: float
    oscillation: float
    window: tuple
    limit_ok: Optional[bool] = None

    def record(self) -> dict:
        return _round(self.__dict__.copy())


def asymptotic_report(
    trajectory: Trajectory,
    regime_name: str,
    critical_length: float,
    window: float = 0.1,
    tol: float = 1e-2,
) -> AsymptoticReport:
    """Trailing-window mean and oscillation of the front gap.

    The series is ``h - c t`` for ``c < c0`` and ``h - c0 t`` otherwise.
    For ``c = c0`` the estimate must not exceed ``tol`` (the limit is
    non-positive).

    Raises
    ------
    ValueError
        The trajectory never passed the critical length.
    """
    if not trajectory.h[-1] >= critical_length:
        raise ValueError("asymptotic report needs a spreading trajectory")
    if regime_name == "c<c0":
        name, series = "h_minus_ct", trajectory.h_minus_ct
    else:
        name, series = "h_minus_c0t", trajectory.h_minus_c0t
    t = trajectory.t
    mask = t >= t[-1] * (1.0 - window)
    tail = series[mask]
    rep = AsymptoticReport(
        regime_name, name, float(np.mean(tail)), float(np.ptp(tail)), (float(t[mask][0]), float(t[-1]))
    )
    if regime_name == "c=c0":
        rep.limit_ok = rep.gap <= tol
    return rep


# --------------------------------------------------------------------------
# sweeps


@dataclass
class SweepCell:
    i: int
    j: int
    c: float
    value: float
    verdict: str
    config_hash: str
    error: str = ""
    final_h: float = math.nan
    final_t: float = math.nan


@dataclass
class SweepTable:
    axis: str
    cells: list

    COLUMNS = ("i", "j", "c", "value", "verdict", "final_h", "final_t", "config_hash", "error")

    def column(self, j: int) -> list:
        return [c for c in self.cells if c.j == j]

    def to_csv(self, path: Union[str, Path], lineage: str = "") -> Path:
        path = Path(path)
        lines = [f"# config_hash={lineage}", f"# axis={self.axis}", ",".join(self.COLUMNS)]
        for cell in self.cells:
            row = []
            for name in self.COLUMNS:
                v = getattr(cell, name)
                row.append(f"{v:.12g}" if isinstance(v, float) else str(v))
            lines.append(",".join(row))
        path.write_text("\n".join(lines) + "\n")
        return path

    def json_lines(self) -> list[str]:
        out = []
        for cell in self.cells:
            rec = {
                "config_hash": cell.config_hash,
                "verdict": cell.verdict,
                "certificate": {"cell": [cell.i, cell.j]},
                "diagnostics": {"c": cell.c, self.axis: cell.value, "final_h": cell.final_h, "final_t": cell.final_t,
                                "error": cell.error},
            }
            out.append(json.dumps(_round(rec), sort_keys=True))
        return out


def phase_sweep(
    template: RunConfig,
    speeds: Sequence[float],
    values: Sequence[float],
    axis: str = "sigma",
    threads: int = 1,
    t_max: Optional[float] = None,
) -> SweepTable:
    """Classify every ``(c, value)`` cell; ``axis`` is ``"sigma"`` or ``"h0"``.

    Cells run on a pool of ``threads`` workers and are merged in grid order.
    A failing cell records its error and the sweep carries on.
    """
    if axis not in ("sigma", "h0"):
        raise ValueError("sweep axis must be 'sigma' or 'h0'")
    jobs = [(i, j, float(c), float(v)) for i, c in enumerate(speeds) for j, v in enumerate(values)]

    def run(job):
        i, j, c, v = job
        cfg = template.replace(c=c, **{axis: v})
        try:
            cfg.validate()
            res = classify_run(cfg, t_max)
        except (SolverError, PreconditionError, ValueError) as exc:
            return SweepCell(i, j, c, v, "Error", cfg.hash, f"{type(exc).__name__}: {exc}")
        return SweepCell(i, j, c, v, res.verdict, cfg.hash, "", res.diagnostics["final_h"], res.diagnostics["final_t"])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(run, jobs))
    else:
        cells = [run(job) for job in jobs]
    cells.sort(key=lambda cell: (cell.i, cell.j))
    return SweepTable(axis, cells)
