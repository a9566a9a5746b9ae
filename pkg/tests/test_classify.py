import json
import math

import numpy as np
import pytest

from shiftfront import classify, stefan, verify
from shiftfront.config import RunConfig
from shiftfront.errors import PreconditionError


@pytest.fixture(scope="module")
def small(config):
    """Reference config at desk resolution with h0 at half the critical length."""
    crit = config.params.critical_length
    return config.replace(h0=0.5 * crit, n_grid=256, dt=0.02)


def test_large_range_spreads_immediately(config):
    crit = config.params.critical_length
    res = classify.classify_run(config.replace(h0=1.1 * crit, sigma=1e-3, n_grid=256))
    assert res.verdict == classify.SPREADING
    assert res.certificate["rule"] == "critical_length" and res.certificate["t"] == 0.0


def test_small_range_tiny_amplitude_vanishes(config):
    crit = config.params.critical_length
    res = classify.classify_run(config.replace(h0=0.3 * crit, sigma=1e-4, n_grid=256, dt=0.02))
    assert res.verdict == classify.VANISHING
    cert = res.certificate
    assert cert["sup_u"] < cert["eps_v"] and cert["h_gain"] < cert["eps_h"]
    assert res.diagnostics["final_h"] < crit


def test_short_horizon_is_undetermined(small):
    res = classify.classify_run(small.replace(sigma=1.0), t_max=1.0)
    assert res.verdict == classify.UNDETERMINED
    assert res.certificate == {"rule": "none", "t": 1.0}


def test_json_line(small):
    res = classify.classify_run(small.replace(sigma=4.0))
    rec = json.loads(res.json_line())
    assert set(rec) == {"config_hash", "verdict", "certificate", "diagnostics"}
    assert rec["config_hash"] == small.replace(sigma=4.0).hash


def oracle_verdict(config, t_max, n_grid):
    traj = verify.oracle_simulate(config.problem, t_max, n_grid=n_grid, record_every=1.0)
    p = config.params
    if np.any(traj.h >= p.critical_length):
        return classify.SPREADING
    if traj.sup_u[-1] < config.eps_v * p.a / p.b:
        return classify.VANISHING
    return classify.UNDETERMINED


@pytest.mark.parametrize("sigma,t_max,n", [(1.0, 15.0, 64), (4.0, 8.0, 64)])
def test_verdict_matches_oracle(small, sigma, t_max, n):
    cfg = small.replace(sigma=sigma)
    assert classify.classify_run(cfg).verdict == oracle_verdict(cfg, t_max, n)


def test_threshold_rejects_large_range(config):
    with pytest.raises(PreconditionError, match="no threshold"):
        classify.find_sigma_star(config.replace(h0=config.params.critical_length))


def test_threshold_rejects_spreading_lower_end(small):
    with pytest.raises(PreconditionError, match="lower"):
        classify.find_sigma_star(small, bracket=(5.0, 10.0))


def test_threshold_reports_infinite(small):
    res = classify.find_sigma_star(small, bracket=(1e-4, 1e-3), cap=1e-2)
    assert res.status == "sigma_star_infinite" and math.isinf(res.sigma_hi)
    assert res.record()["relative_width"] == math.inf


@pytest.fixture(scope="module")
def threshold(small):
    return classify.find_sigma_star(small, rel_tol=1e-2, t_max=600.0)


def test_threshold_bracket(threshold):
    assert threshold.status == "ok"
    assert threshold.relative_width <= 1e-2
    verdicts = dict(threshold.evaluations)
    assert verdicts[threshold.sigma_lo] == classify.VANISHING
    assert verdicts[threshold.sigma_hi] == classify.SPREADING


def test_threshold_nests(small, threshold):
    coarse = classify.find_sigma_star(small, rel_tol=1e-1, t_max=600.0)
    assert coarse.sigma_lo <= threshold.sigma_lo <= threshold.sigma_hi <= coarse.sigma_hi


def test_monotonicity_audit(small, threshold):
    grid = classify.audit_grid(threshold, 8)
    assert len(grid) == 8 and grid[0] < threshold.sigma_lo and grid[-1] > threshold.sigma_hi
    ok, rows = classify.monotonicity_audit(small, grid, t_max=600.0)
    assert ok
    assert {v for _, v in rows} == {classify.VANISHING, classify.SPREADING}


def test_regime():
    assert classify.regime(0.1, 0.3) == "c<c0"
    assert classify.regime(0.3, 0.3) == "c=c0"
    assert classify.regime(0.5, 0.3) == "c>c0"


def synthetic(t, h, c, c0):
    n = t.size
    return stefan.Trajectory(
        t, h, h - c * t, h - c0 * t, np.ones(n), -np.ones(n), np.full(n, np.nan),
        final_state=None, c=c, c0=c0, bound=1.0, min_u=0.0, max_u=1.0, nonincreasing_steps=0, steps=n,
    )


def test_asymptotic_report_windows():
    t = np.linspace(0.0, 100.0, 101)
    traj = synthetic(t, 2.0 + 0.2 * t, 0.2, 0.3)
    rep = classify.asymptotic_report(traj, "c<c0", 1.0)
    assert rep.series == "h_minus_ct" and rep.gap == pytest.approx(2.0) and rep.oscillation == pytest.approx(0.0, abs=1e-12)
    assert rep.window == (90.0, 100.0) and rep.limit_ok is None
    traj = synthetic(t, 0.3 * t - 0.5, 0.3, 0.3)
    rep = classify.asymptotic_report(traj, "c=c0", 1.0)
    assert rep.gap == pytest.approx(-0.5) and rep.limit_ok
    traj = synthetic(t, 0.3 * t + 0.5, 0.3, 0.3)
    assert not classify.asymptotic_report(traj, "c=c0", 1.0).limit_ok


def test_asymptotic_report_requires_spreading():
    t = np.linspace(0.0, 10.0, 11)
    with pytest.raises(ValueError):
        classify.asymptotic_report(synthetic(t, np.full(11, 0.5), 0.2, 0.3), "c<c0", 1.0)


def test_phase_sweep(tmp_path, small):
    crit = small.params.critical_length
    speeds = [0.1, 0.2]
    h0s = [0.5 * crit, 1.2 * crit, 2.0 * crit]
    table = classify.phase_sweep(small.replace(sigma=1.0), speeds, h0s, axis="h0", t_max=600.0)
    assert [(c.i, c.j) for c in table.cells] == [(i, j) for i in range(2) for j in range(3)]
    for j in (1, 2):
        assert all(cell.verdict == classify.SPREADING for cell in table.column(j))
    threaded = classify.phase_sweep(small.replace(sigma=1.0), speeds, h0s, axis="h0", threads=3, t_max=600.0)
    assert threaded.json_lines() == table.json_lines()
    text = table.to_csv(tmp_path / "s.csv", "abc").read_text().splitlines()
    assert text[0] == "# config_hash=abc" and text[2].startswith("i,j,c,value,verdict")


def test_sigma_column_has_single_transition(small):
    table = classify.phase_sweep(small, [0.18], [0.5, 1.0, 1.5, 3.0, 6.0], t_max=600.0)
    verdicts = [c.verdict for c in table.cells]
    flips = sum(a != b for a, b in zip(verdicts, verdicts[1:]))
    assert flips == 1 and verdicts[0] == classify.VANISHING and verdicts[-1] == classify.SPREADING


def test_sweep_records_errors(small):
    table = classify.phase_sweep(small, [-0.1], [1.0])
    cell = table.cells[0]
    assert cell.verdict == "Error" and "ConfigError" in cell.error


def test_bad_axis(small):
    with pytest.raises(ValueError):
        classify.phase_sweep(small, [0.1], [1.0], axis="mu")


def test_config_roundtrip_in_sweep(small):
    cfg = small.replace(c=0.1, h0=1.0)
    assert RunConfig.from_text(cfg.to_text()).hash == cfg.hash
