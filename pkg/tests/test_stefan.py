import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftfront import stefan, verify
from shiftfront.errors import SolverError
from shiftfront.model import ClimateProfile, ExpansionRate, make_initial_bump


@pytest.fixture(scope="module")
def problem(config):
    return config.problem


def run(problem, n=128, dt=0.01, t_max=1.0, record_every=0.5, **kw):
    return stefan.simulate(problem, stefan.StefanNumerics(n_grid=n, dt=dt, record_every=record_every), t_max, **kw)


def test_zero_state_is_a_fixed_point(problem):
    state = stefan.FrontState(0.0, 2.0, np.zeros(65), 0.0)
    new = stefan.step(state, 0.01, problem)
    assert np.all(new.u == 0.0)
    assert new.h == 2.0 and new.hprime == 0.0 and new.degenerate


def test_one_step_moves_the_front(problem):
    s0 = stefan.initial_state(problem, 256)
    s1 = stefan.step(s0, 0.01, problem)
    assert s1.h > s0.h and s1.hprime > 0
    assert s1.u[-1] == 0.0 and np.all(s1.u >= 0)


def test_rejects_bad_step(problem):
    s0 = stefan.initial_state(problem, 64)
    with pytest.raises(ValueError):
        stefan.step(s0, 0.0, problem)
    flipped = stefan.FrontState(0.0, 2.0, s0.u, 0.3)
    with pytest.raises(SolverError):
        stefan.step(flipped, 0.01, problem)


def test_front_slope_exact_for_quadratics():
    h = 3.0
    x = np.linspace(0.0, h, 33)
    assert stefan.front_slope(h * h - x * x, h) == pytest.approx(-2 * h, abs=1e-12)


def test_hundred_steps_against_oracle(problem):
    t = 1.0
    main = run(problem, n=64, dt=0.01, t_max=t, record_every=t)
    ref = verify.oracle_simulate(problem, t, n_grid=256)
    assert abs(main.h[-1] - ref.h[-1]) <= 2e-3 * ref.h[-1]
    assert main.steps == 100


def test_interior_gap_window(params):
    x = np.linspace(0.0, 30.0, 301)
    u = np.where(x < 25.0, params.a / params.b, 0.0)
    early = stefan.FrontState(1.0, 30.0, u, -1.0)
    assert stefan.interior_sup_gap(early, 10.0, params) is None
    late = stefan.FrontState(100.0, 30.0, u, -1.0)
    assert stefan.interior_sup_gap(late, 10.0, params) == 0.0


def test_profile_error_self_comparison(problem):
    traj = run(problem, t_max=0.5)
    s = traj.final_state
    target = lambda z: np.interp(z, s.x, s.u)  # noqa: E731
    assert stefan.profile_error(s, target, anchor=s.h) <= 1e-15


def test_vanishing_decays(params):
    p = params.replace(h0=0.3 * params.critical_length)
    mu = ExpansionRate.affine_from_endpoints(0.5, 1.0, p)
    prob = stefan.StefanProblem(p, ClimateProfile(p), mu, make_initial_bump(p.h0, 1e-4))
    traj = run(prob, n=128, dt=0.05, t_max=40.0, record_every=1.0)
    assert np.all(np.diff(traj.sup_u) < 0)
    assert traj.sup_u[-1] < 1e-4 * traj.sup_u[0]
    assert traj.h[-1] < p.critical_length
    assert traj.invariants()["front_monotone"]


def test_comparison_and_domination(problem):
    low = run(problem, n=128, t_max=10.0, record_every=0.5)
    big = problem.with_initial(make_initial_bump(problem.params.h0, 1.2 * problem.u0.sup))
    high = run(big, n=128, t_max=10.0, record_every=0.5)
    hom = run(problem.homogeneous(), n=128, t_max=10.0, record_every=0.5)
    dx = high.final_state.dx
    assert np.all(low.h <= high.h + dx)
    assert np.all(low.h <= hom.h + dx)
    for a, b in ((low, high), (low, hom)):
        xa, xb = a.final_state.x, b.final_state.x
        assert np.all(a.final_state.u <= np.interp(xa, xb, b.final_state.u) + 1e-6)


def test_spreading_interior_gap(config):
    # favourable window [0, ct - M] needs ct > M = 10
    traj = stefan.simulate(
        config.problem, stefan.StefanNumerics(n_grid=1024, dt=0.02, record_every=10.0), 150.0
    )
    gap = traj.interior_gap[-1]
    assert math.isnan(traj.interior_gap[0])
    assert gap < 0.05 * config.params.carrying_capacity


def test_invariants_and_csv(tmp_path, problem):
    traj = stefan.simulate(
        problem, stefan.StefanNumerics(n_grid=128, dt=0.01, record_every=0.5, snapshot_every=1.0), 2.0,
        c0=0.36, lineage="abc",
    )
    inv = traj.invariants()
    assert inv["positive"] and inv["bounded"] and inv["front_monotone"]
    text = traj.to_csv(tmp_path / "t.csv").read_text().splitlines()
    assert text[0] == "# config_hash=abc"
    assert text[3] == ",".join(stefan.Trajectory.COLUMNS)
    assert len(text) == 4 + traj.t.size
    paths = traj.write_snapshots(tmp_path / "snaps")
    assert len(paths) == 3
    body = paths[-1].read_text().splitlines()
    assert body[0] == "# config_hash=abc" and body[2] == "x,u"


def test_recorded_times_are_exact(problem):
    traj = run(problem, t_max=2.0, record_every=0.1)
    assert np.array_equal(traj.t, np.arange(21) * 10 * 0.01)
    assert traj.t[-1] == 2.0


def test_deterministic(problem):
    a = run(problem, t_max=1.0)
    b = run(problem, t_max=1.0)
    assert np.array_equal(a.h, b.h) and np.array_equal(a.final_state.u, b.final_state.u)


def test_stop_rule_halts(problem):
    traj = run(problem, t_max=5.0, stop=lambda s, rec: "done" if s.t >= 1.0 else None)
    assert traj.stop_reason == "done" and traj.t[-1] == 1.0


def test_time_halving_property(problem):
    h = [run(problem, n=128, dt=dt, t_max=2.0, record_every=2.0).h[-1] for dt in (0.04, 0.02, 0.01)]
    assert abs(h[2] - h[1]) <= abs(h[1] - h[0]) / 2


@settings(max_examples=6, deadline=None)
@given(st.floats(min_value=0.05, max_value=2.0), st.floats(min_value=0.5, max_value=3.0))
def test_bound_and_monotone_front_property(sigma, h0):
    from shiftfront.model import ModelParams

    p = ModelParams(d=1.0, a=1.0, a0=-1.0, b=1.0, l0=1.0, c=0.3, h0=h0)
    mu = ExpansionRate.affine_from_endpoints(0.5, 1.0, p)
    prob = stefan.StefanProblem(p, ClimateProfile(p), mu, make_initial_bump(h0, sigma))
    traj = run(prob, n=64, dt=0.02, t_max=3.0)
    inv = traj.invariants()
    assert inv["positive"] and inv["bounded"] and inv["front_monotone"]
