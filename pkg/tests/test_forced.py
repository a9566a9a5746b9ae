import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftfront import bvp, forced, semiwave
from shiftfront.errors import PreconditionError
from shiftfront.model import ClimateProfile, ExpansionRate, ModelParams

# Speed c0/2 with the shooting value of c0 (see test_semiwave).
HALF_SPEED = 0.364370723315 / 2
# Root of g on a 0.1-spaced scan refined by Brent's method, with every slope
# taken from the shooting oracle (verify.oracle_bvp) on the same truncation.
L0_REFERENCE = 0.979753308835


@pytest.fixture(scope="module")
def X(params):
    return bvp.left_truncation_radius(params, HALF_SPEED)


def test_shift_identity_for_negative_L(params, climate, X):
    v0 = forced.solve_forced_semiwave(0.0, params, climate, HALF_SPEED, X=X)
    vm = forced.solve_forced_semiwave(-2.0, params, climate, HALF_SPEED, X=X)
    assert np.max(np.abs(vm.v - v0(vm.x + 2.0))) <= 1e-6
    assert vm.slopeL == pytest.approx(v0.slopeL, abs=1e-12)


def test_critical_speed_gives_zero_shift(params, climate, mu, critical):
    res = forced.find_L0(params, climate, mu, critical.c0, c0=critical.c0)
    assert abs(res.L0) <= 1e-3
    q = critical.wave
    diff = np.abs(res.wave.v - q(res.wave.x))
    assert np.max(diff) <= 1e-4


def test_rejects_speed_above_critical(params, climate, critical):
    with pytest.raises(PreconditionError, match="0 < c <= c0"):
        forced.solve_forced_semiwave(0.0, params, climate, 1.1 * critical.c0, c0=critical.c0)


def test_sandwich(params, climate, critical, X):
    q = critical.wave
    for L in (0.0, 0.5, 2.0):
        v = forced.solve_forced_semiwave(L, params, climate, HALF_SPEED, X=X)
        lower = np.where(v.x < 0, q(v.x), 0.0)
        assert np.all(lower <= v.v + 1e-6)
        assert np.all(v.v <= params.carrying_capacity + 1e-8)
        assert np.all(np.diff(v.v) < 0)


def test_slopes_increase_and_vanish(params, climate, X):
    l0 = params.l0
    rep = forced.slope_monotonicity_scan([0.0, l0 / 2, l0, 2 * l0, 4 * l0, 8 * l0], params, climate, HALF_SPEED, X=X)
    assert rep.ok, rep.table()
    slopes = dict(rep.rows)
    assert abs(slopes[8 * l0]) < abs(slopes[2 * l0]) / 2
    assert rep.table().splitlines()[0] == "L,slope"


def test_negative_shifts_share_the_slope(params, climate, X):
    rep = forced.slope_monotonicity_scan([-1.0, 0.0], params, climate, HALF_SPEED, X=X)
    assert rep.ok
    assert rep.rows[0][1] == pytest.approx(rep.rows[1][1], abs=1e-12)


def test_slope_refinement_stability(params, climate, X):
    for L in (0.0, 0.5, 1.0):
        coarse = forced.solve_forced_semiwave(L, params, climate, HALF_SPEED, X=X, spacing=0.01).slopeL
        fine = forced.solve_forced_semiwave(L, params, climate, HALF_SPEED, X=X, spacing=0.005).slopeL
        assert abs(coarse - fine) < 1e-4


def test_mismatch_positive_at_zero(params, climate, mu, X):
    assert forced.stefan_mismatch(0.0, params, climate, mu, HALF_SPEED, X=X) > 0


def test_critical_shift_reference(params, climate, mu, critical):
    res = forced.find_L0(params, climate, mu, HALF_SPEED, c0=critical.c0)
    assert res.residual <= 1e-6
    assert res.L0 > 0
    assert round(res.L0, 3) == round(L0_REFERENCE, 3)
    assert abs(res.L0 - L0_REFERENCE) <= 5e-4
    g = forced.stefan_mismatch(res.L0, params, climate, mu, HALF_SPEED, X=res.wave.X)
    assert abs(g) <= 1e-6
    ladder = [v for _, v in res.ladder]
    assert all(b < a for a, b in zip(ladder, ladder[1:]))


@settings(max_examples=8, deadline=None)
@given(st.floats(min_value=0.2, max_value=0.9), st.floats(min_value=0.3, max_value=3.0))
def test_critical_shift_decreases_with_speed_property(frac, l0):
    p = ModelParams(d=1.0, a=1.0, a0=-1.0, b=1.0, l0=l0, c=0.1, h0=1.0)
    cl = ClimateProfile(p)
    mu = ExpansionRate.affine_from_endpoints(0.5, 1.0, p)
    c0 = semiwave.critical_speed(p, mu).c0
    slow = forced.find_L0(p, cl, mu, frac * c0 * 0.9, c0=c0)
    fast = forced.find_L0(p, cl, mu, frac * c0, c0=c0)
    assert slow.L0 > fast.L0 >= 0
    assert slow.residual <= 1e-6 and fast.residual <= 1e-6
