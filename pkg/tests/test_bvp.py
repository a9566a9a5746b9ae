import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftfront import bvp, forced, verify
from shiftfront.errors import TrivialBranchError

# Slope at 0 of the reference instance (d=a=b=1, c=0.5 on [-20, 0], data (1, 0)),
# from the adaptive shooting oracle (verify.oracle_bvp).
REFERENCE_SLOPE = -0.29623473056


@pytest.fixture(scope="module")
def reference_spec():
    return bvp.BvpSpec(-20.0, 0.0, 1.0, 0.0, 0.5, 1.0, 1.0, 1.0)


def test_constant_equilibrium_is_exact():
    spec = bvp.BvpSpec(-5.0, 0.0, 2.0, 2.0, 0.3, 1.0, 0.5, 1.0)
    prof = bvp.solve_logistic_bvp(spec, 101)
    assert np.all(prof.v == 2.0)
    assert bvp.derivative_at_right(prof) == 0.0
    shot = verify.oracle_bvp(spec)
    assert shot.branch == "constant" and np.all(shot.v == 2.0)


def test_derivative_exact_for_quadratics():
    x = np.linspace(-1.0, 0.0, 17)
    p = bvp.Profile(x, 2 * x**2 + 3 * x + 1)
    assert abs(bvp.derivative_at_right(p) - 3.0) < 1e-12
    assert abs(bvp.derivative_at_right(bvp.Profile(x, 0.5 * x - 4)) - 0.5) < 1e-12


def test_reference_slope_matches_shooting(reference_spec):
    prof = bvp.solve_logistic_bvp(reference_spec, bvp.grid_points(20.0, 0.005))
    slope = bvp.derivative_at_right(prof)
    assert abs(slope - REFERENCE_SLOPE) <= 1e-5
    live = verify.oracle_bvp(reference_spec).meta["slope_right"]
    assert abs(live - REFERENCE_SLOPE) <= 1e-9
    assert prof.residual <= 1e-12


def test_refinement_is_second_order(reference_spec):
    errs = []
    for dx in (0.04, 0.02, 0.01):
        prof = bvp.solve_logistic_bvp(reference_spec, bvp.grid_points(20.0, dx))
        errs.append(abs(bvp.derivative_at_right(prof) - REFERENCE_SLOPE))
    assert errs[0] / errs[1] >= 3.0 and errs[1] / errs[2] >= 3.0


def test_solution_is_bounded_and_decreasing(reference_spec):
    prof = bvp.solve_logistic_bvp(reference_spec, 2001)
    interior = prof.v[1:-1]
    assert np.all(interior > 0) and np.all(interior < 1.0 + 1e-8)
    assert np.all(np.diff(prof.v) < 1e-10)


def test_short_interval_gives_trivial_branch():
    # zero data on (-3, 0): shorter than pi / sqrt(a - c^2/(4d)) ~ 3.245 at c = 0.5
    spec = bvp.BvpSpec(-3.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0)
    with pytest.raises(TrivialBranchError):
        bvp.solve_logistic_bvp(spec, 601)
    prof = bvp.solve_logistic_bvp(spec, 601, allow_trivial=True)
    assert prof.branch == "trivial"
    with pytest.raises(Exception):
        verify.oracle_bvp(spec)


def test_zero_data_hump_matches_shooting():
    spec = bvp.BvpSpec(-10.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0)
    prof = bvp.solve_logistic_bvp(spec, 2001)
    assert prof.branch == "positive"
    shot = verify.oracle_bvp(spec).meta["slope_right"]
    assert abs(bvp.derivative_at_right(prof) - shot) <= 1e-5


def test_profile_csv_round_trip(tmp_path, reference_spec):
    prof = bvp.solve_logistic_bvp(reference_spec, 401)
    path = bvp.write_profile_csv(tmp_path / "p.csv", prof, {"note": "x"})
    back = bvp.read_profile_csv(path)
    assert back.spec_digest == prof.spec_digest
    assert np.allclose(back.v, prof.v, rtol=1e-11, atol=1e-13)
    text = path.read_text()
    assert text.startswith("# spec_hash=") and "# residual=" in text


def test_truncation_radius_certified(params):
    X = bvp.left_truncation_radius(params, 0.5, tol=1e-6)
    s = []
    for k in (1, 2, 3):
        spec = bvp.plateau_spec(params, 0.5, k * X)
        s.append(bvp.derivative_at_right(bvp.solve_logistic_bvp(spec, bvp.grid_points(k * X, 0.005))))
    assert abs(s[1] - s[0]) < 1e-6 * bvp.slope_scale(params)
    assert abs(s[2] - s[0]) < 1e-6 * bvp.slope_scale(params)
    assert bvp.left_truncation_radius(params, 0.5, tol=1e-3) <= X


def test_truncation_radius_scales_with_length(params):
    X1 = bvp.left_truncation_radius(params, 0.5)
    wide = params.replace(d=4.0)
    X4 = bvp.left_truncation_radius(wide, 1.0)
    assert X4 == pytest.approx(2.0 * X1)


@pytest.fixture(scope="module")
def barrier(params, climate):
    c, L1, M = 0.18, 0.5, 1.5
    vL = forced.solve_forced_semiwave(L1, params, climate, c, X=160.0)
    return c, L1, M, vL


def test_upper_barrier_sandwich_and_convergence(params, climate, barrier):
    c, L1, M, vL = barrier
    X = 20.0
    window = np.linspace(-X, L1, 801)
    gaps = []
    for l in (X, 2 * X, 4 * X):
        psi = bvp.solve_logistic_bvp(forced.psi_spec(params, climate, c, l, L1, M), bvp.grid_points(l + L1, 0.005))
        on_psi = vL(psi.x)
        assert np.all(on_psi <= psi.v + 1e-4)
        assert np.all(psi.v <= M + 1e-4)
        gaps.append(np.max(np.abs(psi(window) - vL(window))))
    assert gaps[0] >= gaps[1] >= gaps[2]
    assert gaps[2] < 1e-3


def test_lower_barrier_between_hump_and_forced_wave(params, climate, barrier):
    c, L, _, vL = barrier
    l = 30.0
    w = bvp.solve_logistic_bvp(forced.w_spec(params, climate, c, l, L), bvp.grid_points(l + L, 0.005))
    U = bvp.solve_logistic_bvp(forced.u_spec(params, c, l), bvp.grid_points(l, 0.005))
    sub = np.where(w.x <= 0.0, U(w.x), 0.0)
    assert np.all(sub <= w.v + 1e-6)
    assert np.all(w.v <= vL(w.x) + 1e-6)
    near = np.linspace(-4.0, L, 201)
    gaps = []
    for span in (8.0, 32.0):
        ws = bvp.solve_logistic_bvp(forced.w_spec(params, climate, c, span, L), bvp.grid_points(span + L, 0.005))
        gaps.append(np.max(np.abs(ws(near) - vL(near))))
    assert gaps[1] < gaps[0]
    assert gaps[1] < 1e-4


@settings(max_examples=15, deadline=None)
@given(
    st.floats(min_value=0.2, max_value=4.0),
    st.floats(min_value=0.2, max_value=4.0),
    st.floats(min_value=0.05, max_value=0.95),
)
def test_semiwave_problems_bounded_property(d, a, frac):
    c = frac * 2 * math.sqrt(a * d)
    X = 20.0 * math.sqrt(d / a)
    spec = bvp.BvpSpec(-X, 0.0, a, 0.0, c, d, 1.0, a)
    prof = bvp.solve_logistic_bvp(spec, bvp.grid_points(X, 0.02 * math.sqrt(d / a)))
    assert prof.residual <= 1e-12 * a  # tolerance is relative to the plateau level
    assert np.all(prof.v >= 0) and np.all(prof.v <= a + 1e-8)
    assert bvp.derivative_at_right(prof) < 0
