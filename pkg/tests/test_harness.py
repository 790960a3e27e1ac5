import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from tensorgap.harness import (
    LowDegreeBoundParams,
    detection_experiment,
    error_rates,
    estimate_error_distribution,
    fit_power_law,
    framework_bound,
    lowdeg_bound_sum,
    scaling_sweep,
    separation_window,
    simplified_term_bound,
    statistic_ratios,
)
from tensorgap.planted import PlantedConfig, regime_params, twopoint_from_bernoulli


# ---------------------------------------------------------------------------
# bound arithmetic


def test_separation_window_examples():
    assert separation_window(1, 1, 0.1, 1) == pytest.approx((0.2, 0.5))
    assert separation_window(1, 1, 0.3, 1) is None
    assert separation_window(2, 1, 0.1, 1) == pytest.approx((0.2, 0.25))
    with pytest.raises(ValueError):
        separation_window(0.5, 1, 0.1, 1)


@given(
    rho=st.floats(1, 50),
    zeta=st.floats(1, 50),
    d_est=st.floats(1e-6, 10),
    d_det=st.floats(0, 100),
)
def test_window_implies_framework_bound(rho, zeta, d_est, d_det):
    w = separation_window(rho, zeta, d_est, d_det)
    if w is not None:
        lo, hi = w
        assert lo < hi
        assert framework_bound(d_det, d_est) > rho * zeta
    else:
        assert framework_bound(d_det, d_est) <= rho * zeta * (1 + 1e-12)


def test_framework_bound_examples():
    assert framework_bound(8, 1) == 2
    assert framework_bound(1, 1) == 0.25
    p, d, n = 16, 4, 1024
    d_det = p ** (d / 4) / math.sqrt(n)
    d_est = p ** (d / 2) / n
    assert (d_det, d_est) == (0.5, 0.25)
    assert framework_bound(d_det, d_est) == 0.5
    with pytest.raises(ValueError):
        framework_bound(1, 0)


def test_lowdeg_examples():
    base = dict(a=1.0, C_d=1.0, n=8.0, d=3, p=4.0)
    assert lowdeg_bound_sum(LowDegreeBoundParams(M=0, **base)).total == 1.0
    res = lowdeg_bound_sum(LowDegreeBoundParams(M=2, **base))
    assert res.total == 65.5
    assert res.max_ratio == 8.0 and res.overflow_at is None


def mp_lowdeg(params):
    with mpmath.workdps(50):
        a, n, p = mpmath.mpf(params.a), mpmath.mpf(params.n), mpmath.mpf(params.p)
        base = a / (1 + a) * params.C_d * n ** (mpmath.mpf(1) / params.d) / mpmath.sqrt(p)
        return float(1 + sum((base * m**4) ** m for m in range(1, params.M + 1)))


@given(
    a=st.floats(1e-4, 5),
    n=st.floats(2, 1e6),
    p=st.floats(2, 1e4),
    d=st.integers(3, 4),
    C_d=st.floats(0.01, 3),
    M=st.integers(0, 12),
)
def test_lowdeg_matches_extended_precision(a, n, p, d, C_d, M):
    params = LowDegreeBoundParams(a=a, n=n, p=p, d=d, C_d=C_d, M=M)
    res = lowdeg_bound_sum(params)
    if res.overflow_at is None:
        assert res.total == pytest.approx(mp_lowdeg(params), rel=1e-12)


def test_lowdeg_overflow_sentinel():
    res = lowdeg_bound_sum(LowDegreeBoundParams(a=1.0, n=1e6, p=4.0, d=3, M=200))
    assert res.total == math.inf and res.overflow_at is not None and res.overflow_at <= 200


def test_lowdeg_validation():
    with pytest.raises(ValueError):
        LowDegreeBoundParams(a=0.0, n=8, p=4, d=3, M=2)
    with pytest.raises(ValueError):
        LowDegreeBoundParams(a=1.0, n=8, p=4, d=3, M=-1)


@pytest.mark.parametrize("p", [1e4, 1e5, 1e7])
@pytest.mark.parametrize("d", [3, 4])
def test_lowdeg_terms_below_large_p_simplification(p, d):
    rp = regime_params(int(p), d=d, c0=9.0)
    M = int(math.log(p) ** 2)
    params = LowDegreeBoundParams(a=rp.a, n=rp.n, p=p, d=d, C_d=1.0, c0=9.0, M=M)
    for m in range(1, M + 1):
        assert params.term_ratio(m) <= simplified_term_bound(params, m)


# ---------------------------------------------------------------------------
# scaling fitter


@pytest.mark.parametrize("exponent", [-1.0, -0.5, 0.25])
def test_fit_power_law_exact(exponent):
    n = np.array([1e3, 4e3, 1.6e4, 6.4e4])
    slope, intercept = fit_power_law(n, 3.7 * n**exponent)
    assert abs(slope - exponent) <= 1e-12
    assert intercept == pytest.approx(math.log(3.7), abs=1e-10)


def test_scaling_sweep_validation():
    cfg = PlantedConfig(p=2, n=10, a=1.0)
    with pytest.raises(ValueError):
        scaling_sweep(cfg, [10, 20], 2)
    with pytest.raises(ValueError):
        scaling_sweep(cfg, [10, 30, 20], 2)


def test_scaling_sweep_small_run():
    rep = scaling_sweep(PlantedConfig(p=2, n=10, a=1.0, seed=3), [200, 400, 800], 5)
    assert rep.errors.shape == (3, 5)
    np.testing.assert_allclose(rep.medians, np.median(rep.errors, axis=1))
    assert "outside" in rep.note


# ---------------------------------------------------------------------------
# estimation error


def test_gap_report_null_and_invariants():
    rep = estimate_error_distribution(PlantedConfig(p=3, n=500, a=0.0, seed=1), reps=8)
    assert rep.d_det_proxy == 0.0 and rep.bound == 0.0
    for lv in rep.est_lower_quantiles:
        assert 0 < rep.est_lower_quantiles[lv] <= rep.est_upper_quantiles[lv] < math.inf
    assert np.all(rep.err_lower <= rep.err_upper)
    assert rep.d_est == rep.est_upper_quantiles[0.9]


def test_gap_report_deterministic():
    cfg = PlantedConfig(p=3, n=400, a=1.0, seed=42)
    a = estimate_error_distribution(cfg, reps=6)
    b = estimate_error_distribution(cfg, reps=6)
    assert a.err_lower.tobytes() == b.err_lower.tobytes()
    assert a.err_upper.tobytes() == b.err_upper.tobytes()
    assert a.est_upper_quantiles == b.est_upper_quantiles


def test_error_decreases_with_n():
    cfg = PlantedConfig(p=3, n=1000, a=1.0, d=3, w=twopoint_from_bernoulli(0.2), seed=8)
    small = estimate_error_distribution(cfg, reps=50)
    large = estimate_error_distribution(cfg.replace(n=16000), reps=50)
    assert large.est_upper_quantiles[0.5] < small.est_upper_quantiles[0.5]


# ---------------------------------------------------------------------------
# detection


def test_error_rates_extremes():
    s0, s1 = np.array([1.0, 2.0, 3.0]), np.array([2.5, 4.0, 5.0])
    t1, t2 = error_rates(s0, s1, [0.0, 10.0])
    np.testing.assert_array_equal(t1 + t2, [1.0, 1.0])
    t1, t2 = error_rates(s0, s1, [3.0])
    assert t1[0] == 0.0 and t2[0] == pytest.approx(1 / 3)


def test_detection_null_is_exactly_uninformative():
    rep = detection_experiment(PlantedConfig(p=4, n=300, a=0.0, seed=2), reps=30)
    np.testing.assert_array_equal(rep.stats_h0, rep.stats_h1)
    np.testing.assert_allclose(rep.type1 + rep.type2, 1.0)
    assert rep.best_sum == 1.0
    assert rep.best_tau == rep.tau_grid[0]


def test_detection_monotone_rates_and_grid():
    rep = detection_experiment(PlantedConfig(p=3, n=400, a=1.0, seed=4), reps=20)
    assert rep.tau_grid.size == 101
    assert np.all(np.diff(rep.type1) <= 0) and np.all(np.diff(rep.type2) >= 0)
    assert np.all((0 <= rep.type1) & (rep.type1 <= 1))
    assert rep.best_sum == pytest.approx(np.min(rep.type1 + rep.type2))


def test_detection_outside_thresholds():
    rep = detection_experiment(PlantedConfig(p=3, n=400, a=1.0, seed=4), reps=10, tau_grid=[-1.0, 1e6])
    np.testing.assert_allclose(rep.type1 + rep.type2, [1.0, 1.0])


def test_detection_power_statistic_runs():
    rep = detection_experiment(PlantedConfig(p=3, n=2000, a=3.0, seed=4), "power", reps=10)
    assert rep.best_sum <= 0.2


def test_detection_validation():
    cfg = PlantedConfig(p=3, n=100, a=1.0)
    with pytest.raises(ValueError):
        detection_experiment(cfg, reps=1)
    with pytest.raises(ValueError):
        detection_experiment(cfg, "bogus", reps=2)
    with pytest.raises(ValueError):
        detection_experiment(cfg, reps=2, tau_grid=[])


def test_statistic_ratios():
    assert statistic_ratios("unfold", 3, 3) == (1.0, math.sqrt(3))
    assert statistic_ratios("unfold", 3, 4) == (1.0, 3.0)
    assert statistic_ratios("power", 3, 3) == (math.inf, 1.0)
