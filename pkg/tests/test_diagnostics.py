import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from districting.diagnostics import (
    Ecdf,
    NonDecayingError,
    autocorrelation,
    cross_chain_mean_se,
    decay_lag,
    extreme_rank_stats,
    fit_inverse_sqrt,
    ks_two_sample,
    pairwise_ks,
    prediction_interval,
    quantile,
    rank_percentiles,
    required_sample_size,
    sample_size_report,
)


def brute_force_ks(a, b):
    points = sorted(set(a) | set(b))
    best = 0.0
    for x in points:
        fa = sum(1 for v in a if v <= x) / len(a)
        fb = sum(1 for v in b if v <= x) / len(b)
        best = max(best, abs(fa - fb))
    return best


def ar1_series(seed, n=100_000, rho=0.9):
    noise = np.random.default_rng(seed).standard_normal(n)
    x = np.empty(n)
    x[0] = 0.0
    for t in range(1, n):
        x[t] = rho * x[t - 1] + noise[t]
    return x


def test_ecdf_basic():
    f = Ecdf.of([1.0, 2.0, 2.0, 5.0])
    assert f(0.0) == 0.0
    assert f(2.0) == 0.75
    assert f(5.0) == 1.0
    with pytest.raises(ValueError):
        Ecdf.of([])


def test_ks_identical_samples_zero():
    assert ks_two_sample([1, 2, 3], [1, 2, 3]) == 0.0


def test_ks_disjoint_supports_one():
    assert ks_two_sample([1, 2], [3, 4]) == 1.0


def test_ks_interleaved_half():
    assert ks_two_sample([1, 3], [2, 4]) == 0.5


def test_ks_empty_sample_errors():
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


@given(
    st.lists(st.integers(0, 9), min_size=1, max_size=50),
    st.lists(st.integers(0, 9), min_size=1, max_size=50),
)
def test_ks_matches_bruteforce_and_is_symmetric(a, b):
    d = ks_two_sample(a, b)
    assert d == brute_force_ks(a, b)
    assert d == ks_two_sample(b, a)
    assert 0.0 <= d <= 1.0


def test_pairwise_ks_counts():
    series = [[float(i), float(i + 1)] for i in range(10)]
    assert len(pairwise_ks(series[:2], 2)) == 1
    assert len(pairwise_ks(series, 2)) == 45
    same = [[1.0, 2.0, 3.0]] * 4
    assert pairwise_ks(same, 3) == [0.0] * 6


def test_pairwise_ks_rejects_short_series():
    with pytest.raises(ValueError, match="length"):
        pairwise_ks([[1.0], [1.0, 2.0]], 2)


def test_autocorrelation_lag_zero_is_one():
    assert autocorrelation([1.0, 5.0, 2.0], 0) == 1.0


def test_autocorrelation_alternating_is_minus_one():
    series = [1.0, -1.0] * 500
    assert autocorrelation(series, 1) == pytest.approx(-1.0, abs=1e-9)


def test_autocorrelation_iid_near_zero():
    draws = np.random.default_rng(8).random(100_000)
    assert abs(autocorrelation(draws, 1)) < 0.02


def test_autocorrelation_zero_variance_errors():
    with pytest.raises(ValueError, match="variance"):
        autocorrelation([3.0, 3.0, 3.0], 1)


def test_decay_lag_white_noise_small():
    draws = np.random.default_rng(12).random(100_000)
    assert decay_lag(draws) <= 5


def test_decay_lag_ar1_matches_closed_form():
    # 0.9^L <= 0.01 at L = 44; sampling noise allows +-50%.
    lag = decay_lag(ar1_series(3))
    assert 22 <= lag <= 66


def test_decay_lag_never_reached_raises():
    draws = np.random.default_rng(5).random(2_000)
    with pytest.raises(NonDecayingError):
        decay_lag(draws, threshold=-0.5)


def test_fit_inverse_sqrt_exact():
    points = [(n, 2.0 / math.sqrt(n)) for n in (100, 400, 1600)]
    fit = fit_inverse_sqrt(points)
    assert fit.coefficient == pytest.approx(2.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_inverse_sqrt_requires_two_distinct_n():
    with pytest.raises(ValueError):
        fit_inverse_sqrt([(100, 0.1), (100, 0.2)])


def test_fit_inverse_sqrt_constant_y_reports_honest_r2():
    fit = fit_inverse_sqrt([(100, 0.3), (400, 0.3), (1600, 0.3)])
    assert fit.r_squared <= 0


def test_required_sample_size_smirnov_constant():
    n = required_sample_size(math.sqrt(math.pi) * math.log(2))
    assert 15091 <= n <= 15096
    assert required_sample_size(1.22852) in range(15091, 15097)


def test_required_sample_size_reported_coefficient():
    assert required_sample_size(17.65) == 3_115_225


def test_required_sample_size_degenerate():
    assert required_sample_size(0.0) == 1


def test_quantile_rules():
    assert quantile([3, 1, 2], 0.0) == 1
    assert quantile([3, 1, 2], 1.0) == 3
    assert quantile([1, 2, 3, 4], 0.5) == 2.5
    assert quantile([7.0], 0.3) == 7.0


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=30), st.floats(0, 1), st.floats(0, 1))
def test_quantile_monotone_in_q(values, q1, q2):
    lo, hi = sorted((q1, q2))
    assert quantile(values, lo) <= quantile(values, hi)


def test_prediction_interval_collapsed():
    points = {n: [5.0 / math.sqrt(n)] * 10 for n in (100, 400, 900)}
    lo_fit, hi_fit = prediction_interval(points)
    assert lo_fit.coefficient == pytest.approx(5.0, abs=1e-12)
    assert hi_fit.coefficient == pytest.approx(5.0, abs=1e-12)


def test_prediction_interval_brackets_mean_fit():
    rng = np.random.default_rng(2)
    points = {n: (1.2 / math.sqrt(n)) * rng.uniform(0.5, 1.5, size=45) for n in (1000, 4000, 16000)}
    lo_fit, hi_fit = prediction_interval(points)
    mean_fit = fit_inverse_sqrt([(n, float(np.mean(ds))) for n, ds in points.items()])
    assert lo_fit.coefficient <= mean_fit.coefficient <= hi_fit.coefficient


def test_smirnov_mean_d_sqrt_n():
    # For i.i.d. U(0,1) pairs, E[D_nn * sqrt(n)] approaches sqrt(pi)*ln2 ~ 1.2285.
    rng = np.random.default_rng(99)
    n = 1000
    scaled = [ks_two_sample(rng.random(n), rng.random(n)) * math.sqrt(n) for _ in range(200)]
    assert 1.0 <= np.mean(scaled) <= 1.5


def test_sample_size_report_identical_chains():
    chain = list(np.random.default_rng(1).random(4_000))
    report = sample_size_report({"m": [chain] * 10}, grid=[500, 1000, 2000, 4000])
    m = report.per_measure["m"]
    assert m.required_n_ks == 1
    assert all(d == 0.0 for ds in m.d_values.values() for d in ds)
    assert report.recommended_n == m.required_n_autocorr == 1000 * m.decay_lag


def test_sample_size_report_white_noise_matches_iid_prediction():
    # Two independent U(0,1) chains: the fitted requirement should land within
    # a factor of 4 of the Smirnov closed-form 15,093.
    rng = np.random.default_rng(7)
    chains = [list(rng.random(1_000_000)) for _ in range(2)]
    report = sample_size_report({"u": chains})
    required = report.per_measure["u"].required_n_ks
    assert 15093 / 4 <= required <= 15093 * 4


def test_sample_size_report_requires_two_chains():
    with pytest.raises(ValueError, match="2 chains"):
        sample_size_report({"m": [[1.0, 2.0, 3.0]]})


def test_extreme_rank_stats_single_rank():
    report = extreme_rank_stats(np.array([[0.3], [0.4], [0.5]]), [0.35])
    assert report.per_rank_below == (pytest.approx(1 / 3),)


def test_extreme_rank_stats_at_minimum_is_zero():
    report = extreme_rank_stats(np.array([[0.3], [0.4], [0.5]]), [0.3])
    assert report.per_rank_below == (0.0,)
    assert report.tail_q == 0.0


def test_extreme_rank_stats_joint_probability():
    rng = np.random.default_rng(0)
    matrix = np.sort(rng.random((500, 3)), axis=1)
    enacted = matrix[17]
    report = extreme_rank_stats(matrix, enacted)
    assert 0.0 <= report.joint_probability <= 1.0
    # The enacted row itself is at least as extreme as its own tail_q.
    assert report.joint_probability > 0.0


def test_extreme_rank_stats_empty_errors():
    with pytest.raises(ValueError):
        extreme_rank_stats(np.empty((0, 3)), [0.1, 0.2, 0.3])


def test_rank_percentiles_constant():
    matrix = np.full((50, 2), 0.4)
    stats = rank_percentiles(matrix, 1)
    assert set(stats.values()) == {0.4}


def test_rank_percentiles_interpolation():
    matrix = (np.arange(1, 101) / 100).reshape(-1, 1)
    stats = rank_percentiles(matrix, 0)
    assert stats["p50"] == pytest.approx(0.505)
    ordered = [stats[k] for k in ("p1", "p25", "p50", "p75", "p99")]
    assert ordered == sorted(ordered)


def test_cross_chain_mean_se():
    mean, se = cross_chain_mean_se([[1.0, 1.0], [3.0, 3.0]])
    assert mean == 2.0
    assert se == pytest.approx(1.0)
    mean, se = cross_chain_mean_se([[2.0, 4.0]] * 5)
    assert mean == 3.0
    assert se == 0.0
    with pytest.raises(ValueError):
        cross_chain_mean_se([[1.0]])
