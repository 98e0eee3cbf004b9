import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgfnorm.errors import BetaOutOfRange, DimensionTooLarge, NonFiniteResult
from mgfnorm.linalg import scale_residuals
from mgfnorm.quadrature import (asymptotic_mean_quadrature, asymptotic_variance_quadrature,
                                hw_quadrature, tn_beta_quadrature)
from mgfnorm.statistic import (asymptotic_mean, asymptotic_variance, compute_tn_beta,
                               exp_remainder3, extrapolate_limit, hw_statistic, kernel_c,
                               mardia_kurtosis, mardia_skewness, mrs_skewness,
                               skewness_limit_statistic, skewness_summary, tn_scaled_many)

ZERO_VALUE = math.sqrt(math.pi) * (1.0 / math.sqrt(2.0) + 1.0 - 2.0 / math.sqrt(1.5))
CROSS = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


def test_zero_residuals_closed_form():
    v = compute_tn_beta(np.zeros((1, 1)), 2.0)
    assert v.t_raw == pytest.approx(0.131363, abs=5e-7)
    assert v.t_raw == pytest.approx(ZERO_VALUE, rel=1e-14)
    assert tn_beta_quadrature(np.zeros((1, 1)), 2.0, 64) == pytest.approx(ZERO_VALUE, rel=1e-12)


def test_quadrature_self_convergence(rng):
    y = scale_residuals(rng.standard_normal((10, 2)))
    a, b = tn_beta_quadrature(y, 3.0, 48), tn_beta_quadrature(y, 3.0, 64)
    assert a == pytest.approx(b, rel=1e-8)


def test_quadrature_matches_closed_form_1d(rng):
    y = scale_residuals(rng.standard_normal((20, 1)))
    assert compute_tn_beta(y, 2.5).t_raw == pytest.approx(tn_beta_quadrature(y, 2.5), rel=1e-6)


def test_quadrature_dimension_limit():
    with pytest.raises(DimensionTooLarge):
        tn_beta_quadrature(np.zeros((5, 4)), 3.0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(3, 40), d=st.integers(1, 4), beta=st.floats(1.2, 50.0), seed=st.integers(0, 2**31))
def test_statistic_nonnegative_and_scaled(n, d, beta, seed):
    x = np.random.default_rng(seed).standard_normal((n, d))
    v = compute_tn_beta(x, beta)
    assert v.t_raw >= 0.0
    assert v.t_scaled * math.pi ** (d / 2) == pytest.approx(v.t_raw, rel=1e-15)
    assert (v.n, v.d, v.beta) == (n, d, beta)


def test_many_betas_matches_single(rng):
    y = scale_residuals(rng.standard_normal((30, 3)))
    many = tn_scaled_many(y, [2.5, 3.0, 10.0])
    assert np.allclose(many, [compute_tn_beta(y, b).t_scaled for b in (2.5, 3.0, 10.0)], rtol=0)


@pytest.mark.parametrize("beta", [1.0, 0.5, -3.0, float("nan"), float("inf")])
def test_beta_out_of_range(beta):
    with pytest.raises(BetaOutOfRange):
        compute_tn_beta(np.zeros((2, 1)), beta)


def test_overflow_is_reported():
    x = np.zeros((2, 1))
    x[0, 0] = 1e3
    with pytest.raises(NonFiniteResult):
        compute_tn_beta(x, 1.001)


def test_cross_configuration_moments():
    assert mardia_skewness(CROSS) == 0.0
    assert mrs_skewness(CROSS) == 0.0
    assert mardia_kurtosis(CROSS) == 1.0
    assert skewness_limit_statistic(CROSS) == 0.0
    pair = np.array([[-1.0], [1.0]])
    assert mardia_skewness(pair) == 0.0
    assert mrs_skewness(pair) == 0.0
    assert mardia_kurtosis(pair) == 1.0


def test_moments_of_large_normal_sample():
    rng = np.random.default_rng(5)
    assert mardia_skewness(scale_residuals(rng.standard_normal((10_000, 3)))) < 0.05
    assert mardia_kurtosis(scale_residuals(rng.standard_normal((10_000, 2)))) == pytest.approx(8.0, abs=0.3)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 30), d=st.integers(1, 3), seed=st.integers(0, 2**31))
def test_mrs_against_double_sum(n, d, seed):
    y = np.random.default_rng(seed).standard_normal((n, d))
    sq = np.sum(y * y, axis=1)
    direct = np.sum((y @ y.T) * np.outer(sq, sq)) / n**2
    assert mrs_skewness(y) == pytest.approx(direct, rel=1e-12, abs=1e-14)
    g = y @ y.T
    assert mardia_skewness(y) == pytest.approx(np.sum(g**3) / n**2, rel=1e-12, abs=1e-14)


def test_skewed_1d_sample_limit():
    y = scale_residuals(np.array([-1.0, -1.0, 2.0])).y
    g1 = np.mean(y[:, 0] ** 3)
    # in one dimension both skewness measures reduce to the squared third moment
    assert skewness_limit_statistic(y) == pytest.approx(5.0 * g1**2, rel=1e-12)
    assert extrapolate_limit(y) == pytest.approx(5.0 * g1**2, rel=1e-3)
    s = skewness_summary(y)
    assert s.limit_combo == pytest.approx(5.0 * g1**2, rel=1e-12)


def test_asymptotic_mean_hand_value():
    hand = math.sqrt(math.pi) * (1 - 1 / math.sqrt(2) - 1 / (2 * 2**1.5) - 3 / (8 * 2**2.5))
    assert asymptotic_mean(1, 3.0) == pytest.approx(hand, rel=1e-13)
    assert asymptotic_mean(1, 3.0) == pytest.approx(0.08831298, abs=1e-8)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_series_and_closed_form_agree_at_switch(d):
    import mgfnorm.statistic as st_mod
    for beta in (2.5, 3.0, 4.0):
        old = st_mod._SERIES_BETA
        try:
            st_mod._SERIES_BETA = math.inf
            closed = asymptotic_mean(d, beta), asymptotic_variance(d, beta)
        finally:
            st_mod._SERIES_BETA = old
        assert asymptotic_mean(d, beta) == pytest.approx(closed[0], rel=1e-12)
        assert asymptotic_variance(d, beta) == pytest.approx(closed[1], rel=1e-11)


@pytest.mark.parametrize("d,beta", [(1, 2.2), (2, 3.0), (3, 7.5), (4, 3.0)])
def test_asymptotic_mean_oracle(d, beta):
    assert asymptotic_mean(d, beta) == pytest.approx(asymptotic_mean_quadrature(d, beta), rel=1e-8)


@pytest.mark.parametrize("d,beta", [(1, 2.5), (2, 4.0)])
def test_asymptotic_variance_oracle(d, beta):
    v = asymptotic_variance(d, beta)
    assert v > 0
    assert v == pytest.approx(asymptotic_variance_quadrature(d, beta), rel=1e-6)


@pytest.mark.parametrize("d", [1, 2, 5])
def test_asymptotic_moments_decrease_to_zero(d):
    betas = [2.5, 5.0, 10.0, 100.0, 1000.0]
    means = [asymptotic_mean(d, b) for b in betas]
    assert all(a > b > 0 for a, b in zip(means, means[1:]))
    assert means[-1] < 1e-8
    var = [asymptotic_variance(d, b) for b in betas]
    assert all(a > b > 0 for a, b in zip(var, var[1:]))


def test_asymptotic_requires_beta_above_two():
    with pytest.raises(BetaOutOfRange):
        asymptotic_mean(2, 2.0)
    with pytest.raises(BetaOutOfRange):
        asymptotic_variance(2, 1.5)


def test_exp_remainder3_small_and_large():
    for x in (1e-8, -1e-3, 0.1999, 0.2, 5.0, -5.0):
        exact = math.expm1(x) - x - x * x / 2
        if abs(x) < 0.2:
            exact = sum(x**k / math.factorial(k) for k in range(3, 20))
        assert exp_remainder3(x) == pytest.approx(exact, rel=1e-13)
    arr = exp_remainder3(np.array([0.0, 0.1, 1.0]))
    assert arr.shape == (3,)


def test_kernel_c_properties(rng):
    t = rng.standard_normal(3)
    assert kernel_c(np.zeros(3), t) == 0.0
    s = rng.standard_normal(3)
    assert kernel_c(s, t) == pytest.approx(kernel_c(t, s), rel=1e-15)
    assert kernel_c(s, s) > 0


def test_kernel_c_matches_process_covariance():
    # W_n(t) = sqrt(n) (M_n(t) e^{-|t|^2/2} ... ) reduces in the limit to a
    # process with covariance e^{(|s|^2+|t|^2)/2} R3(s't); check by simulation
    rng = np.random.default_rng(11)
    n, reps = 400, 4000
    s, t = np.array([0.4, -0.2]), np.array([0.3, 0.5])
    w = np.empty((reps, 2))
    for k in range(reps):
        y = scale_residuals(rng.standard_normal((n, 2))).y
        for j, u in enumerate((s, t)):
            w[k, j] = math.sqrt(n) * (np.mean(np.exp(y @ u)) - math.exp(0.5 * u @ u))
    cov = np.mean(w[:, 0] * w[:, 1]) - w[:, 0].mean() * w[:, 1].mean()
    prod = (w[:, 0] - w[:, 0].mean()) * (w[:, 1] - w[:, 1].mean())
    se = prod.std() / math.sqrt(reps)
    assert abs(cov - kernel_c(s, t)) < 3.5 * se + 0.02 * abs(kernel_c(s, t))


def test_hw_zero_residuals():
    expected = 1.0 - 2.0 / math.sqrt(2.0) + 1.0 / math.sqrt(3.0)
    assert hw_statistic(np.zeros((1, 1)), 1.0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("d,bh", [(1, 0.5), (1, 1.0), (2, 1.0)])
def test_hw_matches_quadrature(rng, d, bh):
    y = scale_residuals(rng.standard_normal((15, d)))
    assert hw_statistic(y, bh) == pytest.approx(hw_quadrature(y, bh), rel=1e-6, abs=1e-10)


def test_hw_rejects_nonpositive_smoothing():
    with pytest.raises(BetaOutOfRange):
        hw_statistic(np.zeros((2, 1)), 0.0)


def test_block_partition_independence(rng):
    from mgfnorm import _fallback, kernels
    y = rng.standard_normal((300, 3))
    assert kernels.pair_expm1_sum(y, 0.1) == pytest.approx(_fallback.pair_expm1_sum(y, 0.1), rel=1e-12)
