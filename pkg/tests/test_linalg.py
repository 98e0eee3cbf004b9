import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgfnorm.errors import DataError, SingularCovariance
from mgfnorm.linalg import (GARCH_RESIDUAL, IID_STANDARDIZED, ScaledResiduals, as_sample,
                            sample_mean_cov, scale_residuals, sym_inv_sqrt, sym_sqrt)

from conftest import random_spd


def test_mean_cov_uses_divisor_n():
    mean, cov = sample_mean_cov(np.array([[0.0], [2.0], [0.0], [2.0]]))
    assert mean[0] == 1.0
    assert cov[0, 0] == 1.0


def test_mean_cov_large_gaussian(rng):
    _, cov = sample_mean_cov(rng.standard_normal((10_000, 2)))
    assert np.all(np.abs(cov - np.eye(2)) < 0.1)


def test_repeated_column_is_singular(rng):
    x = rng.standard_normal((30, 2))
    with pytest.raises(SingularCovariance):
        sample_mean_cov(np.column_stack([x, x[:, 0]]))


def test_too_few_rows_rejected(rng):
    with pytest.raises(DataError):
        sample_mean_cov(rng.standard_normal((2, 2)))


def test_non_finite_rejected():
    with pytest.raises(DataError):
        as_sample([[0.0, 1.0], [np.nan, 2.0], [1.0, 1.0]])


def test_inv_sqrt_identity_and_diagonal():
    assert np.allclose(sym_inv_sqrt(np.eye(3)), np.eye(3), atol=1e-15)
    assert np.allclose(sym_inv_sqrt(np.diag([4.0, 9.0])), np.diag([0.5, 1.0 / 3.0]), atol=1e-15)


@pytest.mark.parametrize("d", [1, 2, 3, 6])
def test_inv_sqrt_defining_identity(rng, d):
    m = random_spd(rng, d, cond=1e3)
    r = sym_inv_sqrt(m)
    assert np.array_equal(r, r.T)
    assert np.allclose(r @ m @ r, np.eye(d), atol=1e-10)
    s = sym_sqrt(m)
    assert np.allclose(s @ s, m, atol=1e-10 * np.abs(m).max())


def test_inv_sqrt_rejects_asymmetric():
    with pytest.raises(DataError):
        sym_inv_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_scale_residuals_two_points():
    y = scale_residuals([0.0, 2.0, 0.0, 2.0])
    assert y.source == IID_STANDARDIZED
    assert np.allclose(y.y[:, 0], [-1.0, 1.0, -1.0, 1.0])


@settings(max_examples=60, deadline=None)
@given(n=st.integers(6, 60), d=st.integers(1, 4), seed=st.integers(0, 2**31))
def test_scaled_residual_identities(n, d, seed):
    x = np.random.default_rng(seed).standard_t(4, (n, d)) * 3.0 + 7.0
    y = scale_residuals(x).y
    assert np.allclose(y.sum(axis=0), 0.0, atol=1e-8 * n)
    assert np.allclose(y.T @ y / n, np.eye(d), atol=1e-8)
    assert abs(np.sum(y * y) - n * d) < 1e-8 * n * d


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(1, 4))
def test_gram_matrix_affine_invariant(seed, d):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((25, d))
    a = rng.standard_normal((d, d)) + 2.0 * np.eye(d)
    if abs(np.linalg.det(a)) < 0.1:
        a += 3.0 * np.eye(d)
    g1 = scale_residuals(x).y @ scale_residuals(x).y.T
    y2 = scale_residuals(x @ a.T + rng.standard_normal(d)).y
    g2 = y2 @ y2.T
    assert np.allclose(g1, g2, rtol=1e-8, atol=1e-8)


def test_scaled_residuals_tags():
    r = ScaledResiduals(np.zeros((3, 2)), GARCH_RESIDUAL)
    assert (r.n, r.d, r.source) == (3, 2, "garch-residual")
