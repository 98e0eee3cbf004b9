"""The compiled kernels and the numpy fallback must agree."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgfnorm import _fallback, kernels
from mgfnorm.garch import benchmark_design

_kernels = pytest.importorskip("mgfnorm._kernels")


def test_backend_selected():
    assert kernels.BACKEND == "cython"


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 80), d=st.integers(1, 5), c=st.floats(0.01, 0.5), seed=st.integers(0, 2**31))
def test_pair_sums_agree(n, d, c, seed):
    y = np.random.default_rng(seed).standard_normal((n, d))
    a, b = _kernels.pair_expm1_sum(y, c), _fallback.pair_expm1_sum(y, c)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
    a, b = _kernels.pair_gauss_sum(y, c), _fallback.pair_gauss_sum(y, c)
    assert a == pytest.approx(b, rel=1e-12)


def test_pair_expm1_matches_direct_sum(rng):
    y = rng.standard_normal((17, 3))
    s = y[:, None, :] + y[None, :, :]
    direct = np.sum(np.expm1(0.1 * np.sum(s * s, axis=2)))
    assert _kernels.pair_expm1_sum(y, 0.1) == pytest.approx(direct, rel=1e-13)


def _garch_inputs(d=2, p=1, q=1, n=120, seed=0):
    rng = np.random.default_rng(seed)
    base = benchmark_design(d, 0.4, 0.3)
    B = np.ascontiguousarray(np.concatenate([base.B * (0.5**k) for k in range(p)]))
    G = [base.Gamma * (0.5**k) for k in range(q)]
    G = np.ascontiguousarray(np.concatenate(G)) if G else np.zeros((0, d, d))
    return rng, base, B, G


@pytest.mark.parametrize("d,p,q", [(1, 1, 1), (2, 1, 1), (3, 2, 1), (2, 1, 2), (2, 1, 0)])
def test_garch_kernels_agree(d, p, q):
    rng, base, B, G = _garch_inputs(d, p, q)
    s0 = rng.uniform(0.5, 1.5, d)
    eps = rng.standard_normal((150, d))
    xk, sk, stk = _kernels.ccc_simulate(eps, base.b, B, G, base.R, s0, 1e12)
    xf, sf, stf = _fallback.ccc_simulate(eps, base.b, B, G, base.R, s0, 1e12)
    assert stk == stf == -1
    assert np.allclose(xk, xf, rtol=1e-12, atol=1e-14)
    assert np.allclose(_kernels.ccc_filter(xk, base.b, B, G, s0), sk, rtol=1e-14)
    assert np.allclose(_fallback.ccc_filter(xk, base.b, B, G, s0), sk, rtol=1e-12)
    rinv = np.linalg.inv(base.R)
    ld = float(np.log(np.linalg.det(base.R)))
    a = _kernels.ccc_negloglik(xk, base.b, B, G, s0, rinv, ld)
    b = _fallback.ccc_negloglik(xk, base.b, B, G, s0, rinv, ld)
    assert a == pytest.approx(b, rel=1e-12)
    gk = _kernels.ccc_negloglik_grad(xk, base.b, B, G, s0, rinv, ld)
    gf = _fallback.ccc_negloglik_grad(xk, base.b, B, G, s0, rinv, ld)
    for u, v in zip(gk, gf):
        assert np.allclose(u, v, rtol=1e-10, atol=1e-10)


def test_negloglik_gradient_matches_finite_differences():
    rng, base, B, G = _garch_inputs(2, 2, 1, seed=3)
    s0 = np.array([0.7, 1.2])
    x = _kernels.ccc_simulate(rng.standard_normal((200, 2)), base.b, B, G, base.R, s0, 1e12)[0]
    rinv = np.linalg.inv(base.R)
    ld = float(np.log(np.linalg.det(base.R)))
    f = lambda b_, B_, G_: _kernels.ccc_negloglik(x, b_, B_, G_, s0, rinv, ld)  # noqa: E731
    _, gb, gB, gG, _ = _kernels.ccc_negloglik_grad(x, base.b, B, G, s0, rinv, ld)
    h = 1e-6
    for idx in [(0, 0, 1), (1, 1, 0)]:
        E = np.zeros_like(B)
        E[idx] = h
        assert (f(base.b, B + E, G) - f(base.b, B - E, G)) / (2 * h) == pytest.approx(gB[idx], rel=1e-6)
    E = np.zeros_like(G)
    E[0, 1, 1] = h
    assert (f(base.b, B, G + E) - f(base.b, B, G - E)) / (2 * h) == pytest.approx(gG[0, 1, 1], rel=1e-6)
    e = np.array([h, 0.0])
    assert (f(base.b + e, B, G) - f(base.b - e, B, G)) / (2 * h) == pytest.approx(gb[0], rel=1e-6)


def test_negloglik_invalid_is_inf():
    x = np.ones((10, 1))
    v = _kernels.ccc_negloglik(x, np.array([-1.0]), np.zeros((1, 1, 1)), np.zeros((1, 1, 1)),
                               np.ones(1), np.eye(1), 0.0)
    assert v == np.inf
    assert _fallback.ccc_negloglik(x, np.array([-1.0]), np.zeros((1, 1, 1)), np.zeros((1, 1, 1)),
                                   np.ones(1), np.eye(1), 0.0) == np.inf


def test_simulate_reports_explosion():
    b = np.array([1.0])
    G = np.array([[[1.5]]])
    _, _, status = _kernels.ccc_simulate(np.ones((200, 1)), b, np.zeros((1, 1, 1)), G,
                                         np.eye(1), np.ones(1), 1e12)
    assert status > 0


@pytest.mark.parametrize("d", [1, 2, 4, 7])
def test_jacobi_sqrt(rng, d):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    m = (q * rng.uniform(0.1, 5.0, d)) @ q.T
    r = _kernels.sym_sqrt_small(np.ascontiguousarray(m))
    assert np.allclose(r, r.T, atol=1e-13)
    assert np.allclose(r @ r, m, atol=1e-12)
    assert np.allclose(r, _fallback.sym_sqrt_small(m), atol=1e-12)
