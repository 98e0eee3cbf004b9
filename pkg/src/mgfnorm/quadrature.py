"""Numerical-integration oracles.

These evaluate the defining integrals directly and are deliberately kept
independent of the closed forms in :mod:`mgfnorm.statistic`; they exist to
cross-check those formulas.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy import integrate
from scipy.special import gammaln

from .errors import DimensionTooLarge
from .linalg import as_matrix
from .statistic import check_beta, exp_remainder3

MAX_QUAD_DIM = 3


def _product_rule(d, order):
    x, w = hermgauss(order)
    nodes = np.array(list(itertools.product(x, repeat=d)))
    weights = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1)
    return nodes, weights


def _check_dim(d):
    if d > MAX_QUAD_DIM:
        raise DimensionTooLarge(f"quadrature oracle supports d <= {MAX_QUAD_DIM}, got {d}")


def tn_beta_quadrature(y, beta, quad_order: int = 64) -> float:
    """``n * integral (M_n(t) - m(t))^2 exp(-beta |t|^2) dt`` by Gauss-Hermite.

    The integrand is rewritten as ``(M_n(t) e^{-|t|^2/2} - 1)^2`` against the
    Gaussian weight ``exp(-(beta - 1)|t|^2)``, which the product rule absorbs
    through ``t = u / sqrt(beta - 1)``.
    """
    b = check_beta(beta)
    a = as_matrix(y)
    n, d = a.shape
    _check_dim(d)
    u, w = _product_rule(d, quad_order)
    t = u / math.sqrt(b - 1.0)
    half_sq = 0.5 * np.einsum("kd,kd->k", t, t)
    # mean_j exp(t'y_j - |t|^2/2), accumulated in log space
    expo = t @ a.T - half_sq[:, None]
    mx = expo.max(axis=1)
    down = np.exp(mx) * np.exp(expo - mx[:, None]).mean(axis=1)
    vals = (down - 1.0) ** 2
    return float(n * (b - 1.0) ** (-0.5 * d) * np.sum(w * vals))


def hw_quadrature(y, beta_hw, quad_order: int = 64) -> float:
    """BHEP statistic by Gauss-Hermite integration of its defining integral."""
    a = as_matrix(y)
    n, d = a.shape
    _check_dim(d)
    u, w = _product_rule(d, quad_order)
    t = math.sqrt(2.0) * float(beta_hw) * u
    arg = t @ a.T
    re = np.cos(arg).mean(axis=1) - np.exp(-0.5 * np.einsum("kd,kd->k", t, t))
    im = np.sin(arg).mean(axis=1)
    return float(n * math.pi ** (-0.5 * d) * np.sum(w * (re * re + im * im)))


def _sphere_area(d):
    return 2.0 * math.pi ** (0.5 * d) / math.exp(gammaln(0.5 * d))


def _log_remainder_sq_weighted(x, log_weight):
    # log of (e^x - 1 - x - x^2/2)^2 + log_weight, stable for large x
    if x > 30.0:
        tail = (1.0 + x + 0.5 * x * x) * math.exp(-x)
        return 2.0 * x + 2.0 * math.log1p(-tail) + log_weight
    r = float(exp_remainder3(x))
    if r == 0.0:
        return -math.inf
    return 2.0 * math.log(abs(r)) + log_weight


def asymptotic_mean_quadrature(d: int, beta) -> float:
    """``integral C(t,t) exp(-beta |t|^2) dt`` by adaptive quadrature in the radius."""
    b = check_beta(beta, 2.0)

    def f(r):
        r2 = r * r
        if r2 > 30.0:
            tail = (1.0 + r2 + 0.5 * r2 * r2) * math.exp(-r2)
            return r ** (d - 1) * math.exp((2.0 - b) * r2) * (1.0 - tail)
        return r ** (d - 1) * math.exp((1.0 - b) * r2) * float(exp_remainder3(r2))

    val, _ = integrate.quad(f, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=500)
    return _sphere_area(d) * val


def asymptotic_variance_quadrature(d: int, beta) -> float:
    """``2 * double integral C(s,t)^2 w(s) w(t)`` reduced by rotational symmetry.

    With ``r = |s|`` and ``u`` the component of ``t`` along ``s`` the
    orthogonal part of ``t`` integrates in closed form, leaving a
    two-dimensional integral that is done adaptively.
    """
    b = check_beta(beta, 2.0)
    g = b - 1.0

    def inner(r):
        def h(u):
            lw = -g * (r * r + u * u)
            lv = _log_remainder_sq_weighted(r * u, lw)
            return 0.0 if lv == -math.inf else math.exp(lv)

        # the integrand peaks near u = r / (b - 2) for large r
        peak = max(1.0, 2.0 * r / (b - 2.0))
        lo, _ = integrate.quad(h, -np.inf, 0.0, epsabs=0.0, epsrel=1e-12, limit=400)
        mid, _ = integrate.quad(h, 0.0, peak, epsabs=0.0, epsrel=1e-12, limit=400)
        hi, _ = integrate.quad(h, peak, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
        return r ** (d - 1) * (lo + mid + hi)

    val, _ = integrate.quad(inner, 0.0, np.inf, epsabs=0.0, epsrel=1e-11, limit=400)
    perp = (math.pi / g) ** (0.5 * (d - 1))
    return 2.0 * perp * _sphere_area(d) * val
