"""The MGF-based weighted L2 statistic and related quantities.

The statistic compares the empirical moment generating function
``M_n(t) = mean_j exp(t'y_j)`` of standardised data with ``exp(||t||^2 / 2)``
under the weight ``exp(-beta ||t||^2)``::

    T = n * integral (M_n(t) - exp(||t||^2/2))^2 exp(-beta ||t||^2) dt

and has the closed form (for ``beta > 1``)::

    T = pi^{d/2} [ (1/n) sum_{i,j} beta^{-d/2} exp(||y_i + y_j||^2 / (4 beta))
                   + n (beta - 1)^{-d/2}
                   - 2 sum_j (beta - 1/2)^{-d/2} exp(||y_j||^2 / (4 beta - 2)) ]

Critical values are usually tabulated for ``T / pi^{d/2}`` (``t_scaled``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BetaOutOfRange, NonFiniteResult
from .linalg import as_matrix

_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class StatisticValue:
    t_raw: float
    t_scaled: float
    n: int
    d: int
    beta: float


@dataclass(frozen=True)
class SkewnessSummary:
    b1d: float
    b1d_tilde: float
    b2d: float

    @property
    def limit_combo(self) -> float:
        return 2.0 * self.b1d + 3.0 * self.b1d_tilde


def check_beta(beta, lower=1.0) -> float:
    b = float(beta)
    if not (b > lower) or not math.isfinite(b):
        raise BetaOutOfRange(f"beta must be a finite number > {lower:g}, got {beta!r}")
    return b


def _scaled_tn(y: np.ndarray, beta: float) -> float:
    """``T / pi^{d/2}`` for the rows of ``y``.

    Evaluated as ``beta^{-d/2} / n * (sum_ij expm1(a_ij) - 2n sum_j expm1(c_j)
    + n^2 expm1(c0))``, which is algebraically identical to the closed form
    but keeps full relative accuracy when ``beta`` is large.
    """
    n, d = y.shape
    sq = np.einsum("ij,ij->i", y, y)
    top = float(sq.max()) / beta if n else 0.0
    if top > _EXP_LIMIT:
        raise NonFiniteResult(
            f"largest exponent {top:.1f} would overflow; beta={beta} is too small "
            "for data this far from the centre"
        )
    pair = kernels.pair_expm1_sum(y, 0.25 / beta)
    c0 = -0.5 * d * math.log1p(-1.0 / beta)
    cj = -0.5 * d * math.log1p(-0.5 / beta) + sq / (4.0 * beta - 2.0)
    single = math.fsum(np.expm1(cj))
    inner = pair / n - 2.0 * single + n * math.expm1(c0)
    if inner < 0.0:
        # raw terms of the closed form are O(n)
        if inner < -1e-10 * 4.0 * n:
            raise NonFiniteResult(f"statistic evaluated to {inner:.3e} < 0")
        inner = 0.0
    return beta ** (-0.5 * d) * inner


def compute_tn_beta(y, beta) -> StatisticValue:
    """Closed-form value of the MGF statistic.

    Parameters
    ----------
    y : ScaledResiduals or array_like, shape (n, d)
        Scaled residuals (or GARCH residuals, used unchanged).
    beta : float
        Weight decay, ``beta > 1``.

    Returns
    -------
    StatisticValue
        ``t_raw`` is the statistic, ``t_scaled = t_raw / pi^{d/2}``.
    """
    b = check_beta(beta)
    a = as_matrix(y)
    n, d = a.shape
    if not np.all(np.isfinite(a)):
        raise NonFiniteResult("residuals contain non-finite values")
    scaled = _scaled_tn(a, b)
    raw = scaled * math.pi ** (0.5 * d)
    return StatisticValue(raw, scaled, n, d, b)


def tn_scaled_many(y, betas) -> np.ndarray:
    """``t_scaled`` for several weights on the same residuals."""
    a = as_matrix(y)
    return np.array([_scaled_tn(a, check_beta(b)) for b in betas])


def _block_gram_sum(y, f, block=2048):
    n = y.shape[0]
    parts = []
    for i0 in range(0, n, block):
        g = y[i0:i0 + block] @ y.T
        parts.append(float(np.sum(f(g))))
    return math.fsum(parts)


def mardia_skewness(y) -> float:
    """Mardia's ``b_{1,d} = n^{-2} sum_{j,k} (y_j' y_k)^3``."""
    a = as_matrix(y)
    n = a.shape[0]
    return _block_gram_sum(a, lambda g: g ** 3) / n**2


def mrs_skewness(y) -> float:
    """Mori-Rohatgi-Szekely skewness ``|| n^{-1} sum_j y_j ||y_j||^2 ||^2``."""
    a = as_matrix(y)
    v = (a * np.einsum("ij,ij->i", a, a)[:, None]).mean(axis=0)
    return float(v @ v)


def mardia_kurtosis(y) -> float:
    """Mardia's ``b_{2,d} = n^{-1} sum_j ||y_j||^4``."""
    a = as_matrix(y)
    return float(np.mean(np.einsum("ij,ij->i", a, a) ** 2))


def skewness_limit_statistic(y) -> float:
    """``2 b_{1,d} + 3 b~_{1,d}``, the large-``beta`` limit of the rescaled statistic."""
    return 2.0 * mardia_skewness(y) + 3.0 * mrs_skewness(y)


def skewness_summary(y) -> SkewnessSummary:
    return SkewnessSummary(mardia_skewness(y), mrs_skewness(y), mardia_kurtosis(y))


def rescaled_for_limit(y, beta) -> float:
    """``beta^{3 + d/2} * 96 * T / (n pi^{d/2})``."""
    a = as_matrix(y)
    n, d = a.shape
    b = check_beta(beta)
    return b ** (3.0 + 0.5 * d) * 96.0 * _scaled_tn(a, b) / n


def extrapolate_limit(y, betas=(100.0, 200.0, 400.0, 800.0)) -> float:
    """Polynomial extrapolation in ``1/beta`` of :func:`rescaled_for_limit` to ``beta = inf``."""
    h = np.array([1.0 / b for b in betas])
    f = np.array([rescaled_for_limit(y, b) for b in betas])
    # Neville's scheme evaluated at h = 0
    p = f.copy()
    m = len(h)
    for k in range(1, m):
        for i in range(m - k):
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i])
    return float(p[0])


# below this beta the closed forms are accurate; above it they cancel badly
# and the power series in 1/(beta - 1) converges with ratio <= 1/4
_SERIES_BETA = 3.0


def _moment_series(h: float, ratio: float, weight) -> float:
    # sum_{k>=3} weight(k) * Gamma(h + k) / (Gamma(h) k!) * ratio^k
    a = math.exp(math.lgamma(h + 3.0) - math.lgamma(h)) / 6.0
    total = 0.0
    k = 3
    while True:
        term = weight(k) * a * ratio**k
        total += term
        if term <= 1e-17 * total or k > 2000:
            return total
        a *= (h + k) / (k + 1.0)
        k += 1


def asymptotic_mean(d: int, beta) -> float:
    """Mean of the limiting null distribution (requires ``beta > 2``)."""
    b = check_beta(beta, 2.0)
    g = b - 1.0
    h = 0.5 * d
    if b >= _SERIES_BETA:
        return (math.pi / g) ** h * _moment_series(h, 1.0 / g, lambda k: 1.0)
    return math.pi**h * (
        (b - 2.0) ** -h - g**-h - d / (2.0 * g ** (h + 1)) - d * (d + 2) / (8.0 * g ** (h + 2))
    )


def asymptotic_variance(d: int, beta) -> float:
    """Variance of the limiting null distribution (requires ``beta > 2``)."""
    b = check_beta(beta, 2.0)
    g = b - 1.0
    h = 0.5 * d
    if b >= _SERIES_BETA:
        s = _moment_series(h, 1.0 / (g * g), lambda j: 1.0 - 2.0 * (1 + j + 2 * j * j) / 4.0**j)
        return 2.0 * (math.pi / g) ** d * s
    eta = 4.0 * g * g - 1.0
    two_d = 2.0**d
    return 2.0 * math.pi**d * (
        (b * (b - 2.0)) ** -h
        - 2.0 ** (d + 1) / eta**h
        - 3 * d * two_d / eta ** (h + 1)
        - d * (d + 2) * two_d / eta ** (h + 2)
        + g ** -d
        + d / (2.0 * g ** (d + 2))
        + 3.0 * d * (d + 2) / (64.0 * g ** (d + 4))
    )


def exp_remainder3(x):
    """``exp(x) - 1 - x - x^2/2`` without cancellation near zero."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.expm1(x) - x - 0.5 * x * x
    small = np.abs(x) < 0.2
    if np.any(small):
        xs = x[small]
        term = xs**3 / 6.0
        acc = term.copy()
        for k in range(4, 14):
            term = term * xs / k
            acc += term
        out[small] = acc
    return float(out[0]) if scalar else out


def kernel_c(s, t) -> float:
    """Covariance kernel of the limiting Gaussian process.

    ``C(s, t) = exp((|s|^2 + |t|^2)/2) (e^{s't} - 1 - s't - (s't)^2/2)``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = float(s @ t)
    return float(math.exp(0.5 * (s @ s + t @ t)) * exp_remainder3(x))


def hw_statistic(y, beta_hw) -> float:
    """BHEP (empirical characteristic function) statistic, smoothing ``beta_hw``.

    ``n * integral |psi_n(t) - exp(-|t|^2/2)|^2 phi_beta(t) dt`` where ``psi_n``
    is the empirical characteristic function and ``phi_beta`` the
    ``N(0, beta^2 I)`` density; closed form::

        (1/n) sum_{j,k} exp(-beta^2 |y_j - y_k|^2 / 2)
        - 2 (1 + beta^2)^{-d/2} sum_j exp(-beta^2 |y_j|^2 / (2 (1 + beta^2)))
        + n (1 + 2 beta^2)^{-d/2}
    """
    bh = float(beta_hw)
    if not bh > 0.0:
        raise BetaOutOfRange(f"beta_hw must be > 0, got {beta_hw!r}")
    a = as_matrix(y)
    n, d = a.shape
    b2 = bh * bh
    pair = kernels.pair_gauss_sum(a, 0.5 * b2)
    sq = np.einsum("ij,ij->i", a, a)
    single = math.fsum(np.exp(-b2 * sq / (2.0 * (1.0 + b2))))
    return pair / n - 2.0 * (1.0 + b2) ** (-0.5 * d) * single + n * (1.0 + 2.0 * b2) ** (-0.5 * d)
