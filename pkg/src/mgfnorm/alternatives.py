"""Samplers for the heavy-tailed alternatives used in power studies.

Spec strings (as accepted by the CLI)::

    normal            standard normal
    t:5               multivariate Student t, 5 degrees of freedom
    ase:1.75          elliptically contoured alpha-stable, index 1.75
    gn:1.65           i.i.d. generalised-normal marginals, shape 1.65
    aep:0.4,1.182,1.820   i.i.d. asymmetric exponential power marginals

Scale conventions.  The test is affine invariant, so scale only matters when
innovations must have unit variance (GARCH designs, ``standardize=True``).

* ``ase:theta`` is ``sqrt(S) Z`` with ``Z ~ N(0, I)`` and ``S`` positive
  ``theta/2``-stable with Laplace transform ``exp(-s^{theta/2})``; its
  characteristic function is ``exp(-2^{-theta/2} |t|^theta)``.
* ``gn:theta`` marginals have density proportional to ``exp(-|x|^theta / theta)``.
* ``aep`` marginals follow the Zhu and Zinde-Walsh parameterisation with
  left/right shapes ``p1``, ``p2`` and left mass ``alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidSpec

FAMILIES = ("normal", "t", "ase", "gn", "aep")


@dataclass(frozen=True)
class AlternativeSpec:
    family: str
    params: tuple = ()

    def __post_init__(self):
        fam, p = self.family, self.params
        if fam not in FAMILIES:
            raise InvalidSpec(f"unknown family {fam!r}; expected one of {FAMILIES}")
        expected = {"normal": 0, "t": 1, "ase": 1, "gn": 1, "aep": 3}[fam]
        if len(p) != expected:
            raise InvalidSpec(f"{fam} takes {expected} parameter(s), got {len(p)}")
        if not all(math.isfinite(v) for v in p):
            raise InvalidSpec(f"non-finite parameter in {p}")
        if fam == "t" and not p[0] > 0:
            raise InvalidSpec("t: degrees of freedom must be > 0")
        if fam == "ase" and not 0 < p[0] <= 2:
            raise InvalidSpec("ase: stability index must lie in (0, 2]")
        if fam == "gn" and not p[0] > 0:
            raise InvalidSpec("gn: shape must be > 0")
        if fam == "aep" and not (0 < p[0] < 1 and p[1] > 0 and p[2] > 0):
            raise InvalidSpec("aep: need 0 < alpha < 1 and p1, p2 > 0")

    @classmethod
    def parse(cls, text: str) -> "AlternativeSpec":
        text = text.strip().lower()
        fam, _, rest = text.partition(":")
        try:
            params = tuple(float(v) for v in rest.split(",")) if rest else ()
        except ValueError as exc:
            raise InvalidSpec(f"cannot parse alternative {text!r}: {exc}") from None
        return cls(fam, params)

    def __str__(self):
        if not self.params:
            return self.family
        return f"{self.family}:" + ",".join(f"{v:g}" for v in self.params)


NORMAL = AlternativeSpec("normal")


def positive_stable(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Positive ``alpha``-stable draws (``0 < alpha <= 1``), Laplace transform ``exp(-s^alpha)``.

    Uses the Chambers-Mallows-Stuck construction in Kanter's form for the
    totally skewed case; ``alpha = 1`` is the degenerate law at 1.
    """
    if alpha == 1.0:
        return np.ones(size)
    v = rng.uniform(0.0, math.pi, size)
    w = rng.standard_exponential(size)
    a = alpha
    return (np.sin(a * v) / np.sin(v) ** (1.0 / a)) * (np.sin((1.0 - a) * v) / w) ** ((1.0 - a) / a)


def _aep_constants(alpha, p1, p2):
    def k(p):
        return 1.0 / (2.0 * p ** (1.0 / p) * math.gamma(1.0 + 1.0 / p))

    a_star = alpha * k(p1) / (alpha * k(p1) + (1.0 - alpha) * k(p2))
    return k(p1), k(p2), a_star


def aep_pdf(y, alpha, p1, p2):
    """Density of the asymmetric exponential power law."""
    y = np.asarray(y, dtype=float)
    k1, k2, a_star = _aep_constants(alpha, p1, p2)
    left = (alpha / a_star) * k1 * np.exp(-np.abs(y / (2.0 * a_star)) ** p1 / p1)
    right = ((1.0 - alpha) / (1.0 - a_star)) * k2 * np.exp(
        -np.abs(y / (2.0 * (1.0 - a_star))) ** p2 / p2
    )
    return np.where(y <= 0.0, left, right)


def aep_ppf(u, alpha, p1, p2):
    """Quantile function; each half inverts through a Gamma quantile."""
    u = np.asarray(u, dtype=float)
    _, _, a_star = _aep_constants(alpha, p1, p2)
    out = np.empty_like(u)
    lo = u < alpha
    if np.any(lo):
        g = special.gammainccinv(1.0 / p1, u[lo] / alpha)
        out[lo] = -2.0 * a_star * (p1 * g) ** (1.0 / p1)
    hi = ~lo
    if np.any(hi):
        g = special.gammaincinv(1.0 / p2, (u[hi] - alpha) / (1.0 - alpha))
        out[hi] = 2.0 * (1.0 - a_star) * (p2 * g) ** (1.0 / p2)
    return out


def _half_gn_moment(p, k):
    # E[Z^k] for Z > 0 with density proportional to exp(-z^p / p)
    return p ** (k / p) * math.exp(special.gammaln((k + 1.0) / p) - special.gammaln(1.0 / p))


def aep_mean_var(alpha, p1, p2):
    _, _, a_star = _aep_constants(alpha, p1, p2)
    l_scale, r_scale = 2.0 * a_star, 2.0 * (1.0 - a_star)
    m1 = -alpha * l_scale * _half_gn_moment(p1, 1) + (1 - alpha) * r_scale * _half_gn_moment(p2, 1)
    m2 = alpha * l_scale**2 * _half_gn_moment(p1, 2) + (1 - alpha) * r_scale**2 * _half_gn_moment(p2, 2)
    return m1, m2 - m1 * m1


def sample_alternative(spec: AlternativeSpec, n: int, d: int, rng: np.random.Generator,
                       standardize: bool = False) -> np.ndarray:
    """Draw ``n`` i.i.d. ``d``-variate rows from ``spec``.

    With ``standardize=True`` the rows have mean zero and identity covariance
    (needed for GARCH innovations); this requires finite variance.
    """
    fam, p = spec.family, spec.params
    if fam == "normal":
        return rng.standard_normal((n, d))
    if fam == "t":
        nu = p[0]
        z = rng.standard_normal((n, d))
        x = z / np.sqrt(rng.chisquare(nu, n) / nu)[:, None]
        if standardize:
            if nu <= 2:
                raise InvalidSpec("t innovations need > 2 degrees of freedom to standardise")
            x *= math.sqrt((nu - 2.0) / nu)
        return x
    if fam == "ase":
        theta = p[0]
        if standardize and theta < 2:
            raise InvalidSpec("stable innovations with index < 2 have no variance")
        s = positive_stable(0.5 * theta, n, rng)
        return np.sqrt(s)[:, None] * rng.standard_normal((n, d))
    if fam == "gn":
        theta = p[0]
        g = rng.gamma(1.0 / theta, 1.0, (n, d))
        sign = np.where(rng.random((n, d)) < 0.5, -1.0, 1.0)
        x = sign * (theta * g) ** (1.0 / theta)
        if standardize:
            x /= math.sqrt(_half_gn_moment(theta, 2))
        return x
    alpha, p1, p2 = p
    x = aep_ppf(rng.random((n, d)), alpha, p1, p2)
    if standardize:
        m, v = aep_mean_var(alpha, p1, p2)
        x = (x - m) / math.sqrt(v)
    return x
