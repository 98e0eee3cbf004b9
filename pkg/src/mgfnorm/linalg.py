"""Dense symmetric linear algebra used to standardise data.

The sample covariance uses divisor ``n`` (not ``n - 1``) throughout; the
statistic is defined in terms of that estimator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, SingularCovariance

IID_STANDARDIZED = "iid-standardized"
GARCH_RESIDUAL = "garch-residual"


@dataclass(frozen=True)
class ScaledResiduals:
    """Standardised observations, one per row.

    ``source`` is ``"iid-standardized"`` for empirically whitened i.i.d. data
    and ``"garch-residual"`` for model residuals that are used as they are.
    """

    y: np.ndarray
    source: str = IID_STANDARDIZED

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.y.shape[1]


def as_sample(x, min_rows: bool = True) -> np.ndarray:
    """Validate and convert ``x`` into a C-contiguous ``(n, d)`` float array.

    One-dimensional input is treated as a single column.
    """
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise DataError(f"expected a 2-D data matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError("data contain non-finite entries")
    n, d = a.shape
    if min_rows and n < d + 1:
        raise DataError(f"need n >= d + 1 observations, got n={n}, d={d}")
    return np.ascontiguousarray(a)


def as_matrix(y) -> np.ndarray:
    """Return the raw row matrix of ``ScaledResiduals`` or an array-like."""
    if isinstance(y, ScaledResiduals):
        return np.ascontiguousarray(y.y, dtype=float)
    a = np.asarray(y, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    return np.ascontiguousarray(a)


def _checked_eigh(m: np.ndarray):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataError(f"expected a square matrix, got shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(scale, 1e-300)):
        raise DataError("matrix is not symmetric")
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    d = m.shape[0]
    if w[-1] <= 0.0 or w[0] <= d * np.finfo(float).eps * w[-1]:
        raise SingularCovariance(
            f"matrix is singular or not positive definite "
            f"(eigenvalues {w[0]:.3e} .. {w[-1]:.3e})"
        )
    return w, v


def sym_sqrt(m) -> np.ndarray:
    """Symmetric positive definite square root of ``m``."""
    w, v = _checked_eigh(m)
    r = (v * np.sqrt(w)) @ v.T
    return 0.5 * (r + r.T)


def sym_inv_sqrt(m) -> np.ndarray:
    """Symmetric inverse square root ``R`` with ``R @ m @ R = I``."""
    w, v = _checked_eigh(m)
    r = (v / np.sqrt(w)) @ v.T
    return 0.5 * (r + r.T)


def sample_mean_cov(x):
    """Sample mean and covariance (divisor ``n``) of the rows of ``x``.

    Raises
    ------
    SingularCovariance
        If the smallest eigenvalue of the covariance is at most
        ``d * eps * largest eigenvalue``.
    """
    a = as_sample(x)
    mean = a.mean(axis=0)
    c = a - mean
    cov = (c.T @ c) / a.shape[0]
    cov = 0.5 * (cov + cov.T)
    _checked_eigh(cov)
    return mean, cov


def scale_residuals(x) -> ScaledResiduals:
    """Scaled residuals ``S^{-1/2} (x_j - mean)``, one per row."""
    a = as_sample(x)
    mean, cov = sample_mean_cov(a)
    y = (a - mean) @ sym_inv_sqrt(cov)
    return ScaledResiduals(np.ascontiguousarray(y), IID_STANDARDIZED)
