"""Pure numpy versions of the compiled inner loops in ``_kernels.pyx``."""
import math

import numpy as np

_BLOCK_BYTES = 8 * 2**20


def _row_block(n, d):
    return max(1, int(_BLOCK_BYTES // (8 * max(1, n * d))))


def pair_expm1_sum(y, c):
    """Sum of ``expm1(c * ||y_i + y_j||^2)`` over all ordered pairs."""
    y = np.ascontiguousarray(y, dtype=float)
    n, d = y.shape
    step = _row_block(n, d)
    rows = []
    for i0 in range(0, n, step):
        blk = y[i0:i0 + step, None, :] + y[None, :, :]
        q = np.einsum("ijk,ijk->ij", blk, blk)
        rows.append(np.expm1(c * q).sum(axis=1))
    return math.fsum(np.concatenate(rows)) if rows else 0.0


def pair_gauss_sum(y, c):
    """Sum of ``exp(-c * ||y_i - y_j||^2)`` over all ordered pairs."""
    y = np.ascontiguousarray(y, dtype=float)
    n, d = y.shape
    step = _row_block(n, d)
    rows = []
    for i0 in range(0, n, step):
        blk = y[i0:i0 + step, None, :] - y[None, :, :]
        q = np.einsum("ijk,ijk->ij", blk, blk)
        rows.append(np.exp(-c * q).sum(axis=1))
    return math.fsum(np.concatenate(rows)) if rows else 0.0


def _sigma2_step(j, x, s2, b, B, G, s0):
    acc = np.array(b, dtype=float)
    for k in range(B.shape[0]):
        m = j - 1 - k
        if m >= 0:
            acc += B[k] @ (x[m] * x[m])
    for k in range(G.shape[0]):
        m = j - 1 - k
        acc += G[k] @ (s2[m] if m >= 0 else s0)
    return acc


def ccc_filter(x, b, B, G, s0):
    """Conditional variances of a CCC-GARCH recursion (zero presample data)."""
    n, d = x.shape
    s2 = np.empty((n, d))
    for j in range(n):
        s2[j] = _sigma2_step(j, x, s2, b, B, G, s0)
    return s2


def ccc_negloglik(x, b, B, G, s0, Rinv, logdet_r):
    """Sum over j of ``x_j' Sigma_j^{-1} x_j + log|Sigma_j|``; ``inf`` if invalid."""
    with np.errstate(over="ignore", invalid="ignore"):
        s2 = ccc_filter(x, b, B, G, s0)
        if not np.all(np.isfinite(s2)) or np.any(s2 <= 0.0) or np.any(s2 > 1e250):
            return math.inf
        z = x / np.sqrt(s2)
        quad = np.einsum("jr,rl,jl->j", z, Rinv, z)
        total = float(np.sum(quad) + np.sum(np.log(s2)) + x.shape[0] * logdet_r)
    return total if math.isfinite(total) else math.inf


def ccc_negloglik_grad(x, b, B, G, s0, Rinv, logdet_r):
    """Value and adjoint gradient; see the compiled twin for the return layout."""
    n, d = x.shape
    p, q = B.shape[0], G.shape[0]
    gb, gB, gG, zz = np.zeros(d), np.zeros((p, d, d)), np.zeros((q, d, d)), np.zeros((d, d))
    value = ccc_negloglik(x, b, B, G, s0, Rinv, logdet_r)
    if not math.isfinite(value):
        return math.inf, gb, gB, gG, zz
    s2 = ccc_filter(x, b, B, G, s0)
    z = x / np.sqrt(s2)
    lam = (1.0 - z * (z @ Rinv)) / s2
    for j in range(n - 1, -1, -1):
        for k in range(q):
            if j + 1 + k < n:
                lam[j] += G[k].T @ lam[j + 1 + k]
    gb = lam.sum(axis=0)
    x2 = x * x
    for k in range(p):
        gB[k] = lam[k + 1:].T @ x2[: n - k - 1]
    for k in range(q):
        lagged = np.vstack([np.tile(s0, (k + 1, 1)), s2[: n - k - 1]])
        gG[k] = lam.T @ lagged
    zz = z.T @ z
    return value, gb, gB, gG, zz


def sym_sqrt_small(m):
    """Symmetric square root of a small SPD matrix."""
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def ccc_simulate(eps, b, B, G, R, s0, explode):
    """Simulate ``x_j = Sigma_j^{1/2} eps_j``; see the compiled twin."""
    n, d = eps.shape
    x = np.zeros((n, d))
    s2 = np.zeros((n, d))
    for j in range(n):
        v = _sigma2_step(j, x, s2, b, B, G, s0)
        if not np.all(v <= explode) or not np.all(v > 0.0):
            return x, s2, j
        s2[j] = v
        sd = np.sqrt(v)
        x[j] = sym_sqrt_small(sd[:, None] * R * sd[None, :]) @ eps[j]
    return x, s2, -1
