"""CCC-GARCH(p, q) simulation, Gaussian QMLE and the bootstrap normality test.

Model::

    X_j = Sigma_j^{1/2} eps_j,    Sigma_j = D_j R D_j,    D_j = diag(sigma_j)
    sigma^2_j = b + sum_k B_k X_{j-k}^2 + sum_k Gamma_k sigma^2_{j-k}

``Sigma_j^{1/2}`` is always the *symmetric* square root.  Residuals are not
re-standardised, and the statistic is not invariant to a rotation of them, so
this convention matters.

Presample convention (fitting and bootstrap simulation alike): observations
before the first one are zero and presample variances equal the per-column
mean of ``X_j^2`` of the observed series.

Parameter records flatten as ``d, p, q, b..., B1..., Gamma1..., R lower``
where matrices are row-major and ``R lower`` lists the strictly lower
triangle of ``R`` row by row (``R21, R31, R32, ...``).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import kernels
from .alternatives import NORMAL, AlternativeSpec, sample_alternative
from .errors import (DataError, ExplosiveRegion, InvalidSpec, MgfNormError,
                     NonStationaryExplosion, OptimizerFailed)
from .linalg import GARCH_RESIDUAL, ScaledResiduals, as_sample
from .simulation import (KEY_BOOT, KEY_GARCH, TestOutcome, empirical_p_value, replicate_rng,
                         run_parallel, upper_quantile)
from .statistic import StatisticValue, compute_tn_beta, hw_statistic, tn_scaled_many

log = logging.getLogger(__name__)

EXPLOSION_THRESHOLD = 1e12
DEFAULT_BURNIN = 500
STRUCTURES = ("full", "diagonal-gamma", "diagonal")


@dataclass(frozen=True)
class GarchSpec:
    """Model orders and the coefficient structure used when fitting.

    ``structure`` is ``"full"`` (all of ``B_k``, ``Gamma_k`` free),
    ``"diagonal-gamma"`` (``Gamma_k`` diagonal, ``B_k`` full) or
    ``"diagonal"`` (both diagonal).  Restricted entries are fixed at zero.
    """

    d: int
    p: int = 1
    q: int = 1
    structure: str = "full"

    def __post_init__(self):
        if self.d < 1 or self.p < 1 or self.q < 0:
            raise InvalidSpec(f"need d >= 1, p >= 1, q >= 0; got {self}")
        if self.structure not in STRUCTURES:
            raise InvalidSpec(f"structure must be one of {STRUCTURES}, got {self.structure!r}")

    def free_mask(self, which: str) -> np.ndarray:
        """Boolean mask of the estimated entries of ``B_k`` (``"B"``) or ``Gamma_k``."""
        diag = self.structure == "diagonal" or (which != "B" and self.structure == "diagonal-gamma")
        return np.eye(self.d, dtype=bool) if diag else np.ones((self.d, self.d), dtype=bool)

    @property
    def n_params(self) -> int:
        d = self.d
        return (d + self.p * int(self.free_mask("B").sum()) + self.q * int(self.free_mask("Gamma").sum())
                + d * (d - 1) // 2)


@dataclass
class GarchParams:
    b: np.ndarray
    B: np.ndarray
    Gamma: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self.b = np.ascontiguousarray(self.b, dtype=float).reshape(-1)
        d = self.b.size
        self.B = np.ascontiguousarray(self.B, dtype=float).reshape(-1, d, d)
        self.Gamma = np.ascontiguousarray(self.Gamma, dtype=float).reshape(-1, d, d)
        self.R = np.ascontiguousarray(self.R, dtype=float).reshape(d, d)

    @property
    def spec(self) -> GarchSpec:
        return GarchSpec(self.b.size, self.B.shape[0], self.Gamma.shape[0])

    def validate(self):
        if np.any(self.b <= 0):
            raise InvalidSpec("intercepts b must be positive")
        if np.any(self.B < 0) or np.any(self.Gamma < 0):
            raise InvalidSpec("B and Gamma must be elementwise non-negative")
        if not np.allclose(np.diag(self.R), 1.0) or not np.allclose(self.R, self.R.T):
            raise InvalidSpec("R must be a symmetric matrix with unit diagonal")
        if np.linalg.eigvalsh(self.R)[0] <= 0:
            raise InvalidSpec("R must be positive definite")
        return self

    def persistence(self) -> float:
        """Spectral radius of ``sum B_k + sum Gamma_k`` (stationarity screen)."""
        m = self.B.sum(axis=0) + self.Gamma.sum(axis=0)
        return float(np.max(np.abs(np.linalg.eigvals(m))))

    def unconditional_variance(self) -> np.ndarray:
        m = self.B.sum(axis=0) + self.Gamma.sum(axis=0)
        d = self.b.size
        if self.persistence() >= 1.0:
            return self.b.copy()
        return np.linalg.solve(np.eye(d) - m, self.b)

    # serialisation
    def to_record(self) -> list:
        d = self.b.size
        lower = [float(self.R[i, j]) for i in range(d) for j in range(i)]
        return ([d, self.B.shape[0], self.Gamma.shape[0]] + self.b.tolist()
                + self.B.ravel().tolist() + self.Gamma.ravel().tolist() + lower)

    @classmethod
    def from_record(cls, rec) -> "GarchParams":
        rec = [float(v) for v in rec]
        d, p, q = (int(v) for v in rec[:3])
        need = 3 + d + (p + q) * d * d + d * (d - 1) // 2
        if len(rec) != need:
            raise InvalidSpec(f"record for d={d}, p={p}, q={q} needs {need} values, got {len(rec)}")
        pos = 3
        b = rec[pos:pos + d]; pos += d
        B = np.array(rec[pos:pos + p * d * d]).reshape(p, d, d); pos += p * d * d
        G = np.array(rec[pos:pos + q * d * d]).reshape(q, d, d); pos += q * d * d
        R = np.eye(d)
        for i in range(d):
            for j in range(i):
                R[i, j] = R[j, i] = rec[pos]
                pos += 1
        return cls(np.array(b), B, G, R)

    def record_header(self) -> list:
        d, p, q = self.spec.d, self.spec.p, self.spec.q
        names = ["d", "p", "q"] + [f"b{i + 1}" for i in range(d)]
        for tag, m in (("B", p), ("Gamma", q)):
            names += [f"{tag}{k + 1}_{i + 1}{j + 1}" for k in range(m) for i in range(d) for j in range(d)]
        names += [f"R_{i + 1}{j + 1}" for i in range(d) for j in range(i)]
        return names

    def to_json(self) -> str:
        return json.dumps(dict(zip(self.record_header(), self.to_record())))

    @classmethod
    def from_json(cls, text: str) -> "GarchParams":
        obj = json.loads(text)
        d, p, q = int(obj["d"]), int(obj["p"]), int(obj["q"])
        proto = cls(np.ones(d), np.zeros((p, d, d)), np.zeros((q, d, d)), np.eye(d))
        return cls.from_record([obj[k] for k in proto.record_header()])


def benchmark_design(d: int = 2, gamma: float = 0.4, r: float = 0.0) -> GarchParams:
    """CCC-GARCH(1,1) design used in the simulation studies.

    ``b = 0.1``, every entry of ``B_1`` is 0.1, ``Gamma_1`` has ``gamma`` on the
    diagonal and 0.01 off it, and ``R`` has constant correlation ``r``.
    """
    G = np.full((d, d), 0.01)
    np.fill_diagonal(G, gamma)
    R = np.full((d, d), float(r))
    np.fill_diagonal(R, 1.0)
    return GarchParams(np.full(d, 0.1), np.full((1, d, d), 0.1), G[None], R).validate()


def presample_variance(x) -> np.ndarray:
    """Per-column mean of ``X_j^2`` (the model has zero conditional mean)."""
    return np.mean(np.asarray(x, dtype=float) ** 2, axis=0)


def _simulate_path(params: GarchParams, eps: np.ndarray, s0: np.ndarray):
    x, s2, status = kernels.ccc_simulate(np.ascontiguousarray(eps, dtype=float), params.b,
                                         params.B, params.Gamma, params.R,
                                         np.ascontiguousarray(s0, dtype=float),
                                         EXPLOSION_THRESHOLD)
    if status >= 0:
        raise NonStationaryExplosion(
            f"conditional variance exceeded {EXPLOSION_THRESHOLD:g} at step {status}"
        )
    return x, s2


def simulate_ccc_garch(params: GarchParams, n: int, innovations, burnin: int = DEFAULT_BURNIN,
                       presample=None) -> np.ndarray:
    """Simulate ``n`` observations driven by ``innovations`` (``n + burnin`` rows).

    Without ``presample`` the recursion starts from the unconditional variance;
    the first ``burnin`` simulated rows are discarded.
    """
    eps = np.asarray(innovations, dtype=float)
    if eps.ndim != 2 or eps.shape != (n + burnin, params.b.size):
        raise DataError(f"innovations must have shape {(n + burnin, params.b.size)}, got {eps.shape}")
    if params.persistence() >= 1.0:
        log.warning("persistence %.3f >= 1: process may not be stationary", params.persistence())
    s0 = params.unconditional_variance() if presample is None else np.asarray(presample, dtype=float)
    x, _ = _simulate_path(params, eps, s0)
    return np.ascontiguousarray(x[burnin:])


# --- quasi-likelihood -------------------------------------------------------

def _corr_from_angles(z: np.ndarray, d: int) -> np.ndarray:
    """Correlation matrix from ``d(d-1)/2`` unconstrained values (Cholesky angles)."""
    L = np.zeros((d, d))
    L[0, 0] = 1.0
    pos = 0
    for i in range(1, d):
        rem = 1.0
        for j in range(i):
            c = math.tanh(z[pos])
            pos += 1
            L[i, j] = c * math.sqrt(rem)
            rem -= L[i, j] ** 2
        L[i, i] = math.sqrt(max(rem, 0.0))
    R = L @ L.T
    np.fill_diagonal(R, 1.0)
    return R


def _angles_from_corr(R: np.ndarray) -> np.ndarray:
    d = R.shape[0]
    L = np.linalg.cholesky(R)
    z = []
    for i in range(1, d):
        rem = 1.0
        for j in range(i):
            c = L[i, j] / math.sqrt(rem) if rem > 0 else 0.0
            z.append(math.atanh(min(max(c, -0.999999), 0.999999)))
            rem -= L[i, j] ** 2
    return np.array(z)


class _Transform:
    """Map unconstrained vectors to parameters of the column-rescaled model."""

    LOG_MIN = math.log(1e-7)

    def __init__(self, spec: GarchSpec):
        self.spec = spec
        d, p, q = spec.d, spec.p, spec.q
        self.free_b = spec.free_mask("B")
        self.free_g = spec.free_mask("Gamma")
        self.sizes = (d, p * int(self.free_b.sum()), q * int(self.free_g.sum()), d * (d - 1) // 2)
        self.bounds = ([(self.LOG_MIN, math.log(50.0))] * d
                       + [(self.LOG_MIN, math.log(2.0))] * (self.sizes[1] + self.sizes[2])
                       + [(-4.0, 4.0)] * self.sizes[3])

    def _matrices(self, v, m, mask):
        d = self.spec.d
        out = np.zeros((m, d, d))
        out[:, mask] = v.reshape(m, -1)
        return out

    def unpack(self, u):
        d, p, q = self.spec.d, self.spec.p, self.spec.q
        nb, nB, nG, _ = self.sizes
        b = np.exp(u[:nb])
        B = self._matrices(np.exp(u[nb:nb + nB]), p, self.free_b)
        G = self._matrices(np.exp(u[nb + nB:nb + nB + nG]), q, self.free_g)
        R = _corr_from_angles(u[nb + nB + nG:], d)
        return b, B, G, R

    def pack(self, b, B, G, R):
        lo = math.exp(self.LOG_MIN) * 1.5
        parts = [np.log(np.maximum(b, lo)), np.log(np.maximum(B[:, self.free_b].ravel(), lo)),
                 np.log(np.maximum(G[:, self.free_g].ravel(), lo)), _angles_from_corr(R)]
        u = np.concatenate(parts)
        lb, ub = np.array(self.bounds).T
        return np.clip(u, lb + 1e-9, ub - 1e-9)


def _rescale(params_b, B, G, sd, inverse=False):
    # sigma2~_r = b_r/sd_r^2 + sum_l (B_rl sd_l^2 / sd_r^2) x~_l^2 + ...
    ratio = (sd[None, :] ** 2) / (sd[:, None] ** 2)
    if inverse:
        return params_b * sd**2, B / ratio, G / ratio
    return params_b / sd**2, B * ratio, G * ratio


def _angle_jacobian(z: np.ndarray, d: int, h: float = 1e-6) -> list:
    # dR/dz_k by central differences; the map involves no data, so this is cheap
    out = []
    for k in range(z.size):
        up = z.copy(); dn = z.copy()
        up[k] += h
        dn[k] -= h
        out.append((_corr_from_angles(up, d) - _corr_from_angles(dn, d)) / (2.0 * h))
    return out


def _objective_factory(xs: np.ndarray, s0s: np.ndarray, tr: _Transform):
    """Mean negative quasi-log-likelihood (halved) and its gradient in ``u``."""
    n, d = xs.shape
    nb, nB, nG, _ = tr.sizes

    def _prepare(u):
        b, B, G, R = tr.unpack(u)
        try:
            c = np.linalg.cholesky(R)
        except np.linalg.LinAlgError:
            return None
        return b, B, G, R, np.linalg.inv(R), 2.0 * float(np.sum(np.log(np.diag(c))))

    def f(u):
        prep = _prepare(u)
        if prep is None:
            return math.inf
        b, B, G, _, Rinv, logdet = prep
        return 0.5 * kernels.ccc_negloglik(xs, b, B, G, s0s, Rinv, logdet) / n

    def fg(u):
        prep = _prepare(u)
        if prep is None:
            return math.inf, np.zeros_like(u)
        b, B, G, R, Rinv, logdet = prep
        v, gb, gB, gG, zz = kernels.ccc_negloglik_grad(xs, b, B, G, s0s, Rinv, logdet)
        if not math.isfinite(v):
            return math.inf, np.zeros_like(u)
        gR = n * Rinv - Rinv @ zz @ Rinv
        za = u[nb + nB + nG:]
        g = np.concatenate([gb * b, (gB * B)[:, tr.free_b].ravel(), (gG * G)[:, tr.free_g].ravel(),
                            [float(np.sum(gR * dR)) for dR in _angle_jacobian(za, d)]])
        return 0.5 * v / n, 0.5 * g / n

    return f, fg


@dataclass
class GarchFit:
    params: GarchParams
    loglik: float
    iterations: int
    converged: bool
    residuals: ScaledResiduals
    presample: np.ndarray
    message: str = ""


def _start_candidates(spec: GarchSpec):
    d = spec.d
    for bd, gd in ((0.05, 0.85), (0.1, 0.5), (0.1, 0.3), (0.2, 0.6)):
        B = np.full((spec.p, d, d), 0.02)
        G = np.full((spec.q, d, d), 0.02)
        for k in range(spec.p):
            np.fill_diagonal(B[k], bd / spec.p)
        for k in range(spec.q):
            np.fill_diagonal(G[k], gd / spec.q)
        yield B, G


def garch_residuals(params: GarchParams, x, presample=None) -> ScaledResiduals:
    """``Sigma_j^{-1/2} X_j`` with the symmetric inverse root."""
    x = np.ascontiguousarray(x, dtype=float)
    s0 = presample_variance(x) if presample is None else np.asarray(presample, dtype=float)
    s2 = kernels.ccc_filter(x, params.b, params.B, params.Gamma, s0)
    sd = np.sqrt(s2)
    # Sigma_j = D_j R D_j; eigendecompose each
    sig = sd[:, :, None] * params.R[None] * sd[:, None, :]
    w, v = np.linalg.eigh(sig)
    inv_root = np.einsum("jik,jk,jlk->jil", v, 1.0 / np.sqrt(w), v)
    eps = np.einsum("jil,jl->ji", inv_root, x)
    return ScaledResiduals(np.ascontiguousarray(eps), GARCH_RESIDUAL)


def _warn_small_sample(n, spec):
    if n < 50 * spec.n_params:
        log.warning("n=%d is small for %d parameters; QMLE may be unreliable", n, spec.n_params)


def qmle_fit(x, spec: GarchSpec | None = None, init: GarchParams | None = None,
             maxiter: int = 500, require_convergence: bool = True,
             warn_small: bool = True) -> GarchFit:
    """Gaussian quasi-maximum-likelihood fit of a CCC-GARCH(p, q) model.

    Positivity is enforced by a log reparameterisation and the correlation
    matrix by Cholesky angles; L-BFGS-B with the analytic (adjoint) gradient
    does the search (box bounds on the unconstrained scale only guard
    against overflow).  Data are rescaled per column before fitting.

    Raises
    ------
    ExplosiveRegion
        The objective is not finite at the starting point.
    OptimizerFailed
        No convergence and ``require_convergence`` is set.
    """
    x = as_sample(x)
    n, d = x.shape
    spec = spec or GarchSpec(d)
    if spec.d != d:
        raise DataError(f"spec is for d={spec.d} but data have d={d}")
    if warn_small:
        _warn_small_sample(n, spec)
    s0 = presample_variance(x)
    sd = np.sqrt(s0)
    xs = np.ascontiguousarray(x / sd)
    s0s = np.ones(d)
    tr = _Transform(spec)
    f, fg_exact = _objective_factory(xs, s0s, tr)

    if init is not None:
        bi, Bi, Gi = _rescale(init.b, init.B, init.Gamma, sd)
        starts = [tr.pack(bi, Bi, Gi, init.R)]
    else:
        R0 = np.corrcoef(xs.T) if d > 1 else np.eye(1)
        starts = []
        for B0, G0 in _start_candidates(spec):
            persist = (B0.sum(axis=0) + G0.sum(axis=0)).sum(axis=1)
            b0 = np.maximum(1.0 - persist, 0.05)
            starts.append(tr.pack(b0, B0, G0, R0))
    values = [f(u) for u in starts]
    best = int(np.argmin(values))
    u0 = starts[best]
    if not math.isfinite(values[best]):
        raise ExplosiveRegion("quasi-likelihood is not finite at any starting point")

    def fg(u):
        v, g = fg_exact(u)
        if not math.isfinite(v):
            return 1e10, np.zeros_like(u)
        return v, g

    res = optimize.minimize(fg, u0, jac=True, method="L-BFGS-B", bounds=tr.bounds,
                            options={"maxiter": maxiter, "ftol": 1e-12, "gtol": 1e-6})
    # line-search stalls at a flat optimum are accepted when the gradient is small
    gnorm = float(np.max(np.abs(res.jac))) if res.jac is not None else math.inf
    converged = bool(res.success) or (math.isfinite(res.fun) and res.fun < 1e9 and gnorm < 1e-4)
    if not converged and require_convergence:
        raise OptimizerFailed(f"QMLE did not converge: {res.message} (|grad|={gnorm:.2e})")

    bs, Bs, Gs, R = tr.unpack(res.x)
    b, B, G = _rescale(bs, Bs, Gs, sd, inverse=True)
    params = GarchParams(b, B, G, R)
    loglik = -n * res.fun - n * float(np.sum(np.log(sd)))
    resid = garch_residuals(params, x, s0)
    return GarchFit(params, loglik, int(res.nit), converged, resid, s0, str(res.message))


def garch_test_statistic(fit: GarchFit, beta) -> StatisticValue:
    """Statistic evaluated on the raw (unstandardised) GARCH residuals."""
    return compute_tn_beta(fit.residuals, beta)


def _fit_with_retry(x, spec, init, rng):
    """Fit; on failure retry once from a randomly perturbed start with a larger budget."""
    try:
        return qmle_fit(x, spec, init, warn_small=False)
    except (OptimizerFailed, ExplosiveRegion) as exc:
        log.debug("retrying QMLE after: %s", exc)
    if init is None:
        B0, G0 = next(_start_candidates(spec))
        persist = (B0.sum(axis=0) + G0.sum(axis=0)).sum(axis=1)
        init = GarchParams((1.0 - persist) * presample_variance(x), B0, G0, np.eye(spec.d))
    jitter = lambda m: np.abs(m) * np.exp(0.3 * rng.standard_normal(m.shape)) + 1e-4  # noqa: E731
    start = GarchParams(jitter(init.b), jitter(init.B), jitter(init.Gamma), init.R)
    return qmle_fit(x, spec, start, maxiter=2000, warn_small=False)


def _stat_row(resid, betas, hw_betas):
    row = list(tn_scaled_many(resid, betas)) if betas else []
    row += [hw_statistic(resid, bh) for bh in hw_betas]
    return row


def _boot_chunk(args):
    params, s0, n, spec, betas, seed, indices = args
    out = []
    fails = 0
    for i in indices:
        rng = replicate_rng(seed, KEY_BOOT, 1, i)
        eps = rng.standard_normal((n, spec.d))
        try:
            xb = simulate_ccc_garch(params, n, eps, burnin=0, presample=s0)
            fb = _fit_with_retry(xb, spec, params, rng)
            out.append(tn_scaled_many(fb.residuals, betas))
        except MgfNormError:
            fails += 1
            out.append(np.full(len(betas), np.nan))
    return np.array(out).reshape(len(indices), len(betas)), fails


def bootstrap_test(x, spec: GarchSpec | None = None, beta=2.1, b_reps: int = 999,
                   seed: int = 0, alpha: float = 0.05, workers: int = 1,
                   max_fail: float = 0.05) -> TestOutcome:
    """Parametric bootstrap test of Gaussian innovations in a CCC-GARCH model.

    Fits the model, evaluates the statistic on the residuals, then repeatedly
    simulates from the fitted model with fresh N(0, I) innovations (same
    presample convention), refits and recomputes the statistic.  The p-value
    uses the add-one convention.
    """
    if b_reps < 99:
        raise DataError("b_reps must be >= 99")
    x = as_sample(x)
    n, d = x.shape
    spec = spec or GarchSpec(d)
    _warn_small_sample(n, spec)
    fit = _fit_with_retry(x, spec, None, replicate_rng(seed, KEY_BOOT, 0))
    stat = garch_test_statistic(fit, beta)
    size = max(1, math.ceil(b_reps / max(1, 4 * workers)))
    tasks = [(fit.params, fit.presample, n, spec, (float(beta),), seed,
              list(range(i, min(b_reps, i + size)))) for i in range(0, b_reps, size)]
    parts = run_parallel(_boot_chunk, tasks, workers)
    draws = np.concatenate([p[0][:, 0] for p in parts])
    fails = sum(p[1] for p in parts)
    if fails > max_fail * b_reps:
        raise OptimizerFailed(f"{fails} of {b_reps} bootstrap refits failed")
    ok = draws[np.isfinite(draws)]
    p = empirical_p_value(stat.t_scaled, ok)
    return TestOutcome(stat, p, ok, p <= alpha, alpha, failures=fails,
                       meta={"params": fit.params, "loglik": fit.loglik, "b_reps": b_reps})


# --- warp-speed Monte Carlo ----------------------------------------------------

@dataclass(frozen=True)
class WarpDesign:
    params: GarchParams
    innovations: AlternativeSpec = NORMAL
    n: int = 300
    betas: tuple = (2.1,)
    hw_betas: tuple = ()
    burnin: int = DEFAULT_BURNIN
    structure: str = "full"

    @property
    def spec(self) -> GarchSpec:
        s = self.params.spec
        return GarchSpec(s.d, s.p, s.q, self.structure)


@dataclass
class WarpResult:
    columns: list
    stats: np.ndarray
    boot: np.ndarray
    failures: int

    def rejection_rates(self, alpha: float = 0.05) -> dict:
        out = {}
        for j, col in enumerate(self.columns):
            t = self.stats[:, j]
            tb = self.boot[:, j]
            ok = np.isfinite(t) & np.isfinite(tb)
            crit = upper_quantile(tb[ok], alpha)
            out[col] = float(np.mean(t[ok] > crit))
        return out


def _warp_chunk(args):
    design, spec, seed, indices = args
    d = spec.d
    k = len(design.betas) + len(design.hw_betas)
    stats = np.full((len(indices), k), np.nan)
    boot = np.full((len(indices), k), np.nan)
    fails = 0
    for row, m in enumerate(indices):
        rng = replicate_rng(seed, KEY_GARCH, m)
        eps = sample_alternative(design.innovations, design.n + design.burnin, d, rng, standardize=True)
        try:
            x = simulate_ccc_garch(design.params, design.n, eps, design.burnin)
            fit = _fit_with_retry(x, spec, None, rng)
            stats[row] = _stat_row(fit.residuals, design.betas, design.hw_betas)
            xb = simulate_ccc_garch(fit.params, design.n, rng.standard_normal((design.n, d)),
                                    burnin=0, presample=fit.presample)
            fb = _fit_with_retry(xb, spec, fit.params, rng)
            boot[row] = _stat_row(fb.residuals, design.betas, design.hw_betas)
        except MgfNormError as exc:
            log.debug("warp-speed sample %d failed: %s", m, exc)
            fails += 1
    return stats, boot, fails


def warp_speed_study(design: WarpDesign, mc_samples: int = 2000, seed: int = 0,
                     workers: int = 1, max_fail: float = 0.05) -> WarpResult:
    """Level/power by the warp-speed method: one bootstrap resample per Monte Carlo sample.

    Rejection rates compare each sample's statistic with the upper quantile of
    the pooled bootstrap statistics (see :meth:`WarpResult.rejection_rates`).
    """
    if mc_samples < 500:
        raise DataError("mc_samples must be >= 500")
    spec = design.spec
    _warn_small_sample(design.n, spec)
    size = max(1, min(100, math.ceil(mc_samples / max(1, 4 * workers))))
    tasks = [(design, spec, seed, list(range(i, min(mc_samples, i + size))))
             for i in range(0, mc_samples, size)]
    parts = run_parallel(_warp_chunk, tasks, workers)
    stats = np.vstack([p[0] for p in parts])
    boot = np.vstack([p[1] for p in parts])
    fails = sum(p[2] for p in parts)
    if fails > max_fail * mc_samples:
        raise OptimizerFailed(f"{fails} of {mc_samples} Monte Carlo samples failed")
    cols = [("tn", float(b)) for b in design.betas] + [("hw", float(b)) for b in design.hw_betas]
    return WarpResult(cols, stats, boot, fails)
