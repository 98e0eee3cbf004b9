"""Seeded Monte Carlo: null distributions, critical values, power.

Every replicate ``i`` draws from its own counter-based stream
``Philox(SeedSequence(seed, spawn_key=(key..., i)))``, so any replicate can be
recomputed on its own and results do not depend on the number of workers.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .alternatives import NORMAL, AlternativeSpec, sample_alternative
from .errors import DataError, SingularCovariance
from .linalg import scale_residuals
from .statistic import StatisticValue, compute_tn_beta, hw_statistic, tn_scaled_many

# stream keys, so that different studies never share random numbers
KEY_NULL = 0
KEY_POWER = 1
KEY_GARCH = 2
KEY_BOOT = 3
KEY_CLI = 4


def replicate_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one replicate identified by ``key``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample_standard_normal(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    if n < d + 1:
        raise DataError(f"need n >= d + 1, got n={n}, d={d}")
    return rng.standard_normal((n, d))


@dataclass(frozen=True)
class McConfig:
    reps: int = 10_000
    seed: int = 20_180_101
    alpha_levels: tuple = (0.05, 0.10)
    workers: int = 1

    def __post_init__(self):
        if self.reps < 100:
            raise DataError(f"reps must be >= 100, got {self.reps}")
        if not all(0.0 < a < 1.0 for a in self.alpha_levels):
            raise DataError(f"alpha levels must lie in (0, 1): {self.alpha_levels}")
        if not 0 <= self.seed < 2**64:
            raise DataError("seed must be an unsigned 64-bit integer")


@dataclass
class SimulationResult:
    """Statistic values, one row per replicate and one column per statistic."""

    values: np.ndarray
    columns: list
    redraws: int = 0

    def column(self, name) -> np.ndarray:
        return self.values[:, self.columns.index(name)]


def _columns(betas, hw_betas):
    return [("tn", float(b)) for b in betas] + [("hw", float(b)) for b in hw_betas]


def _simulate_chunk(args):
    spec, d, n, betas, hw_betas, seed, key, indices = args
    out = np.empty((len(indices), len(betas) + len(hw_betas)))
    redraws = 0
    for row, i in enumerate(indices):
        rng = replicate_rng(seed, *key, i)
        while True:
            x = sample_alternative(spec, n, d, rng)
            try:
                y = scale_residuals(x)
                break
            except SingularCovariance:
                redraws += 1
        out[row, : len(betas)] = tn_scaled_many(y, betas)
        for k, bh in enumerate(hw_betas):
            out[row, len(betas) + k] = hw_statistic(y, bh)
    return out, redraws


def _chunks(reps, workers, size=None):
    size = size or max(1, min(2000, math.ceil(reps / max(1, 4 * workers))))
    return [range(i, min(reps, i + size)) for i in range(0, reps, size)]


def run_parallel(func, tasks, workers: int):
    """Map ``func`` over ``tasks`` preserving order, in-process when ``workers <= 1``."""
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, tasks))


def simulate_statistics(spec: AlternativeSpec, d: int, n: int, betas=(), hw_betas=(),
                        reps: int = 1000, seed: int = 0, key=(KEY_NULL,),
                        workers: int = 1) -> SimulationResult:
    """Draw ``reps`` samples from ``spec``, standardise, and evaluate the statistics.

    ``tn`` columns hold ``T / pi^{d/2}``; ``hw`` columns hold the BHEP statistic.
    Replicates with a singular sample covariance are redrawn from the same
    stream and counted.
    """
    if n < d + 1:
        raise DataError(f"need n >= d + 1, got n={n}, d={d}")
    key = tuple(key)
    tasks = [(spec, d, n, tuple(betas), tuple(hw_betas), seed, key, list(c))
             for c in _chunks(reps, workers)]
    parts = run_parallel(_simulate_chunk, tasks, workers)
    values = np.vstack([p[0] for p in parts]) if parts else np.empty((0, 0))
    return SimulationResult(values, _columns(betas, hw_betas), sum(p[1] for p in parts))


def quantile_index(reps: int, alpha: float) -> int:
    """1-based order statistic ``ceil(reps (1 - alpha))`` used as the upper quantile."""
    k = math.ceil(round(reps * (1.0 - alpha), 9))
    return min(max(k, 1), reps)


def upper_quantile(draws, alpha: float) -> float:
    s = np.sort(np.asarray(draws, dtype=float))
    return float(s[quantile_index(len(s), alpha) - 1])


def quantile_standard_error(draws, alpha: float) -> float:
    """Order-statistic (binomial) standard error of :func:`upper_quantile`."""
    s = np.sort(np.asarray(draws, dtype=float))
    m = len(s)
    k = quantile_index(m, alpha) - 1
    h = max(1, int(round(math.sqrt(m * alpha * (1.0 - alpha)))))
    return float(s[min(m - 1, k + h)] - s[max(0, k - h)]) / 2.0


def empirical_p_value(observed, null_draws) -> float:
    """``(1 + #{draws >= observed}) / (1 + #draws)``."""
    draws = np.asarray(null_draws, dtype=float)
    if draws.size == 0:
        raise DataError("null_draws is empty")
    obs = getattr(observed, "t_scaled", observed)
    return float((1 + np.count_nonzero(draws >= obs)) / (1 + draws.size))


@dataclass
class CriticalTable:
    """Critical values of ``T / pi^{d/2}`` keyed by ``(d, n, beta, alpha)``."""

    rows: list = field(default_factory=list)
    redraws: int = 0

    FIELDS = ("d", "n", "beta", "alpha", "critical_value", "reps", "seed")

    def add(self, d, n, beta, alpha, value, reps, seed):
        self.rows.append({"d": int(d), "n": int(n), "beta": float(beta), "alpha": float(alpha),
                          "critical_value": float(value), "reps": int(reps), "seed": int(seed)})

    def lookup(self, d, n, beta, alpha) -> float:
        for r in self.rows:
            if (r["d"], r["n"]) == (d, n) and math.isclose(r["beta"], beta) and math.isclose(r["alpha"], alpha):
                return r["critical_value"]
        raise KeyError((d, n, beta, alpha))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        for r in self.rows:
            w.writerow([r["d"], r["n"], repr(r["beta"]), repr(r["alpha"]),
                        f"{r['critical_value']:.17e}", r["reps"], r["seed"]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CriticalTable":
        tab = cls()
        for r in csv.DictReader(io.StringIO(text)):
            tab.add(r["d"], r["n"], r["beta"], r["alpha"], r["critical_value"], r["reps"], r["seed"])
        return tab

    def monotonicity_warnings(self) -> list:
        """Cells violating the expected decrease in ``beta`` (warn-only)."""
        out = []
        keys = sorted({(r["d"], r["n"], r["alpha"]) for r in self.rows})
        for d, n, a in keys:
            cells = sorted((r["beta"], r["critical_value"]) for r in self.rows
                           if (r["d"], r["n"], r["alpha"]) == (d, n, a))
            for (b0, v0), (b1, v1) in zip(cells, cells[1:]):
                if v1 > v0:
                    out.append(f"d={d} n={n} alpha={a}: value rises from beta={b0} to beta={b1}")
        return out


def estimate_critical_values(d: int, n: int, betas, cfg: McConfig) -> CriticalTable:
    """Empirical upper quantiles of the null distribution of ``T / pi^{d/2}``."""
    betas = [betas] if np.isscalar(betas) else list(betas)
    sim = simulate_statistics(NORMAL, d, n, betas, (), cfg.reps, cfg.seed,
                              (KEY_NULL, d, n), cfg.workers)
    tab = CriticalTable(redraws=sim.redraws)
    for j, b in enumerate(betas):
        for a in cfg.alpha_levels:
            tab.add(d, n, b, a, upper_quantile(sim.values[:, j], a), cfg.reps, cfg.seed)
    return tab


def rejection_rate(stats, critical_value) -> float:
    return float(np.mean(np.asarray(stats) > critical_value))


@dataclass
class TestOutcome:
    """Result of a normality test with a simulated null distribution."""

    statistic: StatisticValue
    p_value: float
    null_draws: np.ndarray
    reject: bool
    alpha: float
    failures: int = 0
    meta: dict = field(default_factory=dict)


def iid_test(x, beta=3.0, reps: int = 1000, seed: int = 0, alpha: float = 0.05,
             workers: int = 1) -> TestOutcome:
    """Test i.i.d. data for multivariate normality.

    The p-value compares the observed statistic with ``reps`` statistics of
    fresh standard normal samples of the same size and dimension (the
    statistic is affine invariant, so the null law does not depend on the
    unknown mean and covariance).
    """
    y = scale_residuals(x)
    stat = compute_tn_beta(y, beta)
    sim = simulate_statistics(NORMAL, y.d, y.n, (stat.beta,), (), reps, seed,
                              (KEY_CLI, y.d, y.n), workers)
    draws = sim.values[:, 0]
    p = empirical_p_value(stat.t_scaled, draws)
    return TestOutcome(stat, p, draws, p <= alpha, alpha,
                       meta={"reps": reps, "seed": seed, "redraws": sim.redraws})
