"""Regenerate the reference tables and compare them with the stored values.

Each ``table*`` function returns a list of :class:`Cell` rows that carry the
simulated estimate, the reference value, a Monte Carlo standard error and
the resulting z-score.  Two scales are provided:

========  ===========================================  ===========================
table     desk scale                                   paper scale
========  ===========================================  ===========================
table1    10^4 null replicates, n in {20, 50, 100}     10^5 replicates, all cells
table2    2000 trials per alternative                  10^4 trials
table3    500 Monte Carlo samples, d = 2 rows only     10^4 (level) / 2000 (power)
========  ===========================================  ===========================
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import reference_tables as ref
from .alternatives import NORMAL, AlternativeSpec
from .garch import WarpDesign, benchmark_design, warp_speed_study
from .simulation import (KEY_NULL, KEY_POWER, quantile_standard_error, simulate_statistics,
                         upper_quantile)

SCALES = ("desk", "paper")


@dataclass
class Cell:
    table: str
    d: int
    n: int
    r: float
    alt: str
    statistic: str
    beta: float
    alpha: float
    estimate: float
    reference: float
    se: float

    @property
    def z(self) -> float:
        return (self.estimate - self.reference) / self.se if self.se > 0 else math.nan

    @property
    def rel_error(self) -> float:
        return (self.estimate - self.reference) / self.reference


FIELDS = ("table", "d", "n", "r", "alt", "statistic", "beta", "alpha",
          "estimate", "reference", "se", "z")


def to_csv(cells) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for c in cells:
        row = asdict(c)
        row["z"] = c.z
        w.writerow([f"{row[k]:.10g}" if isinstance(row[k], float) else row[k] for k in FIELDS])
    return buf.getvalue()


def diff_report(cells) -> str:
    """Aligned text listing every cell with its z-score, worst first."""
    lines = [f"{'table':7}{'d':>3}{'n':>5}{'r':>5} {'alt':20}{'stat':>5}{'beta':>6}{'alpha':>6}"
             f"{'estimate':>13}{'reference':>13}{'z':>8}"]
    for c in sorted(cells, key=lambda c: -abs(c.z) if math.isfinite(c.z) else 0.0):
        lines.append(f"{c.table:7}{c.d:>3}{c.n:>5}{c.r:>5.1f} {c.alt:20}{c.statistic:>5}"
                     f"{c.beta:>6.2f}{c.alpha:>6.2f}{c.estimate:>13.5g}{c.reference:>13.5g}{c.z:>8.2f}")
    zs = np.array([c.z for c in cells if math.isfinite(c.z)])
    if zs.size:
        lines.append(f"cells={zs.size}  max|z|={np.max(np.abs(zs)):.2f}  "
                     f"share |z|>3: {np.mean(np.abs(zs) > 3):.3f}")
    return "\n".join(lines)


def gnuplot_script(cells, data_path: str) -> str:
    """Script plotting estimates against reference values from the CSV at ``data_path``."""
    return "\n".join([
        "set datafile separator ','",
        "set key off",
        "set xlabel 'reference'",
        "set ylabel 'estimate'",
        "set logscale xy" if cells and cells[0].table == "table1" else "unset logscale",
        f"plot '{data_path}' every ::1 using 10:9 with points pt 7, x with lines",
        "",
    ])


def table1(scale: str = "desk", seed: int = 20_180_101, workers: int = 1,
           dims=None, sizes=None, reps: int | None = None) -> list:
    """Null critical values of ``T / pi^{d/2}`` for every beta of the reference table."""
    reps = reps or (10_000 if scale == "desk" else 100_000)
    dims = dims or (2, 3, 5)
    sizes = sizes or ((20, 50, 100) if scale == "desk" else (20, 50, 100, 200, 300, 400))
    out = []
    for d in dims:
        for n in sizes:
            sim = simulate_statistics(NORMAL, d, n, ref.TABLE1_BETAS, (), reps, seed,
                                      (KEY_NULL, d, n), workers)
            for j, beta in enumerate(ref.TABLE1_BETAS):
                col = sim.values[:, j]
                for alpha in (0.05, 0.10):
                    out.append(Cell("table1", d, n, 0.0, "normal", "tn", beta, alpha,
                                    upper_quantile(col, alpha),
                                    ref.critical_value(d, n, beta, alpha),
                                    quantile_standard_error(col, alpha)))
    return out


def _binomial_se(p, m):
    return 100.0 * math.sqrt(max(p * (1.0 - p), 1e-12) / m)


def table2(scale: str = "desk", seed: int = 20_180_101, workers: int = 1,
           keys=None, trials: int | None = None, alpha: float = 0.05) -> list:
    """i.i.d. power at ``n = 50`` against the heavy-tailed alternatives."""
    trials = trials or (2_000 if scale == "desk" else 10_000)
    n = ref.TABLE2_N
    keys = keys or list(ref.TABLE2)
    crit = {}
    out = []
    for alt_text, d in keys:
        if d not in crit:
            null = simulate_statistics(NORMAL, d, n, ref.TABLE2_BETAS, ref.TABLE2_HW_BETAS,
                                       trials, seed, (KEY_NULL, d, n), workers)
            crit[d] = [upper_quantile(null.values[:, j], alpha) for j in range(len(null.columns))]
        alt = AlternativeSpec.parse(alt_text)
        sim = simulate_statistics(alt, d, n, ref.TABLE2_BETAS, ref.TABLE2_HW_BETAS,
                                  trials, seed, (KEY_POWER, d, n), workers)
        for j, (stat, beta) in enumerate(sim.columns):
            rate = float(np.mean(sim.values[:, j] > crit[d][j]))
            refv = ref.power_iid(alt_text, d, beta, stat)
            out.append(Cell("table2", d, n, 0.0, alt_text, stat, beta, alpha, 100.0 * rate,
                            refv, _binomial_se(refv / 100.0, trials)))
    return out


def table3(scale: str = "desk", seed: int = 20_180_101, workers: int = 1,
           keys=None, mc_samples: int | None = None, alpha: float = 0.05) -> list:
    """GARCH bootstrap level and power by the warp-speed method."""
    keys = keys or [k for k in ref.TABLE3 if scale == "paper" or k[1] == 2]
    out = []
    for innov, d, r in keys:
        if mc_samples:
            m = mc_samples
        elif scale == "desk":
            m = 500
        else:
            m = 10_000 if innov == "normal" else 2_000
        design = WarpDesign(benchmark_design(d, ref.TABLE3_GAMMA, r), AlternativeSpec.parse(innov),
                            ref.TABLE3_N, ref.TABLE3_BETAS, ref.TABLE3_HW_BETAS)
        res = warp_speed_study(design, m, seed, workers)
        rates = res.rejection_rates(alpha)
        for (stat, beta), rate in rates.items():
            refv = ref.power_garch(innov, d, r, beta, stat)
            # pooled critical value adds roughly as much noise as the rejection count
            se = math.sqrt(2.0) * _binomial_se(refv / 100.0, m)
            out.append(Cell("table3", d, ref.TABLE3_N, r, innov, stat, beta, alpha,
                            100.0 * rate, refv, se))
    return out


TABLES = {"table1": table1, "table2": table2, "table3": table3}
