"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best wall time per kernel for both backends and the speed-up.
"""
import argparse
import timeit

import numpy as np

from mgfnorm import _fallback
from mgfnorm.garch import benchmark_design

try:
    from mgfnorm import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases():
    rng = np.random.default_rng(0)
    y50 = rng.standard_normal((50, 2))
    y400 = rng.standard_normal((400, 5))
    p = benchmark_design(2, 0.4, 0.3)
    x = rng.standard_normal((300, 2)) * 0.5
    s0 = np.ones(2)
    rinv = np.linalg.inv(p.R)
    logdet = float(np.log(np.linalg.det(p.R)))
    eps = rng.standard_normal((800, 2))
    return {
        "pair_expm1_sum n=50 d=2": lambda k: k.pair_expm1_sum(y50, 1.0 / 12.0),
        "pair_expm1_sum n=400 d=5": lambda k: k.pair_expm1_sum(y400, 1.0 / 12.0),
        "pair_gauss_sum n=400 d=5": lambda k: k.pair_gauss_sum(y400, 0.5),
        "ccc_negloglik n=300": lambda k: k.ccc_negloglik(x, p.b, p.B, p.Gamma, s0, rinv, logdet),
        "ccc_negloglik_grad n=300": lambda k: k.ccc_negloglik_grad(x, p.b, p.B, p.Gamma, s0, rinv, logdet),
        "ccc_simulate n=800": lambda k: k.ccc_simulate(eps, p.b, p.B, p.Gamma, p.R, s0, 1e12),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return
    print(f"{'kernel':28}{'cython (ms)':>14}{'python (ms)':>14}{'speed-up':>10}")
    for name, fn in cases().items():
        times = []
        for mod in (_kernels, _fallback):
            number = 3
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            times.append(1e3 * best)
        print(f"{name:28}{times[0]:>14.3f}{times[1]:>14.3f}{times[1] / times[0]:>10.1f}")


if __name__ == "__main__":
    main()
