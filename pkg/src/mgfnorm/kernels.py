"""Select the compiled kernels, falling back to numpy when they are missing.

Set ``MGFNORM_PURE_PYTHON=1`` to force the fallback.
"""
import os

try:
    if os.environ.get("MGFNORM_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    from . import _fallback as _impl

    BACKEND = "python"

pair_expm1_sum = _impl.pair_expm1_sum
pair_gauss_sum = _impl.pair_gauss_sum
ccc_filter = _impl.ccc_filter
ccc_negloglik = _impl.ccc_negloglik
ccc_negloglik_grad = _impl.ccc_negloglik_grad
ccc_simulate = _impl.ccc_simulate
sym_sqrt_small = _impl.sym_sqrt_small

__all__ = [
    "BACKEND",
    "pair_expm1_sum",
    "pair_gauss_sum",
    "ccc_filter",
    "ccc_negloglik",
    "ccc_negloglik_grad",
    "ccc_simulate",
    "sym_sqrt_small",
]
