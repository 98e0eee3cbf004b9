"""Goodness-of-fit tests for multivariate normality based on the empirical
moment generating function, for i.i.d. data and for CCC-GARCH innovations."""
from .alternatives import AlternativeSpec, sample_alternative
from .errors import (BetaOutOfRange, DataError, ExplosiveRegion, MgfNormError,
                     NonFiniteResult, NonStationaryExplosion, NumericalError, OptimizerFailed,
                     ParseError, SingularCovariance)
from .garch import (GarchFit, GarchParams, GarchSpec, WarpDesign, benchmark_design,
                    bootstrap_test, garch_residuals, garch_test_statistic, qmle_fit,
                    simulate_ccc_garch, warp_speed_study)
from .kernels import BACKEND
from .linalg import ScaledResiduals, scale_residuals
from .simulation import (CriticalTable, McConfig, TestOutcome, empirical_p_value,
                         estimate_critical_values, iid_test, simulate_statistics)
from .statistic import (StatisticValue, asymptotic_mean, asymptotic_variance, compute_tn_beta,
                        extrapolate_limit, hw_statistic, mardia_kurtosis, mardia_skewness,
                        mrs_skewness, skewness_summary)

__version__ = "0.1.0"

__all__ = [
    "AlternativeSpec", "BACKEND", "BetaOutOfRange", "CriticalTable", "DataError",
    "ExplosiveRegion", "GarchFit", "GarchParams", "GarchSpec", "McConfig", "MgfNormError",
    "NonFiniteResult", "NonStationaryExplosion", "NumericalError", "OptimizerFailed",
    "ParseError", "ScaledResiduals", "SingularCovariance", "StatisticValue", "TestOutcome",
    "WarpDesign", "asymptotic_mean", "asymptotic_variance", "benchmark_design",
    "bootstrap_test", "compute_tn_beta", "empirical_p_value", "estimate_critical_values",
    "extrapolate_limit", "garch_residuals", "garch_test_statistic", "hw_statistic", "iid_test",
    "mardia_kurtosis", "mardia_skewness", "mrs_skewness", "qmle_fit", "sample_alternative",
    "scale_residuals", "simulate_ccc_garch", "simulate_statistics", "skewness_summary",
    "warp_speed_study",
]
