"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`MgfNormError`
and carries an ``exit_code`` used by the command-line interface
(3 = data error, 4 = numerical failure).
"""


class MgfNormError(Exception):
    exit_code = 4


class DataError(MgfNormError, ValueError):
    exit_code = 3


class NumericalError(MgfNormError, ArithmeticError):
    exit_code = 4


class SingularCovariance(DataError):
    """Sample covariance matrix is (numerically) singular."""


class ParseError(DataError):
    """Input file could not be parsed into a data matrix."""


class InvalidSpec(DataError):
    """Malformed alternative or model specification."""


class BetaOutOfRange(DataError):
    """Weight parameter outside the admissible range."""


class DimensionTooLarge(DataError):
    """Quadrature oracle requested in too many dimensions."""


class NonFiniteResult(NumericalError):
    """An exponential in the statistic would overflow."""


class NonStationaryExplosion(NumericalError):
    """Simulated conditional variance exceeded the explosion threshold."""


class ExplosiveRegion(NumericalError):
    """Likelihood is not finite at the starting point of the optimizer."""


class OptimizerFailed(NumericalError):
    """Quasi-likelihood maximisation did not converge."""
