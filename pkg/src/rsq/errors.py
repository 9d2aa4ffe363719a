"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class RSQError(Exception):
    """Base class for every library error."""


class NumericalError(RSQError):
    """Base class for failures of a numerical routine (CLI exit code 3)."""


class SingularMatrix(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class MatrixOverflow(NumericalError):
    pass


class NotRankOne(NumericalError):
    pass


class SingularFactor(NumericalError):
    pass


class RegularityViolation(NumericalError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


class ChartMismatch(NumericalError):
    pass


class NonHolomorphic(NumericalError):
    pass


class PoleProximity(NumericalError):
    pass


class BadMultiple(RSQError, ValueError):
    """Flow exponent is not a multiple of the cycle length."""


class BadParameters(RSQError, ValueError):
    pass


class ConfigError(RSQError, ValueError):
    """Invalid run configuration (CLI exit code 2)."""
