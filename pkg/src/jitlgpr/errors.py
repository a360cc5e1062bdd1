"""Exception hierarchy shared across the package."""


class JitlGprError(Exception):
    """Base class for all package errors."""


class DataError(JitlGprError, ValueError):
    """Input data is malformed (gaps, negative demand, bad CSV rows)."""


class InvalidIndexError(DataError):
    pass


class OutOfHistoryError(DataError):
    pass


class InsufficientHistoryError(DataError):
    """Too few past observations to build a model."""


class InsufficientDataError(DataError):
    pass


class ConfigError(JitlGprError, ValueError):
    pass


class NumericalError(JitlGprError, ArithmeticError):
    """Raised when a numerical routine cannot produce a usable result."""


class NotPositiveDefiniteError(NumericalError):
    pass


class InfeasibleProblemError(NumericalError):
    pass
