"""Monthly natural-gas demand forecasting with just-in-time local Gaussian
process regression, summer meter-delay correction and classical
benchmarks."""
from .errors import (ConfigError, DataError, InsufficientDataError, InsufficientHistoryError,
                     JitlGprError, NotPositiveDefiniteError, NumericalError)
from .timegrid import MonthlySeries, YearMonth

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataError", "InsufficientDataError", "InsufficientHistoryError",
    "JitlGprError", "MonthlySeries", "NotPositiveDefiniteError", "NumericalError", "YearMonth",
]
