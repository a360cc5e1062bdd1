from __future__ import annotations

import numpy as np

from ..errors import InsufficientDataError


def seasonal_naive(series, horizon: int, period: int = 12) -> np.ndarray:
    """``y[T+h] = y[T+h-12*ceil(h/12)]``."""
    y = np.asarray(series, dtype=float).ravel()
    if len(y) < period:
        raise InsufficientDataError(f"seasonal naive needs {period} observations, got {len(y)}")
    last = y[len(y) - period:]
    return last[np.arange(horizon) % period]


def seasonal_naive_fitted(series, period: int = 12) -> np.ndarray:
    """In-sample one-step predictions (NaN for the first cycle)."""
    y = np.asarray(series, dtype=float).ravel()
    out = np.full(len(y), np.nan)
    out[period:] = y[:-period]
    return out
