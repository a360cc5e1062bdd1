"""Forecast accuracy measures and residual diagnostics."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DataError, InsufficientDataError


@dataclass(frozen=True)
class EvalReport:
    rmse: float
    mae: float
    mape: float
    n: int
    yearly_pe: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _pair(actuals, predictions) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(actuals, dtype=float).ravel()
    yhat = np.asarray(predictions, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise DataError(f"length mismatch: {y.size} actuals vs {yhat.size} predictions")
    if y.size == 0:
        raise DataError("cannot evaluate an empty forecast")
    return y, yhat


def mae(actuals, predictions) -> float:
    y, yhat = _pair(actuals, predictions)
    return float(np.mean(np.abs(y - yhat)))


def rmse(actuals, predictions) -> float:
    y, yhat = _pair(actuals, predictions)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def mape(actuals, predictions) -> float:
    """Mean absolute percentage error in percent. Zero actuals raise."""
    y, yhat = _pair(actuals, predictions)
    zeros = np.flatnonzero(y == 0)
    if zeros.size:
        raise ZeroDivisionError(f"MAPE undefined: actual value at index {int(zeros[0])} is zero")
    return float(100.0 * np.mean(np.abs((y - yhat) / y)))


def evaluate(actuals, predictions, with_mape: bool = True,
             annual: Optional[tuple[float, float]] = None) -> EvalReport:
    """MAE, RMSE and MAPE of ``predictions`` against ``actuals``.

    ``annual`` optionally carries ``(actual_total, predicted_total)`` for the
    signed yearly percent error.
    """
    y, yhat = _pair(actuals, predictions)
    pe = yearly_pe(*annual) if annual is not None else None
    return EvalReport(
        rmse=rmse(y, yhat),
        mae=mae(y, yhat),
        mape=mape(y, yhat) if with_mape else float("nan"),
        n=int(y.size),
        yearly_pe=pe,
    )


def yearly_pe(actual_total: float, predicted_total: float) -> float:
    """Signed percent error of a predicted annual total."""
    if actual_total == 0:
        raise ZeroDivisionError("yearly percent error undefined for a zero actual total")
    return 100.0 * (predicted_total - actual_total) / actual_total


def autocorrelation(x, nlags: int) -> np.ndarray:
    """Sample autocorrelations at lags 1..nlags (biased, full-sample
    denominator)."""
    x = np.asarray(x, dtype=float).ravel()
    d = x - x.mean()
    denom = float(d @ d)
    if denom <= 1e-300 * max(1, x.size):
        raise DataError("autocorrelation undefined for a constant series")
    return np.array([d[k:] @ d[:-k] / denom for k in range(1, nlags + 1)])


def ljung_box(residuals, lag: int = 4) -> float:
    """Ljung-Box Q statistic, Q = n(n+2) sum_k r_k^2 / (n-k)."""
    r = np.asarray(residuals, dtype=float).ravel()
    n = r.size
    if lag < 1 or n <= lag:
        raise InsufficientDataError(f"Ljung-Box needs length > lag >= 1 (n={n}, lag={lag})")
    rho = autocorrelation(r, lag)
    k = np.arange(1, lag + 1)
    return float(n * (n + 2) * np.sum(rho ** 2 / (n - k)))
