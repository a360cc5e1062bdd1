"""STL decomposition (periodic seasonal mode) and an STL + Holt forecaster."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError
from .ets import holt_fit, holt_forecast

PERIOD = 12


@dataclass(frozen=True)
class StlResult:
    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    weights: np.ndarray


def loess(x: np.ndarray, y: np.ndarray, span: int, weights=None, degree: int = 1,
          x_eval=None) -> np.ndarray:
    """Local polynomial regression with tricube neighbourhood weights.

    ``span`` is the number of nearest neighbours in each local fit. When it
    exceeds the number of points, the neighbourhood radius is stretched by
    ``span / n`` as in Cleveland's STL.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    w_rob = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    x_eval = x if x_eval is None else np.asarray(x_eval, dtype=float)
    q = min(span, n)
    out = np.empty(len(x_eval))
    for i, x0 in enumerate(x_eval):
        dist = np.abs(x - x0)
        h = np.partition(dist, q - 1)[q - 1]
        if span > n:
            h += (span - n) / 2.0
        h = max(h, 1e-12)
        u = dist / h
        w = np.where(u < 1, (1 - u ** 3) ** 3, 0.0) * w_rob
        if w.sum() <= 0:
            out[i] = np.average(y, weights=w_rob) if w_rob.sum() > 0 else y.mean()
            continue
        V = np.vander(x - x0, degree + 1, increasing=True)
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(V * sw[:, None], y * sw, rcond=None)
        out[i] = coef[0]
    return out


def _moving_average(x: np.ndarray, k: int) -> np.ndarray:
    return np.convolve(x, np.ones(k) / k, mode="valid")


def _bisquare_weights(resid: np.ndarray) -> np.ndarray:
    h = 6.0 * np.median(np.abs(resid))
    if h <= 1e-300:
        return np.ones_like(resid)
    u = np.abs(resid) / h
    return np.where(u < 1, (1 - u ** 2) ** 2, 0.0)


def stl_decompose(series, trend_window: int = 13, robust: bool = True,
                  period: int = PERIOD, lowpass_window: int | None = None,
                  inner: int | None = None, outer: int | None = None) -> StlResult:
    """Additive seasonal-trend decomposition with a periodic seasonal.

    In periodic mode each cycle-subseries is smoothed to its (robustness
    weighted) mean, so the seasonal pattern repeats exactly. The trend is a
    degree-1 LOESS with ``trend_window`` neighbours. With ``robust`` the
    outer loop downweights large remainders by bisquare weights.
    """
    y = np.asarray(series, dtype=float).ravel()
    n = len(y)
    if n < 2 * period:
        raise InsufficientDataError(f"STL needs at least {2 * period} observations, got {n}")
    if trend_window % 2 == 0:
        trend_window += 1
    if lowpass_window is None:
        lowpass_window = period + 1 if period % 2 == 0 else period
    if inner is None:
        inner = 1 if robust else 2
    if outer is None:
        outer = 15 if robust else 0
    t = np.arange(n, dtype=float)
    phase = np.arange(n) % period
    trend = np.zeros(n)
    w = np.ones(n)
    seasonal = np.zeros(n)
    for k in range(outer + 1):
        for _ in range(inner):
            detr = y - trend
            # periodic cycle-subseries: weighted mean per phase, extended by a
            # period on each side for the low-pass step
            means = np.array([np.average(detr[phase == p], weights=w[phase == p])
                              if w[phase == p].sum() > 0 else detr[phase == p].mean()
                              for p in range(period)])
            ext = means[np.arange(-period, n + period) % period]
            low = _moving_average(_moving_average(_moving_average(ext, period), period), 3)
            low = loess(np.arange(len(low), dtype=float), low, lowpass_window)
            seasonal = ext[period: period + n] - low
            trend = loess(t, y - seasonal, trend_window, weights=w)
        if k < outer:
            w = _bisquare_weights(y - trend - seasonal)
    remainder = y - trend - seasonal
    return StlResult(trend, seasonal, remainder, w)


@dataclass(frozen=True)
class StlForecaster:
    decomposition: StlResult
    holt: tuple
    fitted: np.ndarray

    def forecast(self, horizon: int) -> np.ndarray:
        n = len(self.decomposition.seasonal)
        last_cycle = self.decomposition.seasonal[n - PERIOD:]
        adjusted = holt_forecast(self.holt, horizon)
        return adjusted + last_cycle[np.arange(horizon) % PERIOD]


def stl_fit(series, trend_window: int = 13, robust: bool = True) -> StlForecaster:
    """Decompose, then fit Holt's linear method to trend + remainder."""
    y = np.asarray(series, dtype=float).ravel()
    dec = stl_decompose(y, trend_window=trend_window, robust=robust)
    holt, fitted_adj = holt_fit(dec.trend + dec.remainder)
    return StlForecaster(dec, holt, fitted_adj + dec.seasonal)


def stl_forecast(series, horizon: int, trend_window: int = 13, robust: bool = True) -> np.ndarray:
    """Forecast ``horizon`` months: Holt on the seasonally adjusted series,
    plus the last seasonal cycle repeated."""
    return stl_fit(series, trend_window, robust).forecast(horizon)
