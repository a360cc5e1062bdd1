"""Fit every benchmark on one training series and forecast a horizon."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigError, DataError
from .after import CombinerState, after_combine, combine_forecasts
from .ets import EtsParams, ets_filter, ets_fit, ets_forecast
from .naive import seasonal_naive, seasonal_naive_fitted
from .sarima import sarima_fit, sarima_fitted, sarima_forecast
from .stl import stl_decompose, stl_fit

log = logging.getLogger(__name__)

MODELS = ("sarima", "ets", "stl", "snaive")
# (1,0,0)(0,1,1) with drift suits series with a smoother seasonal shape
DEFAULT_SARIMA = ((1, 0, 0), (2, 1, 0), True)


@dataclass(frozen=True)
class BenchmarkConfig:
    models: tuple = MODELS
    sarima_order: tuple = DEFAULT_SARIMA[0]
    sarima_seasonal_order: tuple = DEFAULT_SARIMA[1]
    sarima_drift: bool = DEFAULT_SARIMA[2]
    ets_params: Optional[EtsParams] = None
    stl_trend_window: int = 13
    stl_robust: bool = True
    log_transform: bool = False
    smooth_outliers: bool = False
    after: bool = True
    after_warmup: int = 35

    def __post_init__(self):
        unknown = set(self.models) - set(MODELS)
        if unknown:
            raise ConfigError(f"unknown benchmark models: {sorted(unknown)}")


@dataclass(frozen=True)
class BenchmarkResult:
    name: str
    fitted: np.ndarray      # in-sample one-step predictions, NaN where undefined
    forecast: np.ndarray
    info: dict = field(default_factory=dict)


def smooth_outliers(series, k: float = 3.0, trend_window: int = 13) -> tuple[np.ndarray, np.ndarray]:
    """Replace points whose robust-STL remainder exceeds ``k`` MADs by
    trend + seasonal. Returns the cleaned series and the replaced indices
    (zero-based)."""
    y = np.asarray(series, dtype=float).copy()
    dec = stl_decompose(y, trend_window=trend_window, robust=True)
    r = dec.remainder
    mad = np.median(np.abs(r - np.median(r)))
    if mad <= 0:
        return y, np.array([], dtype=int)
    idx = np.flatnonzero(np.abs(r - np.median(r)) > k * mad)
    y[idx] = dec.trend[idx] + dec.seasonal[idx]
    return y, idx


def _member(name: str, y: np.ndarray, horizon: int, cfg: BenchmarkConfig):
    if name == "sarima":
        spec = sarima_fit(y, cfg.sarima_order, cfg.sarima_seasonal_order, cfg.sarima_drift)
        return sarima_fitted(spec, y), sarima_forecast(spec, y, horizon), {"spec": spec}
    if name == "ets":
        params = ets_fit(y, cfg.ets_params)
        return ets_filter(params, y).fitted, ets_forecast(params, y, horizon), {"params": params}
    if name == "stl":
        model = stl_fit(y, cfg.stl_trend_window, cfg.stl_robust)
        return model.fitted, model.forecast(horizon), {"holt": model.holt}
    if name == "snaive":
        return seasonal_naive_fitted(y), seasonal_naive(y, horizon), {}
    raise ConfigError(f"unknown model {name!r}")


def run_benchmarks(train, horizon: int, config: BenchmarkConfig = BenchmarkConfig()
                   ) -> dict[str, BenchmarkResult]:
    """Fit each configured model on ``train`` and forecast ``horizon`` steps.

    With ``log_transform`` models see ``log(train)`` and outputs are
    exponentiated without bias correction. The AFTER combination learns its
    weights from the members' one-step in-sample predictions after
    ``after_warmup`` observations and applies the final weights to the
    members' horizon forecasts.
    """
    y = np.asarray(train, dtype=float).ravel()
    info = {}
    if config.smooth_outliers:
        y, replaced = smooth_outliers(y)
        info["outliers"] = replaced.tolist()
    if config.log_transform:
        if np.any(y <= 0):
            raise DataError("log transform needs strictly positive demand")
        work = np.log(y)
        back = np.exp
    else:
        work = y
        back = lambda v: v
    results = {}
    for name in config.models:
        fitted, fc, extra = _member(name, work, horizon, config)
        results[name] = BenchmarkResult(name, back(np.asarray(fitted)), back(np.asarray(fc)), {**info, **extra})

    if config.after and len(results) >= 2:
        names = list(results)
        F = np.vstack([results[n].fitted for n in names])
        start = max(config.after_warmup, int(np.max(np.argmax(np.isfinite(F), axis=1))))
        if start >= len(y):
            raise DataError("AFTER warm-up leaves no observations to learn weights from")
        combined, trace = after_combine(F[:, start:], y[start:])
        fitted = np.full(len(y), np.nan)
        fitted[start:] = combined
        forecast = combine_forecasts(trace[-1], np.vstack([results[n].forecast for n in names]))
        results["after"] = BenchmarkResult(
            "after", fitted, forecast,
            {"members": names, "weights": trace[-1].weights.tolist(), "start": start})
    return results
