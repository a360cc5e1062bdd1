"""Additive Holt-Winters exponential smoothing, ETS(A,A,A), and Holt's
linear method.

Error-correction form with one-step error ``e_t = y_t - (l + b + s_{t-12})``::

    l_t = l_{t-1} + b_{t-1} + alpha * e_t
    b_t = b_{t-1} + beta * e_t
    s_t = s_{t-12} + gamma * e_t

Point forecasts are shared by the additive- and multiplicative-error
versions, so only the additive recursion is implemented.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..errors import ConfigError, InsufficientDataError

PERIOD = 12


@dataclass(frozen=True)
class EtsParams:
    alpha: float
    beta: float
    gamma: float
    level0: float
    trend0: float
    seasonal0: tuple  # s_{1-12} .. s_0, i.e. the states for months 1..12 of the first cycle

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        s = np.asarray(self.seasonal0, dtype=float)
        if s.shape != (PERIOD,):
            raise ConfigError("need 12 initial seasonal states")
        if abs(s.sum()) > 1e-8 * max(1.0, np.abs(s).max()):
            raise ConfigError("initial seasonal states must sum to zero")
        object.__setattr__(self, "seasonal0", tuple(float(v) for v in s))


@dataclass(frozen=True)
class EtsState:
    fitted: np.ndarray      # one-step predictions for each observation
    errors: np.ndarray
    level: float
    trend: float
    seasonal: np.ndarray    # last 12 seasonal states, oldest first


def ets_filter(params: EtsParams, series) -> EtsState:
    """Run the recursions over ``series``."""
    y = np.asarray(series, dtype=float).ravel()
    a, b, g = params.alpha, params.beta, params.gamma
    level, trend = params.level0, params.trend0
    seas = list(params.seasonal0)
    fitted = np.empty(len(y))
    for t, yt in enumerate(y):
        s = seas[t]
        f = level + trend + s
        e = yt - f
        fitted[t] = f
        level, trend = level + trend + a * e, trend + b * e
        seas.append(s + g * e)
    return EtsState(fitted, y - fitted, level, trend, np.asarray(seas[len(y):]))


def _sse(params: EtsParams, y: np.ndarray) -> float:
    return float(np.sum(ets_filter(params, y).errors ** 2))


def heuristic_init(series) -> tuple[float, float, np.ndarray]:
    """Level, trend and seasonal states from the first two cycles."""
    y = np.asarray(series, dtype=float)
    c1, c2 = y[:PERIOD], y[PERIOD: 2 * PERIOD]
    trend = (c2.mean() - c1.mean()) / PERIOD
    # detrend the first cycle around its centre
    t = np.arange(PERIOD) - (PERIOD - 1) / 2.0
    seasonal = c1 - (c1.mean() + trend * t)
    seasonal -= seasonal.mean()
    # level at time 0 so that l_0 + b_0 is the first deseasonalised value
    level0 = c1.mean() - trend * ((PERIOD - 1) / 2.0 + 1)
    return level0, trend, seasonal


def _unpack(x: np.ndarray) -> EtsParams:
    s = np.append(x[5:], -np.sum(x[5:]))
    return EtsParams(*(float(v) for v in x[:5]), tuple(s))


def ets_fit(series, fixed_params: EtsParams | None = None, maxiter: int = 2000) -> EtsParams:
    """Least-squares fit of smoothing constants and initial states.

    With ``fixed_params`` no optimisation is done.
    """
    y = np.asarray(series, dtype=float).ravel()
    if len(y) < 2 * PERIOD:
        raise InsufficientDataError(f"ETS needs at least {2 * PERIOD} observations, got {len(y)}")
    if fixed_params is not None:
        return fixed_params
    level0, trend0, seasonal = heuristic_init(y)
    scale = max(np.std(y), 1e-8)
    best = None
    for a0, b0, g0 in ((0.3, 0.05, 0.1), (0.05, 0.01, 0.01)):
        x0 = np.concatenate([[a0, b0, g0, level0, trend0], seasonal[:-1]])
        # states are optimised in units of the series scale
        s = np.concatenate([[1.0, 1.0, 1.0], np.full(len(x0) - 3, scale)])
        obj = lambda z: _sse(_unpack(z * s), y) / scale ** 2
        bounds = [(0.0, 1.0)] * 3 + [(None, None)] * (len(x0) - 3)
        res = optimize.minimize(obj, x0 / s, method="L-BFGS-B", bounds=bounds,
                                options={"maxiter": maxiter, "maxfun": 50 * maxiter})
        if best is None or res.fun < best.fun:
            best = res
    x = best.x * np.concatenate([[1.0, 1.0, 1.0], np.full(len(best.x) - 3, scale)])
    x[:3] = np.clip(x[:3], 0.0, 1.0)
    return _unpack(x)


def ets_forecast(params: EtsParams, series, horizon: int) -> np.ndarray:
    """h-step forecasts ``l_T + h b_T + s_{T+h-12k}``."""
    st = ets_filter(params, series)
    h = np.arange(1, horizon + 1)
    return st.level + h * st.trend + st.seasonal[(h - 1) % PERIOD]


def holt_filter(alpha: float, beta: float, level0: float, trend0: float, series):
    y = np.asarray(series, dtype=float)
    level, trend = level0, trend0
    fitted = np.empty(len(y))
    for t, yt in enumerate(y):
        f = level + trend
        e = yt - f
        fitted[t] = f
        level, trend = f + alpha * e, trend + beta * e
    return fitted, level, trend


def holt_fit(series) -> tuple[tuple, np.ndarray]:
    """Holt's linear method by SSE over (alpha, beta) in [0, 1]^2.

    The initial level and trend come from the first two observations.
    Returns ``((alpha, beta, level_T, trend_T), fitted)``.
    """
    y = np.asarray(series, dtype=float)
    if len(y) < 3:
        raise InsufficientDataError("Holt's method needs at least 3 observations")
    trend0 = y[1] - y[0]
    level0 = y[0] - trend0
    obj = lambda z: float(np.sum((y - holt_filter(z[0], z[1], level0, trend0, y)[0]) ** 2))
    best = None
    for z0 in ((0.5, 0.1), (0.1, 0.01), (0.9, 0.3)):
        res = optimize.minimize(obj, z0, method="L-BFGS-B", bounds=[(0, 1), (0, 1)])
        if best is None or res.fun < best.fun:
            best = res
    a, b = np.clip(best.x, 0, 1)
    fitted, level, trend = holt_filter(a, b, level0, trend0, y)
    return (float(a), float(b), float(level), float(trend)), fitted


def holt_forecast(state: tuple, horizon: int) -> np.ndarray:
    _, _, level, trend = state
    return level + trend * np.arange(1, horizon + 1)
