"""Seasonal ARIMA with conditional-sum-of-squares estimation.

The differenced series ``w = (1-B)^d (1-B^12)^D y`` minus the drift ``mu``
follows

    phi(B) Phi(B^12) (w_t - mu) = theta(B) Theta(B^12) e_t

with ``phi(B) = 1 - phi_1 B - ...`` and ``theta(B) = 1 + theta_1 B + ...``.
Errors before the first usable observation are taken as zero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, signal

from ..errors import ConfigError, InsufficientDataError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SarimaSpec:
    order: tuple = (1, 0, 0)
    seasonal_order: tuple = (0, 0, 0)
    season: int = 12
    drift: bool = False
    ar: tuple = ()
    ma: tuple = ()
    sar: tuple = ()
    sma: tuple = ()
    mu: float = 0.0
    sigma2: float = float("nan")
    stationary: bool = True
    invertible: bool = True

    def __post_init__(self):
        p, d, q = self.order
        P, D, Q = self.seasonal_order
        if min(p, q, P, Q) < 0 or d not in (0, 1, 2) or D not in (0, 1, 2):
            raise ConfigError(f"invalid SARIMA orders {self.order}{self.seasonal_order}")

    @property
    def n_coef(self) -> int:
        p, _, q = self.order
        P, _, Q = self.seasonal_order
        return p + q + P + Q + int(self.drift)

    def ar_poly(self) -> np.ndarray:
        """Coefficients of phi(B) Phi(B^s), constant term first."""
        return np.convolve(np.r_[1.0, -np.asarray(self.ar, dtype=float)],
                           _seasonal(np.r_[1.0, -np.asarray(self.sar, dtype=float)], self.season))

    def ma_poly(self) -> np.ndarray:
        return np.convolve(np.r_[1.0, np.asarray(self.ma, dtype=float)],
                           _seasonal(np.r_[1.0, np.asarray(self.sma, dtype=float)], self.season))

    def diff_poly(self) -> np.ndarray:
        poly = np.array([1.0])
        for _ in range(self.order[1]):
            poly = np.convolve(poly, [1.0, -1.0])
        for _ in range(self.seasonal_order[1]):
            poly = np.convolve(poly, _seasonal(np.array([1.0, -1.0]), self.season))
        return poly


def _seasonal(poly: np.ndarray, s: int) -> np.ndarray:
    out = np.zeros((len(poly) - 1) * s + 1)
    out[::s] = poly
    return out


def difference(y: np.ndarray, spec: SarimaSpec) -> np.ndarray:
    dp = spec.diff_poly()
    k = len(dp) - 1
    return np.convolve(y, dp)[k: len(y)] if k else y.copy()


def _with_coefs(spec: SarimaSpec, x: np.ndarray) -> SarimaSpec:
    p, _, q = spec.order
    P, _, Q = spec.seasonal_order
    parts = np.split(np.asarray(x, dtype=float), np.cumsum([p, q, P, Q]))
    mu = float(parts[4][0]) if spec.drift else 0.0
    coefs = [tuple(float(v) for v in part) for part in parts[:4]]
    return SarimaSpec(spec.order, spec.seasonal_order, spec.season, spec.drift, *coefs, mu)


def css_residuals(spec: SarimaSpec, series) -> np.ndarray:
    """Conditional residuals of the differenced series, starting after the
    AR lags."""
    w = difference(np.asarray(series, dtype=float), spec) - spec.mu
    a = spec.ar_poly()
    k = len(a) - 1
    u = np.convolve(w, a)[k: len(w)]
    return signal.lfilter([1.0], spec.ma_poly(), u)


def _roots_outside(poly: np.ndarray) -> bool:
    # poly in increasing powers of B
    if len(poly) <= 1 or np.allclose(poly[1:], 0):
        return True
    return bool(np.all(np.abs(np.roots(poly[::-1])) > 1.0))


def sarima_fit(series, order=(1, 0, 0), seasonal_order=(0, 0, 0), drift: bool = False,
               season: int = 12) -> SarimaSpec:
    """Estimate coefficients by conditional sum of squares."""
    y = np.asarray(series, dtype=float).ravel()
    spec = SarimaSpec(tuple(order), tuple(seasonal_order), season, drift)
    w = difference(y, spec)
    k = spec.n_coef
    if len(w) < max(3 * k, 3) or len(w) <= len(spec.ar_poly()) - 1 + 2:
        raise InsufficientDataError(
            f"{len(w)} differenced observations are too few for {k} coefficients")
    if k == 0:
        fitted = spec
    else:
        x0 = np.zeros(k)
        if drift:
            x0[-1] = w.mean()

        def resid(x):
            e = css_residuals(_with_coefs(spec, x), y)
            # an explosive MA filter blows up; cap so the solver backs off
            return np.clip(np.nan_to_num(e, nan=1e10, posinf=1e10, neginf=-1e10), -1e10, 1e10)

        res = optimize.least_squares(resid, x0, method="lm", xtol=1e-12, ftol=1e-12)
        fitted = _with_coefs(spec, res.x)
    e = css_residuals(fitted, y)
    stationary = _roots_outside(fitted.ar_poly())
    invertible = _roots_outside(fitted.ma_poly())
    if not (stationary and invertible):
        log.warning("fitted SARIMA%s%s is %s", fitted.order, fitted.seasonal_order,
                    "non-stationary" if not stationary else "non-invertible")
    return SarimaSpec(**{**fitted.__dict__, "sigma2": float(np.mean(e ** 2)),
                         "stationary": stationary, "invertible": invertible})


def _forecast_differenced(spec: SarimaSpec, y: np.ndarray, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    w = difference(y, spec) - spec.mu
    e_full = np.zeros(len(w))
    e = css_residuals(spec, y)
    e_full[len(w) - len(e):] = e
    a = spec.ar_poly()
    c = spec.ma_poly()
    z = list(w)
    ee = list(e_full)
    out = []
    for _ in range(horizon):
        t = len(z)
        val = -sum(a[k] * z[t - k] for k in range(1, len(a)) if t - k >= 0)
        val += sum(c[k] * ee[t - k] for k in range(1, len(c)) if t - k >= 0)
        z.append(val)
        ee.append(0.0)
        out.append(val + spec.mu)
    return np.asarray(out), e_full


def _integrate(spec: SarimaSpec, y: np.ndarray, w_future: np.ndarray) -> np.ndarray:
    dp = spec.diff_poly()
    hist = list(y)
    out = []
    for wf in w_future:
        t = len(hist)
        val = wf - sum(dp[k] * hist[t - k] for k in range(1, len(dp)))
        hist.append(val)
        out.append(val)
    return np.asarray(out)


def sarima_forecast(spec: SarimaSpec, series, horizon: int) -> np.ndarray:
    """Recursive h-step forecasts, integrated back to the original scale."""
    y = np.asarray(series, dtype=float).ravel()
    w_future, _ = _forecast_differenced(spec, y, horizon)
    return _integrate(spec, y, w_future)


def sarima_fitted(spec: SarimaSpec, series) -> np.ndarray:
    """In-sample one-step predictions; NaN where the conditional residual is
    not defined."""
    y = np.asarray(series, dtype=float).ravel()
    e = css_residuals(spec, y)
    out = np.full(len(y), np.nan)
    out[len(y) - len(e):] = y[len(y) - len(e):] - e
    return out


def simulate(n: int, spec: SarimaSpec, sigma: float = 1.0, seed: int = 0, burn: int = 200,
             y0: float = 0.0) -> np.ndarray:
    """Simulate a path of ``spec`` (for testing estimators)."""
    rng = np.random.default_rng(seed)
    e = rng.normal(0.0, sigma, n + burn)
    z = signal.lfilter(spec.ma_poly(), spec.ar_poly(), e)[burn:] + spec.mu
    dp = spec.diff_poly()
    if len(dp) == 1:
        return z
    y = list(np.full(len(dp) - 1, y0))
    for wt in z:
        t = len(y)
        y.append(wt - sum(dp[k] * y[t - k] for k in range(1, len(dp))))
    return np.asarray(y[len(dp) - 1:])
