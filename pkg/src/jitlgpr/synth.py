"""Seeded generator of monthly gas-demand series with summer meter-delay
corruption.

The generator produces a ground-truth series (per-month linear trends +
additive seasonality + AR(1) noise) and an "observed" copy in which part of each early summer
month's consumption is booked into September of the same year. Yearly
summer totals are conserved exactly, as with real delayed meter readings.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .timegrid import MonthlySeries, YearMonth

# Large-city heating profile: ~115-125 msm3 in January, ~10-15 msm3 in summer at the
# default level. Offsets sum to zero.
DEFAULT_SEASONAL = (66.0, 56.0, 37.0, 5.0, -22.0, -42.0, -48.0, -49.5, -45.5, -25.0, 15.0, 53.0)


def _as_seasonal(values: Sequence[float], name: str) -> tuple[float, ...]:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (12,):
        raise ConfigError(f"{name} needs 12 entries, got {arr.shape}")
    if abs(arr.sum()) > 1e-9 * max(1.0, np.abs(arr).max()):
        raise ConfigError(f"{name} offsets must sum to 0 (got {arr.sum():g})")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class SynthConfig:
    n_years: int = 9
    extra_months: int = 0
    start_year: int = 2014
    level: float = 58.0
    slope: float = 2.5
    seasonal: tuple = DEFAULT_SEASONAL
    noise_std: float = 3.0
    noise_ar: float = 0.5
    # relative yearly growth of the seasonal swing: month m has slope
    # slope + seasonal[m] * seasonal_growth
    seasonal_growth: float = 0.03
    # structural break: from ordinal year ``break_year`` on, the overrides apply
    break_year: Optional[int] = None
    post_break_seasonal: Optional[tuple] = None
    post_break_slope: Optional[float] = None
    post_break_level: Optional[float] = None
    m0: int = 7
    n_corrupt_years: int = 6
    # fraction of each month m0..8 booked into September, one per month
    delay_fractions: Optional[tuple] = None
    seed: int = 42

    def __post_init__(self):
        if self.n_years < 1 or self.extra_months < 0:
            raise ConfigError("n_years must be >= 1 and extra_months >= 0")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        if not -1.0 < self.noise_ar < 1.0:
            raise ConfigError("noise_ar must lie in (-1, 1)")
        object.__setattr__(self, "seasonal", _as_seasonal(self.seasonal, "seasonal"))
        if self.post_break_seasonal is not None:
            object.__setattr__(self, "post_break_seasonal",
                               _as_seasonal(self.post_break_seasonal, "post_break_seasonal"))
        if not 1 <= self.m0 <= 9:
            raise ConfigError(f"m0 must be in 1..9, got {self.m0}")
        if not 0 <= self.n_corrupt_years <= self.n_years:
            raise ConfigError("n_corrupt_years must be within 0..n_years")
        fr = self.delay_fractions
        if fr is None:
            fr = (0.45,) * (9 - self.m0)
        fr = tuple(float(f) for f in fr)
        if len(fr) != 9 - self.m0:
            raise ConfigError(f"delay_fractions needs {9 - self.m0} entries for m0={self.m0}")
        if any(not 0.0 <= f <= 1.0 for f in fr):
            raise ConfigError("delay fractions must lie in [0, 1]")
        object.__setattr__(self, "delay_fractions", fr)

    @property
    def n_months(self) -> int:
        return 12 * self.n_years + self.extra_months

    def with_(self, **changes) -> "SynthConfig":
        return replace(self, **changes)


def expected_level(config: SynthConfig) -> np.ndarray:
    """Noise-free demand for every month of the configured horizon."""
    n = config.n_months
    k = np.arange(n)
    year = k // 12 + 1
    month = k % 12
    level = np.full(n, config.level)
    slope = np.full(n, config.slope)
    seasonal = np.asarray(config.seasonal)[month]
    if config.break_year is not None:
        after = year >= config.break_year
        if config.post_break_level is not None:
            level[after] = config.post_break_level
        if config.post_break_slope is not None:
            slope[after] = config.post_break_slope
        if config.post_break_seasonal is not None:
            seasonal = np.where(after, np.asarray(config.post_break_seasonal)[month], seasonal)
    return level + slope * year + seasonal * (1.0 + config.seasonal_growth * (year - 1))


def corrupt(truth: np.ndarray, m0: int, n_corrupt_years: int,
            delay_fractions: Sequence[float]) -> np.ndarray:
    """Shift a fraction of months ``m0..8`` into September for the first
    ``n_corrupt_years`` years. Works on a flat monthly array starting in
    January."""
    observed = np.array(truth, dtype=float)
    for y in range(n_corrupt_years):
        sep = 12 * y + 8
        if sep >= len(observed):
            break
        for f, m in zip(delay_fractions, range(m0, 9)):
            i = 12 * y + m - 1
            moved = f * observed[i]
            observed[i] -= moved
            observed[sep] += moved
    return observed


def generate(config: SynthConfig = SynthConfig()) -> tuple[MonthlySeries, MonthlySeries]:
    """Return ``(truth, observed)`` series for ``config``.

    Both start in January of ``config.start_year``. Identical configs
    (seed included) give bit-identical output.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_months
    shocks = rng.normal(0.0, config.noise_std, size=n)
    noise = np.empty(n)
    # stationary start for the AR(1) noise
    noise[0] = shocks[0] / np.sqrt(1.0 - config.noise_ar ** 2)
    for t in range(1, n):
        noise[t] = config.noise_ar * noise[t - 1] + shocks[t]
    truth = np.maximum(expected_level(config) + noise, 0.0)
    observed = corrupt(truth, config.m0, config.n_corrupt_years, config.delay_fractions)
    start = YearMonth(config.start_year, 1)
    return MonthlySeries(start, truth), MonthlySeries(start, observed)
