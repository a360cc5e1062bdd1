"""End-to-end run: correct summer readings, tune JITL windows, forecast,
run the benchmarks and score everything against a test window."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jitl, metrics
from .benchmarks import BenchmarkConfig, run_benchmarks
from .correction import CorrectionProblem, CorrectionResult, correct_summer
from .errors import ConfigError, DataError
from .jitl import MonthGrouping, TuneReport
from .timegrid import MonthlySeries

log = logging.getLogger(__name__)

GROUPING_MODES = ("standard", "auto", "single")


@dataclass(frozen=True)
class PipelineConfig:
    correct: bool = True
    m0: int = 7
    n_corrupt_years: int = 6
    correction_init: object = "constant"
    wy_values: tuple = tuple(range(2, 9))
    wm_values: tuple = tuple(range(2, 7))
    buffer: int = 48
    grouping: str = "standard"
    group_threshold: float = 0.8
    horizon: int = 19
    benchmarks: BenchmarkConfig = field(default_factory=BenchmarkConfig)

    def __post_init__(self):
        if self.grouping not in GROUPING_MODES:
            raise ConfigError(f"grouping must be one of {GROUPING_MODES}, got {self.grouping!r}")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if not self.wy_values or not self.wm_values:
            raise ConfigError("tuning grid is empty")
        object.__setattr__(self, "wy_values", tuple(int(v) for v in self.wy_values))
        object.__setattr__(self, "wm_values", tuple(int(v) for v in self.wm_values))


@dataclass(frozen=True)
class PipelineResult:
    observed: MonthlySeries
    corrected: MonthlySeries
    correction: Optional[CorrectionResult]
    tune: TuneReport
    forecasts: dict            # model name -> MonthlySeries; "jitl" first
    evaluation: Optional[dict]  # model name -> EvalReport


def correct_series(series: MonthlySeries, m0: int = 7, n_corrupt_years: int = 6,
                   init="constant") -> tuple[MonthlySeries, CorrectionResult]:
    """Correct the summer block of the whole years at the start of
    ``series``; a trailing partial year is passed through unchanged."""
    if series.start.month != 1:
        raise DataError("summer correction needs a series starting in January")
    n_whole = 12 * (len(series) // 12)
    problem = CorrectionProblem(series.head(n_whole).as_matrix(), m0=m0,
                                n_corrupt_years=n_corrupt_years, first_year=series.start.year)
    result = correct_summer(problem, init=init)
    if not result.converged:
        log.warning("summer correction stopped after %d iterations without converging",
                    result.iterations)
    values = np.concatenate([result.D_c.ravel(), series.values[n_whole:]])
    return MonthlySeries(series.start, values), result


def first_full_year(series: MonthlySeries) -> Optional[slice]:
    """Positions of the first complete January-December run, if any."""
    k = (13 - series.start.month) % 12
    return slice(k, k + 12) if k + 12 <= len(series) else None


def evaluate_forecasts(actual: MonthlySeries, forecasts: dict) -> dict:
    """EvalReport per model over the overlap with ``actual``; the yearly PE
    covers the first whole calendar year in the window."""
    out = {}
    year = first_full_year(actual)
    for name, fc in forecasts.items():
        if fc.start != actual.start:
            raise DataError(f"forecast {name!r} starts at {fc.start}, actuals at {actual.start}")
        n = min(len(fc), len(actual))
        annual = None
        if year is not None and year.stop <= n:
            annual = (float(actual.values[year].sum()), float(fc.values[year].sum()))
        out[name] = metrics.evaluate(actual.values[:n], fc.values[:n], annual=annual)
    return out


def tune_windows(series: MonthlySeries, config: PipelineConfig) -> TuneReport:
    grouping = {"standard": None, "auto": "auto", "single": MonthGrouping.single()}[config.grouping]
    return jitl.tune(series, config.wy_values, config.wm_values, buffer=config.buffer,
                     grouping=grouping, group_threshold=config.group_threshold)


def run_pipeline(train: MonthlySeries, test: Optional[MonthlySeries] = None,
                 config: PipelineConfig = PipelineConfig()) -> PipelineResult:
    if test is not None and test.start != train.next_date():
        raise DataError(f"test window must start at {train.next_date()}, got {test.start}")
    correction = None
    corrected = train
    if config.correct:
        corrected, correction = correct_series(train, config.m0, config.n_corrupt_years,
                                               config.correction_init)
    report = tune_windows(corrected, config)
    start = corrected.next_date()
    forecasts = {"jitl": jitl.forecast_horizon(corrected, config.horizon, report.grouping)}
    for name, res in run_benchmarks(corrected.values, config.horizon, config.benchmarks).items():
        forecasts[name] = MonthlySeries(start, np.maximum(res.forecast, 0.0))
    evaluation = evaluate_forecasts(test, forecasts) if test is not None else None
    return PipelineResult(train, corrected, correction, report, forecasts, evaluation)
