"""Benchmark forecasters: STL + Holt, ETS(A,A,A), SARIMA, seasonal naive
and an AFTER-style combination of them."""
from .after import CombinerState, after_combine, combine_forecasts
from .ets import EtsParams, ets_filter, ets_fit, ets_forecast, holt_fit, holt_forecast
from .naive import seasonal_naive, seasonal_naive_fitted
from .runner import BenchmarkConfig, BenchmarkResult, run_benchmarks, smooth_outliers
from .sarima import SarimaSpec, sarima_fit, sarima_fitted, sarima_forecast
from .stl import StlResult, stl_decompose, stl_fit, stl_forecast

__all__ = [
    "BenchmarkConfig", "BenchmarkResult", "CombinerState", "EtsParams", "SarimaSpec",
    "StlResult", "after_combine", "combine_forecasts", "ets_filter", "ets_fit",
    "ets_forecast", "holt_fit", "holt_forecast", "run_benchmarks", "sarima_fit",
    "sarima_fitted", "sarima_forecast", "seasonal_naive", "seasonal_naive_fitted",
    "smooth_outliers", "stl_decompose", "stl_fit", "stl_forecast",
]
