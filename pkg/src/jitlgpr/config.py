"""Run configuration: one JSON document, overridable key by key.

Every key is optional; see ``RunConfig`` for defaults. Unknown keys are
rejected so that typos do not silently fall back to defaults.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from .benchmarks.runner import DEFAULT_SARIMA, MODELS, BenchmarkConfig
from .errors import ConfigError
from .pipeline import GROUPING_MODES, PipelineConfig


@dataclass(frozen=True)
class RunConfig:
    input: Optional[str] = None
    actuals: Optional[str] = None
    output_dir: str = "out"
    anchor_year: int = 2014
    seed: int = 42
    # synthetic data
    n_years: int = 9
    extra_months: int = 19
    # summer correction
    correct: bool = True
    m0: int = 7
    n_corrupt_years: int = 6
    correction_init: Any = "constant"
    # tuning
    wy_values: tuple = tuple(range(2, 9))
    wm_values: tuple = tuple(range(2, 7))
    buffer: int = 48
    grouping: str = "standard"
    group_threshold: float = 0.8
    windows: Optional[tuple] = None    # skip tuning: one [W_y, W_m] per group
    # benchmarks
    models: tuple = MODELS
    sarima_order: tuple = DEFAULT_SARIMA[0]
    sarima_seasonal_order: tuple = DEFAULT_SARIMA[1]
    sarima_drift: bool = DEFAULT_SARIMA[2]
    log_transform: bool = False
    smooth_outliers: bool = False
    after_warmup: int = 35
    horizon: int = 19

    def __post_init__(self):
        for name in ("wy_values", "wm_values", "models", "sarima_order", "sarima_seasonal_order"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.windows is not None:
            object.__setattr__(self, "windows", tuple(tuple(int(v) for v in w) for w in self.windows))
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if not self.wy_values or not self.wm_values:
            raise ConfigError("tuning grid is empty")
        if self.grouping not in GROUPING_MODES:
            raise ConfigError(f"grouping must be one of {GROUPING_MODES}")
        if unknown := set(self.models) - set(MODELS):
            raise ConfigError(f"unknown benchmark models: {sorted(unknown)}")
        if len(self.sarima_order) != 3 or len(self.sarima_seasonal_order) != 3:
            raise ConfigError("SARIMA orders need three entries each")
        if self.n_years < 1 or self.extra_months < 0:
            raise ConfigError("n_years must be >= 1 and extra_months >= 0")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: Optional[str], overrides: Mapping[str, Any] = ()) -> "RunConfig":
        data = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
            except FileNotFoundError as exc:
                raise ConfigError(f"config file not found: {path}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config file must hold a JSON object")
        data = {**data, **{k: v for k, v in dict(overrides).items() if v is not None}}
        return cls.from_mapping(data)

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def benchmark_config(self) -> BenchmarkConfig:
        return BenchmarkConfig(
            models=self.models,
            sarima_order=self.sarima_order,
            sarima_seasonal_order=self.sarima_seasonal_order,
            sarima_drift=self.sarima_drift,
            log_transform=self.log_transform,
            smooth_outliers=self.smooth_outliers,
            after_warmup=self.after_warmup,
        )

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            correct=self.correct,
            m0=self.m0,
            n_corrupt_years=self.n_corrupt_years,
            correction_init=self.correction_init,
            wy_values=self.wy_values,
            wm_values=self.wm_values,
            buffer=self.buffer,
            grouping=self.grouping,
            group_threshold=self.group_threshold,
            horizon=self.horizon,
            benchmarks=self.benchmark_config(),
        )
