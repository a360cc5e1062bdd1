"""Just-in-time local GP forecasting on the year x month grid.

For every query month a fresh GP is fitted on a small window of past
observations: the ``W_m - 1`` months immediately before the query, plus, for
each of the ``W_y - 1`` previous years, the run of ``W_m`` months ending at
the query's calendar month. Each local point is encoded by its offset from
the query in whole years and months, so the query itself sits at (0, 0) and
December/January adjacency needs no special handling.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import gpr
from .errors import ConfigError, DataError, InsufficientHistoryError
from .timegrid import MonthlySeries

log = logging.getLogger(__name__)

MIN_LOCAL_POINTS = 3
STANDARD_GROUPS = ((1, 2, 3, 4, 5), (6, 7, 8, 9), (10, 11, 12))


@dataclass(frozen=True, order=True)
class WindowPair:
    W_y: int
    W_m: int

    def __post_init__(self):
        if self.W_y < 1 or not 1 <= self.W_m <= 12:
            raise ConfigError(f"invalid window {self}: need W_y >= 1 and 1 <= W_m <= 12")
        if self.W_y * self.W_m - 1 < MIN_LOCAL_POINTS:
            raise ConfigError(f"window {self} yields fewer than {MIN_LOCAL_POINTS} local points")

    @property
    def size(self) -> int:
        return self.W_y * self.W_m - 1


@dataclass(frozen=True)
class MonthGrouping:
    """Partition of calendar months into contiguous (cyclic) runs, each
    with its own window pair once tuned."""

    groups: tuple
    windows: Optional[tuple] = None

    def __post_init__(self):
        groups = tuple(tuple(int(m) for m in g) for g in self.groups)
        flat = [m for g in groups for m in g]
        if sorted(flat) != list(range(1, 13)):
            raise ConfigError(f"groups must partition months 1..12, got {groups}")
        for g in groups:
            if any((b - a) % 12 != 1 for a, b in zip(g, g[1:])):
                raise ConfigError(f"group {g} is not a contiguous run of months")
        object.__setattr__(self, "groups", groups)
        if self.windows is not None:
            windows = tuple(w if isinstance(w, WindowPair) else WindowPair(*w) for w in self.windows)
            if len(windows) != len(groups):
                raise ConfigError("need one window pair per group")
            object.__setattr__(self, "windows", windows)

    def group_of(self, month: int) -> int:
        for i, g in enumerate(self.groups):
            if month in g:
                return i
        raise ValueError(f"month {month} not in any group")

    def window_for(self, month: int) -> WindowPair:
        if self.windows is None:
            raise ConfigError("grouping has no window pairs; tune it first")
        return self.windows[self.group_of(month)]

    def with_windows(self, windows: Sequence) -> "MonthGrouping":
        return MonthGrouping(self.groups, tuple(windows))

    @classmethod
    def single(cls, window: Optional[WindowPair] = None) -> "MonthGrouping":
        return cls((tuple(range(1, 13)),), None if window is None else (window,))

    @classmethod
    def standard(cls, windows: Optional[Sequence] = None) -> "MonthGrouping":
        """Jan-May / Jun-Sep / Oct-Dec."""
        return cls(STANDARD_GROUPS, None if windows is None else tuple(windows))


@dataclass(frozen=True)
class LocalTrainingSet:
    indices: np.ndarray      # 1-based series indices, ascending
    offsets: np.ndarray      # (N, 2) raw (year_offset, month_offset)
    demand: np.ndarray       # (N,) raw demand
    X: np.ndarray            # (N, 2) z-scored offsets
    y: np.ndarray            # (N,) z-scored demand
    x_query: np.ndarray      # z-scored (0, 0)
    feature_mean: np.ndarray
    feature_std: np.ndarray
    demand_mean: float
    demand_std: float

    def __len__(self) -> int:
        return len(self.indices)

    def unscale(self, value):
        return value * self.demand_std + self.demand_mean


def select_local(series_len_available: int, q: int, w, min_points: int = MIN_LOCAL_POINTS
                 ) -> list[int]:
    """Indices of the local training set for query index ``q``.

    Current year: ``q-1 .. q-(W_m-1)``; lagged year ``j`` (1..W_y-1):
    ``q-12j .. q-12j-(W_m-1)``. Indices outside ``1..min(q-1, available)``
    are dropped. ``w`` may be a WindowPair or a plain ``(W_y, W_m)`` tuple;
    the latter skips the minimum-size check on the pair itself, which is
    handy for inspecting tiny windows with a lower ``min_points``.
    """
    if q < 2:
        raise InsufficientHistoryError(f"query index must be >= 2, got {q}")
    wy, wm = (w.W_y, w.W_m) if isinstance(w, WindowPair) else (int(w[0]), int(w[1]))
    if wy < 1 or not 1 <= wm <= 12:
        raise ConfigError(f"invalid window ({wy}, {wm})")
    upper = min(q - 1, int(series_len_available))
    lags = [i for i in range(1, wm)]
    lags += [12 * j + i for j in range(1, wy) for i in range(wm)]
    idx = sorted(q - lag for lag in lags if 1 <= q - lag <= upper)
    if len(idx) < min_points:
        raise InsufficientHistoryError(
            f"only {len(idx)} past observations available for query {q} with window "
            f"({wy}, {wm}); need {min_points}")
    return idx


def offsets_for(indices: Iterable[int], q: int) -> np.ndarray:
    """(year_offset, month_offset) of each index relative to query ``q``."""
    lag = q - np.asarray(list(indices), dtype=int)
    return np.column_stack([-(lag // 12), -(lag % 12)]).astype(float)


def _zscore_stats(a: np.ndarray, axis=0):
    mean = a.mean(axis=axis)
    std = a.std(axis=axis, ddof=1) if a.shape[axis] > 1 else np.zeros_like(mean)
    return mean, np.where(std < 1e-12, 1.0, std)


def encode(indices: Sequence[int], demands: Sequence[float], q: int) -> LocalTrainingSet:
    """Build the z-scored local training set for query ``q``.

    ``demands`` holds the demand at each entry of ``indices``.
    """
    indices = np.asarray(indices, dtype=int)
    demand = np.asarray(demands, dtype=float)
    if len(indices) < MIN_LOCAL_POINTS or len(indices) != len(demand):
        raise InsufficientHistoryError("need >= 3 local points with matching demands")
    offsets = offsets_for(indices, q)
    f_mean, f_std = _zscore_stats(offsets)
    d_mean, d_std = _zscore_stats(demand)
    return LocalTrainingSet(
        indices=indices,
        offsets=offsets,
        demand=demand,
        X=(offsets - f_mean) / f_std,
        y=(demand - d_mean) / d_std,
        x_query=(np.zeros(2) - f_mean) / f_std,
        feature_mean=f_mean,
        feature_std=f_std,
        demand_mean=float(d_mean),
        demand_std=float(d_std),
    )


def local_model(values, q: int, w: WindowPair, init=None, fix_noise=None
                ) -> tuple[LocalTrainingSet, gpr.GprModel]:
    """Fit the local GP for query ``q`` using ``values[:q-1]`` as history."""
    values = np.asarray(values, dtype=float)
    idx = select_local(min(len(values), q - 1), q, w)
    local = encode(idx, values[np.asarray(idx) - 1], q)
    model = gpr.fit(local.X, local.y, init=init, fix_noise=fix_noise)
    return local, model


def forecast_one(values, q: int, w: WindowPair, init=None, fix_noise=None,
                 return_variance: bool = False):
    """One-step JITL-GP forecast of the observation at 1-based index ``q``.

    Only ``values[:q-1]`` is used. The forecast is clamped at zero.
    With ``return_variance`` the predictive variance (demand units squared)
    is returned as well.
    """
    local, model = local_model(values, q, w, init=init, fix_noise=fix_noise)
    mean, var = gpr.predict(model, local.x_query)
    forecast = max(float(local.unscale(mean)), 0.0)
    if return_variance:
        return forecast, float(var) * local.demand_std ** 2
    return forecast


def forecast_horizon(history: MonthlySeries, horizon: int, grouping: MonthGrouping,
                     actuals: Optional[Sequence[float]] = None, **gp_kw) -> MonthlySeries:
    """Iterated multi-step forecast for the ``horizon`` months after
    ``history``.

    Each prediction is appended to the history before the next query is
    made. Passing ``actuals`` appends those instead (rolling-origin mode).
    """
    if horizon < 1:
        raise ConfigError("horizon must be >= 1")
    if actuals is not None and len(actuals) < horizon:
        raise DataError("need one actual per horizon step")
    values = list(history.values)
    preds = []
    for h in range(horizon):
        q = len(values) + 1
        month = history.date_at(q - 1).month
        f = forecast_one(values, q, grouping.window_for(month), **gp_kw)
        preds.append(f)
        values.append(f if actuals is None else float(actuals[h]))
    return MonthlySeries(history.next_date(), np.asarray(preds))


# ---------------------------------------------------------------- tuning ---

@dataclass(frozen=True)
class TuneReport:
    wy_values: tuple
    wm_values: tuple
    buffer_len: int
    eval_indices: np.ndarray        # 1-based indices that were predicted
    eval_months: np.ndarray         # calendar month of each
    actuals: np.ndarray
    predictions: np.ndarray         # (n_wy, n_wm, n_eval)
    grouping: MonthGrouping         # with tuned windows
    rmse_surface: tuple             # one (n_wy, n_wm) array per group
    overall_surface: np.ndarray     # all evaluation points pooled
    month_surfaces: np.ndarray      # (12, n_wy, n_wm)

    @property
    def optima(self) -> tuple:
        return self.grouping.windows

    def best_single(self) -> tuple[WindowPair, float]:
        """Best ungrouped window and its RMSE."""
        i, j = _argmin_tiebreak(self.overall_surface)
        return WindowPair(self.wy_values[i], self.wm_values[j]), float(self.overall_surface[i, j])

    def grouped_rmse(self) -> float:
        """Pooled one-step RMSE when each group uses its own optimum."""
        sq = []
        for g, w in zip(self.grouping.groups, self.grouping.windows):
            i, j = self.wy_values.index(w.W_y), self.wm_values.index(w.W_m)
            mask = np.isin(self.eval_months, g)
            sq.append((self.predictions[i, j, mask] - self.actuals[mask]) ** 2)
        return float(np.sqrt(np.mean(np.concatenate(sq))))

    def chosen_predictions(self) -> np.ndarray:
        """One-step predictions under the tuned per-group windows."""
        out = np.empty(len(self.actuals))
        for g, w in zip(self.grouping.groups, self.grouping.windows):
            i, j = self.wy_values.index(w.W_y), self.wm_values.index(w.W_m)
            mask = np.isin(self.eval_months, g)
            out[mask] = self.predictions[i, j, mask]
        return out

    def to_dict(self) -> dict:
        return {
            "wy_values": list(self.wy_values),
            "wm_values": list(self.wm_values),
            "buffer_len": self.buffer_len,
            "eval_indices": self.eval_indices.tolist(),
            "groups": [list(g) for g in self.grouping.groups],
            "optima": [[w.W_y, w.W_m] for w in self.grouping.windows],
            "group_surfaces": [s.tolist() for s in self.rmse_surface],
            "overall_surface": self.overall_surface.tolist(),
            "month_surfaces": self.month_surfaces.tolist(),
            "best_single": list(self.best_single()[0].__dict__.values()),
            "best_single_rmse": self.best_single()[1],
            "grouped_rmse": self.grouped_rmse(),
        }


def _argmin_tiebreak(surface: np.ndarray) -> tuple[int, int]:
    # row-major scan over ascending W_y then W_m: first minimum wins
    flat = np.where(np.isfinite(surface), surface, np.inf).ravel()
    k = int(np.argmin(flat))
    return np.unravel_index(k, surface.shape)


def _rmse_surface(err2: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if not mask.any():
        return np.full(err2.shape[:2], np.nan)
    return np.sqrt(err2[:, :, mask].mean(axis=2))


def rolling_predictions(values, wy_values, wm_values, eval_indices, **gp_kw) -> np.ndarray:
    """One-step predictions at ``eval_indices`` for every window on the
    grid, each using the actual history before the query."""
    preds = np.full((len(wy_values), len(wm_values), len(eval_indices)), np.nan)
    for a, wy in enumerate(wy_values):
        for b, wm in enumerate(wm_values):
            w = WindowPair(wy, wm)
            for k, q in enumerate(eval_indices):
                preds[a, b, k] = forecast_one(values, int(q), w, **gp_kw)
    return preds


def tune(history: MonthlySeries, wy_values: Sequence[int] = range(2, 9),
         wm_values: Sequence[int] = range(2, 7), buffer: int = 48,
         grouping: MonthGrouping | str | None = None, group_threshold: float = 0.8,
         **gp_kw) -> TuneReport:
    """Grid-search the window pair per month group by rolling-origin
    one-step RMSE over indices ``buffer+1 .. len(history)``.

    ``grouping`` is a MonthGrouping, ``"auto"`` (merge adjacent months with
    similar RMSE surfaces) or None for the fixed Jan-May/Jun-Sep/Oct-Dec
    split.
    """
    values = np.asarray(history.values, dtype=float)
    n = len(values)
    if n <= buffer + 12:
        raise InsufficientHistoryError(
            f"tuning needs more than buffer + 12 = {buffer + 12} observations, got {n}")
    wy_values, wm_values = tuple(int(v) for v in wy_values), tuple(int(v) for v in wm_values)
    if not wy_values or not wm_values:
        raise ConfigError("tuning grid is empty")
    eval_idx = np.arange(buffer + 1, n + 1)
    months = np.array([history.date_at(q - 1).month for q in eval_idx])
    actuals = values[eval_idx - 1]
    preds = rolling_predictions(values, wy_values, wm_values, eval_idx, **gp_kw)
    err2 = (preds - actuals) ** 2

    month_surfaces = np.stack([_rmse_surface(err2, months == m) for m in range(1, 13)])
    if grouping is None:
        grouping = MonthGrouping.standard()
    elif isinstance(grouping, str):
        if grouping != "auto":
            raise ConfigError(f"unknown grouping mode {grouping!r}")
        grouping = group_months(month_surfaces, threshold=group_threshold)

    surfaces, windows = [], []
    for g in grouping.groups:
        s = _rmse_surface(err2, np.isin(months, g))
        i, j = _argmin_tiebreak(s)
        surfaces.append(s)
        windows.append(WindowPair(wy_values[i], wm_values[j]))
    return TuneReport(
        wy_values=wy_values,
        wm_values=wm_values,
        buffer_len=buffer,
        eval_indices=eval_idx,
        eval_months=months,
        actuals=actuals,
        predictions=preds,
        grouping=grouping.with_windows(windows),
        rmse_surface=tuple(surfaces),
        overall_surface=_rmse_surface(err2, np.ones(len(eval_idx), dtype=bool)),
        month_surfaces=month_surfaces,
    )


def _similarity(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.ravel(a), np.ravel(b)
    ok = np.isfinite(a) & np.isfinite(b)
    a, b = a[ok], b[ok]
    if a.size < 2:
        return 0.0
    sa, sb = a.std(), b.std()
    if sa < 1e-12 or sb < 1e-12:
        return 1.0 if np.allclose(a, b) else 0.0
    return float(np.corrcoef(a, b)[0, 1])


def group_months(surfaces, threshold: float = 0.8) -> MonthGrouping:
    """Greedy grouping of calendar months with similar RMSE surfaces.

    Months are scanned January to December; a month joins the current run
    when the Pearson correlation between its flattened surface and the
    previous month's reaches ``threshold``. Finally the December run is
    merged into the January run when December and January are similar.
    """
    surfaces = np.asarray(surfaces, dtype=float)
    if surfaces.shape[0] != 12:
        raise ConfigError("need one RMSE surface per calendar month")
    tol = 1e-12
    groups = [[1]]
    for m in range(2, 13):
        if _similarity(surfaces[m - 2], surfaces[m - 1]) >= threshold - tol:
            groups[-1].append(m)
        else:
            groups.append([m])
    if len(groups) > 1 and _similarity(surfaces[11], surfaces[0]) >= threshold - tol:
        groups[0] = groups.pop() + groups[0]
    return MonthGrouping(tuple(tuple(g) for g in groups))
