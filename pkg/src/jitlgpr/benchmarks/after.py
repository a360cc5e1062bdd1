"""Online forecast combination by exponential reweighting (AFTER-style).

After each revealed actual every member's weight is multiplied by
``exp(-e^2 / (2 nu))``, where ``nu`` is the running mean squared error over
all members and all steps so far, and the weights are renormalised.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError

NU_FLOOR = 1e-12


@dataclass(frozen=True)
class CombinerState:
    weights: np.ndarray      # (M,) simplex
    sq_error_sum: np.ndarray  # (M,) cumulative squared error per member
    n_steps: int

    @property
    def nu(self) -> float:
        if self.n_steps == 0:
            return NU_FLOOR
        return max(float(self.sq_error_sum.sum()) / (self.n_steps * len(self.weights)), NU_FLOOR)


def initial_state(n_members: int) -> CombinerState:
    return CombinerState(np.full(n_members, 1.0 / n_members), np.zeros(n_members), 0)


def update(state: CombinerState, forecasts, actual: float) -> CombinerState:
    f = np.asarray(forecasts, dtype=float)
    e2 = (actual - f) ** 2
    sq = state.sq_error_sum + e2
    n = state.n_steps + 1
    nu = max(float(sq.sum()) / (n * len(f)), NU_FLOOR)
    # shift the exponent so the best member has factor 1: avoids underflow
    logw = np.log(np.maximum(state.weights, 1e-300)) - e2 / (2.0 * nu)
    w = np.exp(logw - logw.max())
    return CombinerState(w / w.sum(), sq, n)


def after_combine(member_forecasts, actuals, state: CombinerState | None = None
                  ) -> tuple[np.ndarray, list[CombinerState]]:
    """Combine aligned member forecast streams.

    ``member_forecasts`` is (M, T); ``actuals`` has length T. The forecast
    at step t uses the weights learned from steps before t. Returns the
    combined stream and the state trace (T + 1 entries, initial included).
    """
    F = np.atleast_2d(np.asarray(member_forecasts, dtype=float))
    y = np.asarray(actuals, dtype=float).ravel()
    if F.shape[0] < 2:
        raise DataError("AFTER needs at least two members")
    if F.shape[1] != len(y):
        raise DataError(f"member streams have length {F.shape[1]} but {len(y)} actuals were given")
    if not np.all(np.isfinite(F)) or not np.all(np.isfinite(y)):
        raise DataError("forecast streams and actuals must be finite")
    state = initial_state(F.shape[0]) if state is None else state
    trace = [state]
    combined = np.empty(len(y))
    for t in range(len(y)):
        combined[t] = float(state.weights @ F[:, t])
        state = update(state, F[:, t], y[t])
        trace.append(state)
    return combined, trace


def combine_forecasts(state: CombinerState, member_forecasts) -> np.ndarray:
    """Apply frozen weights to (M, H) member forecasts."""
    return state.weights @ np.atleast_2d(np.asarray(member_forecasts, dtype=float))
