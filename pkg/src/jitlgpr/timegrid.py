"""Mapping between linear observation indices and (year, month) grid cells.

Indices are 1-based: index 1 is month 1 of year 1, index 13 is month 1 of
year 2, and so on. Calendar anchoring (which real year is year 1) is left to
the caller.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataError, InvalidIndexError, OutOfHistoryError


class YearMonth(NamedTuple):
    year: int
    month: int

    def validate(self) -> "YearMonth":
        if self.year < 1:
            raise InvalidIndexError(f"year must be >= 1, got {self.year}")
        if not 1 <= self.month <= 12:
            raise InvalidIndexError(f"month must be in 1..12, got {self.month}")
        return self


def index_to_ym(n: int) -> YearMonth:
    """Return the (year, month) cell of the n-th observation."""
    n = int(n)
    if n < 1:
        raise InvalidIndexError(f"index must be >= 1, got {n}")
    return YearMonth((n - 1) // 12 + 1, (n - 1) % 12 + 1)


def ym_to_index(ym: YearMonth | tuple[int, int]) -> int:
    year, month = YearMonth(*ym).validate()
    return (year - 1) * 12 + month


def lag_index(q: int, years_back: int = 0, months_back: int = 0) -> int:
    """Index of the observation ``years_back`` years and ``months_back``
    months before index ``q``. Month arithmetic wraps across years."""
    n = int(q) - 12 * int(years_back) - int(months_back)
    if n < 1:
        raise OutOfHistoryError(
            f"lag ({years_back}y, {months_back}m) from index {q} falls before "
            "the first observation")
    return n


@dataclass(frozen=True)
class MonthlySeries:
    """Contiguous monthly observations starting at ``start``.

    ``start`` is a calendar (year, month); ``values[k]`` is the observation
    ``k`` months after it.
    """

    start: YearMonth
    values: np.ndarray

    def __post_init__(self):
        start = YearMonth(*self.start).validate()
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise DataError("values must be one-dimensional")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise DataError(f"non-finite demand at position {bad}")
        if np.any(values < 0):
            bad = int(np.flatnonzero(values < 0)[0])
            raise DataError(f"negative demand at position {bad}")
        values.setflags(write=False)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def date_at(self, k: int) -> YearMonth:
        """Calendar (year, month) of zero-based position ``k``."""
        total = self.start.year * 12 + self.start.month - 1 + k
        return YearMonth(total // 12, total % 12 + 1)

    def dates(self) -> list[YearMonth]:
        return [self.date_at(k) for k in range(len(self))]

    @property
    def end(self) -> YearMonth:
        return self.date_at(len(self) - 1)

    def next_date(self) -> YearMonth:
        return self.date_at(len(self))

    def append(self, values: Sequence[float] | np.ndarray) -> "MonthlySeries":
        return MonthlySeries(self.start, np.concatenate([self.values, np.atleast_1d(values)]))

    def head(self, n: int) -> "MonthlySeries":
        return MonthlySeries(self.start, self.values[:n])

    def tail_from(self, k: int) -> "MonthlySeries":
        return MonthlySeries(self.date_at(k), self.values[k:])

    def as_matrix(self) -> np.ndarray:
        """Reshape into a (years, 12) matrix. Requires a January start and
        whole years."""
        if self.start.month != 1 or len(self) % 12:
            raise DataError("matrix view needs whole years starting in January")
        return self.values.reshape(-1, 12).copy()

    @classmethod
    def from_matrix(cls, start_year: int, matrix: np.ndarray) -> "MonthlySeries":
        return cls(YearMonth(start_year, 1), np.asarray(matrix, dtype=float).ravel())
