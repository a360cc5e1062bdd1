"""CSV and JSON reading/writing with atomic replacement."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .timegrid import MonthlySeries, YearMonth

_DATE = re.compile(r"^(\d{4})-(\d{2})$")


def format_date(ym: YearMonth) -> str:
    return f"{ym.year:04d}-{ym.month:02d}"


def parse_date(text: str, row: int) -> YearMonth:
    m = _DATE.match(text.strip())
    if not m or not 1 <= int(m.group(2)) <= 12:
        raise DataError(f"row {row}: bad date {text!r}, expected YYYY-MM")
    return YearMonth(int(m.group(1)), int(m.group(2)))


def format_value(v: float) -> str:
    # shortest repr that round-trips exactly
    return repr(float(v))


def ingest_csv(path, value_column: str = "demand") -> MonthlySeries:
    """Read a ``date,<value_column>`` CSV of consecutive months.

    Rows are numbered as file lines (the header is row 1).
    """
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except FileNotFoundError as exc:
        raise ConfigError(f"input file not found: {path}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not UTF-8 text") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["date", value_column]:
        raise DataError(f"{path}: header must be 'date,{value_column}'")
    start, values, prev = None, [], None
    for row_no, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise DataError(f"row {row_no}: expected 2 fields, got {len(row)}")
        ym = parse_date(row[0], row_no)
        try:
            v = float(row[1])
        except ValueError:
            raise DataError(f"row {row_no}: {value_column} {row[1]!r} is not a number") from None
        if not math.isfinite(v):
            raise DataError(f"row {row_no}: {value_column} must be finite, got {row[1]!r}")
        if v < 0:
            raise DataError(f"row {row_no}: {value_column} must be >= 0, got {row[1]!r}")
        if prev is not None:
            expected = MonthlySeries(prev, [0.0]).next_date()
            if ym == prev or (ym.year, ym.month) < (prev.year, prev.month):
                raise DataError(f"row {row_no}: month {format_date(ym)} is duplicated or out of order")
            if ym != expected:
                raise DataError(f"row {row_no}: gap in months, {format_date(expected)} "
                                f"missing before {format_date(ym)}")
        else:
            start = ym
        values.append(v)
        prev = ym
    if start is None:
        raise DataError(f"{path}: no data rows")
    return MonthlySeries(start, np.asarray(values))


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_series_csv(path, series: MonthlySeries, value_column: str = "demand") -> None:
    rows = [(format_date(d), format_value(v)) for d, v in zip(series.dates(), series.values)]
    atomic_write_text(path, _csv_text(["date", value_column], rows))


def write_table_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write_text(path, _csv_text(header, [[format_value(c) if isinstance(c, float) else c
                                               for c in r] for r in rows]))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n")
