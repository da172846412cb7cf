"""Return-series ingestion: CSV loading, price-to-return conversion, windows.

All downstream analytics consume :class:`ReturnSeries` (univariate) or
:class:`MultiSeries` (one date index, several named columns). Both are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .errors import DataError, SchemaError

KIND_RETURN = "return"
KIND_PRICE = "price"


def _frozen_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ReturnSeries:
    """Dated univariate observations, either returns or raw prices.

    Dates must be strictly increasing and values finite; violations raise
    :class:`DataError` at construction time.
    """

    dates: tuple[date, ...]
    returns: np.ndarray
    label: str = ""
    kind: str = KIND_RETURN

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "returns", _frozen_array(self.returns))
        if len(self.dates) != len(self.returns):
            raise DataError(
                f"{len(self.dates)} dates vs {len(self.returns)} values"
            )
        if not np.all(np.isfinite(self.returns)):
            raise DataError("non-finite value in series")
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise DataError(f"dates not strictly increasing at {b}")
        if self.kind not in (KIND_RETURN, KIND_PRICE):
            raise DataError(f"unknown series kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.returns)


@dataclass(frozen=True)
class MultiSeries:
    """Several named series sharing one date index (columns of a [T, N] array)."""

    dates: tuple[date, ...]
    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.values.ndim != 2:
            raise DataError("values must be a 2-D array [T, N]")
        if self.values.shape != (len(self.dates), len(self.names)):
            raise DataError(
                f"shape {self.values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.names)} names"
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("non-finite value in series")
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise DataError(f"dates not strictly increasing at {b}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for :func:`load_csv`."""

    date_column: str = "date"
    value_column: str = "return"
    value_kind: str = KIND_RETURN


def _parse_date(text: str, row_no: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise DataError(f"row {row_no}: unparseable date {text!r}") from None


def _parse_value(text: str, row_no: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {row_no}: unparseable number {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"row {row_no}: non-finite value {text!r}")
    return value


def load_csv(path, schema: CsvSchema = CsvSchema()) -> ReturnSeries:
    """Load one dated value column from a CSV file.

    Rows are sorted by date on load; duplicate dates are rejected. When
    ``schema.value_kind`` is ``"price"`` the values are kept as-is and the
    kind is recorded for a later :func:`to_log_returns` conversion.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        for col in (schema.date_column, schema.value_column):
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        d_idx = header.index(schema.date_column)
        v_idx = header.index(schema.value_column)
        rows = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(d_idx, v_idx):
                raise DataError(f"row {row_no}: expected {len(header)} fields")
            rows.append(
                (_parse_date(row[d_idx], row_no), _parse_value(row[v_idx], row_no))
            )
    if not rows:
        raise DataError(f"{path}: no observations")
    rows.sort(key=lambda item: item[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise DataError(f"duplicate date {a.isoformat()}")
    dates, values = zip(*rows)
    return ReturnSeries(
        dates=dates,
        returns=np.array(values),
        label=schema.value_column,
        kind=schema.value_kind,
    )


def load_multi_csv(path, date_column: str = "date") -> MultiSeries:
    """Load every non-date column of a CSV file as one named series."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        if date_column not in header:
            raise SchemaError(f"{path}: missing column {date_column!r}")
        d_idx = header.index(date_column)
        names = [h for i, h in enumerate(header) if i != d_idx]
        if not names:
            raise SchemaError(f"{path}: no value columns")
        rows = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"row {row_no}: expected {len(header)} fields")
            when = _parse_date(row[d_idx], row_no)
            vals = [
                _parse_value(cell, row_no)
                for i, cell in enumerate(row)
                if i != d_idx
            ]
            rows.append((when, vals))
    if not rows:
        raise DataError(f"{path}: no observations")
    rows.sort(key=lambda item: item[0])
    for (a, _), (b, _) in zip(rows, rows[1:]):
        if a == b:
            raise DataError(f"duplicate date {a.isoformat()}")
    dates = tuple(r[0] for r in rows)
    values = np.array([r[1] for r in rows], dtype=float)
    return MultiSeries(dates=dates, names=tuple(names), values=values)


def write_csv(series: ReturnSeries, path, date_column: str = "date",
              value_column: str | None = None) -> None:
    """Write a series back out in the same two-column layout `load_csv` reads.

    Floats are rendered with `repr`, so a load of the written file recovers
    the values exactly.
    """
    if value_column is None:
        value_column = series.label or "return"
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([date_column, value_column])
        for when, value in zip(series.dates, series.returns):
            writer.writerow([when.isoformat(), repr(float(value))])


def to_log_returns(prices: ReturnSeries) -> ReturnSeries:
    """Convert a price series to log returns ln(P[t]/P[t-1]).

    The output is one observation shorter and stamped with the later date of
    each pair. Multi-day aggregation elsewhere assumes this log convention
    (sums of log returns are exact cumulative returns).
    """
    if prices.kind != KIND_PRICE:
        raise DataError(f"expected a price series, got kind={prices.kind!r}")
    if len(prices) < 2:
        raise DataError("need at least two prices to form a return")
    values = prices.returns
    if np.any(values <= 0.0):
        bad = prices.dates[int(np.argmax(values <= 0.0))]
        raise DataError(f"nonpositive price at {bad.isoformat()}")
    rets = np.diff(np.log(values))
    return ReturnSeries(
        dates=prices.dates[1:],
        returns=rets,
        label=prices.label,
        kind=KIND_RETURN,
    )


def window(series: ReturnSeries, t: int, m: int) -> np.ndarray:
    """The m observations strictly before index t (indices t-m .. t-1)."""
    if m < 1:
        raise DataError(f"window length must be positive, got {m}")
    if t < m:
        raise DataError(f"index {t} has no length-{m} history")
    if t > len(series):
        raise DataError(f"index {t} beyond series of length {len(series)}")
    return series.returns[t - m:t].copy()
