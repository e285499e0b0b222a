"""Quarterly time-series container, period arithmetic, and CSV ingestion.

Everything downstream (estimators, tests, forecasts) works on
:class:`TimeSeries`: a start period plus a dense vector of values. No
missing interior values are allowed; ingestion enforces strictly
consecutive quarters.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, IngestError

_PERIOD_RE = re.compile(
    r"""^\s*(\d{4})\s*(?:
        [Qq]\s*([1-4])          # 1980Q1
      | :\s*([1-4])             # 1980:1
      | -\s*(\d{1,2})           # 1980-01 (month, mapped to quarter)
    )\s*$""",
    re.VERBOSE,
)


@dataclass(frozen=True, order=True)
class Period:
    """A calendar quarter. Ordered by (year, quarter); supports +/- int."""

    year: int
    quarter: int

    def __post_init__(self) -> None:
        if self.quarter not in (1, 2, 3, 4):
            raise DomainError(f"quarter must be 1..4, got {self.quarter}")

    @classmethod
    def parse(cls, text: str) -> "Period":
        m = _PERIOD_RE.match(str(text))
        if not m:
            raise IngestError(f"unparseable period {text!r}", row=text)
        year = int(m.group(1))
        if m.group(4) is not None:
            month = int(m.group(4))
            if not 1 <= month <= 12:
                raise IngestError(f"month out of range in {text!r}", row=text)
            return cls(year, (month - 1) // 3 + 1)
        q = m.group(2) or m.group(3)
        return cls(year, int(q))

    @property
    def ordinal(self) -> int:
        return self.year * 4 + (self.quarter - 1)

    @classmethod
    def from_ordinal(cls, n: int) -> "Period":
        return cls(n // 4, n % 4 + 1)

    def __add__(self, k: int) -> "Period":
        return Period.from_ordinal(self.ordinal + int(k))

    def __sub__(self, other):
        if isinstance(other, Period):
            return self.ordinal - other.ordinal
        return Period.from_ordinal(self.ordinal - int(other))

    def __str__(self) -> str:
        return f"{self.year}Q{self.quarter}"


@dataclass(frozen=True)
class SampleRange:
    """Closed period interval [start, end]."""

    start: Period
    end: Period

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise DomainError(f"range end {self.end} precedes start {self.start}")

    @classmethod
    def parse(cls, text: str) -> "SampleRange":
        left, _, right = text.partition(":")
        # "1980Q1:2006Q1" -- but ":" also appears inside "1980:1"; split on
        # the rightmost separator that leaves two parseable periods.
        parts = text.split(":")
        for cut in range(1, len(parts)):
            a, b = ":".join(parts[:cut]), ":".join(parts[cut:])
            try:
                return cls(Period.parse(a), Period.parse(b))
            except (IngestError, DomainError):
                continue
        raise IngestError(f"unparseable sample range {text!r}", row=text)

    def __len__(self) -> int:
        return self.end - self.start + 1

    def periods(self):
        return [self.start + i for i in range(len(self))]

    def __str__(self) -> str:
        return f"{self.start}:{self.end}"


class TimeSeries:
    """Dense quarterly series: a start period and an immutable value vector."""

    __slots__ = ("start", "values", "name")

    def __init__(self, start: Period, values, name: str = "") -> None:
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("values must be a non-empty 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"series {name!r} contains non-finite values")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "name", name)

    def __setattr__(self, key, value):
        raise AttributeError("TimeSeries is immutable")

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def end(self) -> Period:
        return self.start + (len(self) - 1)

    @property
    def range(self) -> SampleRange:
        return SampleRange(self.start, self.end)

    def period_at(self, i: int) -> Period:
        if not 0 <= i < len(self):
            raise DomainError(f"index {i} outside series of length {len(self)}")
        return self.start + i

    def index_of(self, p: Period) -> int:
        i = p - self.start
        if not 0 <= i < len(self):
            raise DomainError(f"period {p} outside series {self.start}..{self.end}")
        return i

    def value_at(self, p: Period) -> float:
        return float(self.values[self.index_of(p)])

    def periods(self):
        return [self.start + i for i in range(len(self))]

    def with_name(self, name: str) -> "TimeSeries":
        return TimeSeries(self.start, self.values, name)

    def slice(self, rng: SampleRange) -> "TimeSeries":
        i0 = rng.start - self.start
        i1 = rng.end - self.start
        if i0 < 0 or i1 >= len(self):
            raise DomainError(
                f"range {rng} outside series {self.start}..{self.end}"
            )
        return TimeSeries(rng.start, self.values[i0 : i1 + 1], self.name)

    def __repr__(self) -> str:
        return (
            f"TimeSeries({self.name or '<unnamed>'}, {self.start}..{self.end}, "
            f"n={len(self)})"
        )


def load_csv(path, date_column: str, value_column: str) -> TimeSeries:
    """Read one quarterly series from a CSV file.

    Dates must parse as 1980Q1 / 1980:1 / 1980-01 and advance by exactly
    one quarter per row. Lines starting with '#' are comments.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such file: {path}")
    periods: list[Period] = []
    vals: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = (r for r in fh if r.strip() and not r.lstrip().startswith("#"))
        reader = csv.DictReader(rows)
        if reader.fieldnames is None:
            raise IngestError(f"{path}: empty file")
        missing = {date_column, value_column} - set(reader.fieldnames)
        if missing:
            raise IngestError(f"{path}: missing column(s) {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            raw_date = row[date_column]
            p = Period.parse(raw_date)
            try:
                v = float(row[value_column])
            except (TypeError, ValueError):
                raise IngestError(
                    f"{path}: unparseable number {row[value_column]!r} at row "
                    f"{lineno} ({raw_date})",
                    row=row,
                ) from None
            if periods:
                expected = periods[-1] + 1
                if p == periods[-1]:
                    raise IngestError(
                        f"{path}: duplicate period {p} at row {lineno}", row=row
                    )
                if p != expected:
                    raise IngestError(
                        f"{path}: gap at {expected} (row {lineno} jumps to {p})",
                        row=row,
                    )
            periods.append(p)
            vals.append(v)
    if not periods:
        raise IngestError(f"{path}: no data rows")
    return TimeSeries(periods[0], vals, name=value_column)


def diff(series: TimeSeries, order: int = 1) -> TimeSeries:
    """Apply the difference operator ``order`` times."""
    if order < 1:
        raise DomainError(f"difference order must be >= 1, got {order}")
    if order >= len(series):
        raise DomainError(
            f"cannot difference length-{len(series)} series {order} times"
        )
    out = np.diff(series.values, n=order)
    name = f"d_{series.name}" if order == 1 else f"d{order}_{series.name}"
    return TimeSeries(series.start + order, out, name)


def ldiff_scaled(series: TimeSeries, scale: float = 100.0) -> TimeSeries:
    """scale * (log y_{t+1} - log y_t); the 100*ldiff transform."""
    bad = np.nonzero(series.values <= 0.0)[0]
    if bad.size:
        raise DomainError(
            f"non-positive value at {series.period_at(int(bad[0]))}; "
            "log difference undefined"
        )
    out = scale * np.diff(np.log(series.values))
    return TimeSeries(series.start + 1, out, f"ldiff_{series.name}")


def slice_series(series: TimeSeries, rng: SampleRange) -> TimeSeries:
    """Functional alias for :meth:`TimeSeries.slice`."""
    return series.slice(rng)
