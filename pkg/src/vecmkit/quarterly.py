"""Quarterly panel data model: quarter arithmetic, CSV ingestion,
differencing and lagging, summary statistics, the quarterly output proxy,
and location quotients.

Frames are immutable after construction and every operation here is a pure
function, so values can be shared freely between concurrent readers.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainError,
    EmptyInputError,
    InsufficientDataError,
    MissingColumnError,
    NonNumericCellError,
    QuarterGapError,
    QuarterParseError,
)

# Column order fixed at ingestion; it also fixes the Cholesky ordering used
# by orthogonalized impulse responses downstream.
DEFAULT_SCHEMA: tuple[str, ...] = (
    "output",
    "price",
    "employment",
    "wages",
    "exchange_rate",
    "num_firms",
)

QUARTER_COLUMN = "quarter"

_QUARTER_RE = re.compile(r"^(\d{1,4})Q([1-4])$")


@dataclass(frozen=True, order=True)
class QuarterIndex:
    """A calendar quarter, ordered lexicographically on (year, quarter)."""

    year: int
    quarter: int

    def __post_init__(self) -> None:
        if self.quarter not in (1, 2, 3, 4):
            raise QuarterParseError(f"quarter must be in 1..4, got {self.quarter}")

    @property
    def ordinal(self) -> int:
        return self.year * 4 + (self.quarter - 1)

    def shift(self, n: int) -> "QuarterIndex":
        """Quarter n steps ahead (or behind for negative n)."""
        o = self.ordinal + n
        return QuarterIndex(o // 4, o % 4 + 1)

    def next(self) -> "QuarterIndex":
        return self.shift(1)

    def distance(self, other: "QuarterIndex") -> int:
        """Signed number of quarters from self to other."""
        return other.ordinal - self.ordinal

    def __str__(self) -> str:
        return f"{self.year}Q{self.quarter}"


def parse_quarter(text: str) -> QuarterIndex:
    """Decode a "YYYYQn" label; round-trips through str()."""
    m = _QUARTER_RE.match(text.strip())
    if m is None:
        raise QuarterParseError(f"not a quarter label (expected YYYYQn): {text!r}")
    return QuarterIndex(int(m.group(1)), int(m.group(2)))


def _as_readonly(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float)
    if not np.all(np.isfinite(out)):
        raise NonNumericCellError("values must be finite (no NaN/inf)")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Series:
    """A named quarterly series with no missing values."""

    name: str
    start: QuarterIndex
    values: np.ndarray
    units: str = ""

    def __post_init__(self) -> None:
        vals = _as_readonly(np.atleast_1d(np.asarray(self.values, dtype=float)))
        if vals.ndim != 1 or vals.size < 1:
            raise EmptyInputError(f"series {self.name!r} must hold at least one value")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def end(self) -> QuarterIndex:
        return self.start.shift(len(self) - 1)

    def quarters(self) -> list[QuarterIndex]:
        return [self.start.shift(i) for i in range(len(self))]


@dataclass(frozen=True)
class Frame:
    """An aligned panel of quarterly series; column order is significant."""

    start: QuarterIndex
    names: tuple[str, ...]
    values: np.ndarray  # T x K, read-only

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise EmptyInputError("frame must be a nonempty T x K panel")
        if len(self.names) != vals.shape[1]:
            raise MissingColumnError(
                f"{len(self.names)} names for {vals.shape[1]} columns"
            )
        if len(set(self.names)) != len(self.names):
            raise MissingColumnError("column names must be unique")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", _as_readonly(vals))

    @classmethod
    def from_series(cls, columns: Sequence[Series]) -> "Frame":
        if not columns:
            raise EmptyInputError("frame needs at least one column")
        start = columns[0].start
        n = len(columns[0])
        for s in columns[1:]:
            if s.start != start or len(s) != n:
                raise QuarterGapError(
                    f"column {s.name!r} is not aligned with {columns[0].name!r}"
                )
        return cls(start, tuple(s.name for s in columns), np.column_stack([s.values for s in columns]))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_columns(self) -> int:
        return int(self.values.shape[1])

    @property
    def end(self) -> QuarterIndex:
        return self.start.shift(len(self) - 1)

    def quarters(self) -> list[QuarterIndex]:
        return [self.start.shift(i) for i in range(len(self))]

    def column(self, name: str) -> np.ndarray:
        if name not in self.names:
            raise MissingColumnError(f"no column named {name!r}")
        return self.values[:, self.names.index(name)]

    def series(self, name: str) -> Series:
        return Series(name, self.start, self.column(name))

    def select(self, names: Sequence[str]) -> "Frame":
        """New frame with the given columns in the given order."""
        idx = []
        for n in names:
            if n not in self.names:
                raise MissingColumnError(f"no column named {n!r}")
            idx.append(self.names.index(n))
        return Frame(self.start, tuple(names), self.values[:, idx])

    def drop(self, name: str) -> "Frame":
        return self.select([n for n in self.names if n != name])

    def head(self, n: int) -> "Frame":
        return Frame(self.start, self.names, self.values[:n])

    def tail_rows(self, n: int) -> np.ndarray:
        return np.array(self.values[-n:])


def load_frame(path: str | Path, schema: Sequence[str] = DEFAULT_SCHEMA) -> Frame:
    """Read a quarterly CSV panel, reordering data columns to schema order.

    The first column must be the quarter label; quarters must be contiguous
    ascending. Each malformed input is rejected with an error naming the
    offending row or column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        return _parse_frame_csv(fh, schema, source=str(path))


def loads_frame(text: str, schema: Sequence[str] = DEFAULT_SCHEMA) -> Frame:
    """load_frame for in-memory CSV text."""
    return _parse_frame_csv(io.StringIO(text), schema, source="<string>")


def _parse_frame_csv(fh, schema: Sequence[str], source: str) -> Frame:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInputError(f"{source}: empty file") from None
    header = [h.strip() for h in header]
    if not header or header[0] != QUARTER_COLUMN:
        raise MissingColumnError(
            f"{source}: first header column must be {QUARTER_COLUMN!r}, got {header[:1]!r}"
        )
    positions = {}
    for name in schema:
        if name not in header[1:]:
            raise MissingColumnError(f"{source}: missing column {name!r}")
        positions[name] = header.index(name)

    quarters: list[QuarterIndex] = []
    rows: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        q = parse_quarter(row[0])
        if quarters and quarters[-1].next() != q:
            raise QuarterGapError(
                f"{source}: row {lineno}: expected {quarters[-1].next()}, got {q}"
            )
        quarters.append(q)
        parsed = []
        for name in schema:
            cell = row[positions[name]].strip()
            try:
                value = float(cell)
            except ValueError:
                raise NonNumericCellError(
                    f"{source}: row {lineno}, column {name!r}: non-numeric cell {cell!r}"
                ) from None
            if not math.isfinite(value):
                raise NonNumericCellError(
                    f"{source}: row {lineno}, column {name!r}: non-finite cell {cell!r}"
                )
            parsed.append(value)
        rows.append(parsed)

    if not rows:
        raise EmptyInputError(f"{source}: no data rows")
    return Frame(quarters[0], tuple(schema), np.array(rows, dtype=float))


def write_frame(frame: Frame, path: str | Path) -> None:
    """Write a frame back to CSV; load_frame(write_frame(f)) == f."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([QUARTER_COLUMN, *frame.names])
        for q, row in zip(frame.quarters(), frame.values):
            writer.writerow([str(q), *(repr(float(v)) for v in row)])


def first_difference(frame: Frame) -> Frame:
    """x_t - x_{t-1} for every column; length shrinks by one quarter."""
    if len(frame) < 2:
        raise InsufficientDataError("first difference needs at least 2 rows")
    return Frame(frame.start.next(), frame.names, np.diff(frame.values, axis=0))


def difference_series(series: Series) -> Series:
    if len(series) < 2:
        raise InsufficientDataError("first difference needs at least 2 values")
    return Series(series.name, series.start.next(), np.diff(series.values), series.units)


def lag_matrix(frame: Frame, p: int) -> np.ndarray:
    """Stacked lag block [X_{t-1} ... X_{t-p}] with T-p usable rows.

    Row i of the output is aligned with frame.values[p + i]; the columns for
    lag j sit in block j-1 (so entry (i, (j-1)*K + v) equals column v at
    time p + i - j).
    """
    if p < 1:
        raise DomainError(f"lag count must be >= 1, got {p}")
    t = len(frame)
    if p >= t:
        raise InsufficientDataError(f"lag count {p} needs more than {t} rows")
    blocks = [frame.values[p - j : t - j] for j in range(1, p + 1)]
    return np.hstack(blocks)


@dataclass(frozen=True)
class ColumnStats:
    name: str
    mean: float
    sd: float
    minimum: float
    maximum: float
    count: int


@dataclass(frozen=True)
class StatsReport:
    """Per-column summary statistics (sample sd, divisor n-1)."""

    start: QuarterIndex
    end: QuarterIndex
    columns: tuple[ColumnStats, ...]

    def to_dict(self) -> dict:
        return {
            "start": str(self.start),
            "end": str(self.end),
            "columns": [vars(c) for c in self.columns],
        }

    def format_table(self) -> str:
        from .formatting import format_table, sig6

        rows = [
            [c.name, sig6(c.mean), sig6(c.sd), sig6(c.minimum), sig6(c.maximum), str(c.count)]
            for c in self.columns
        ]
        return format_table(
            ["variable", "mean", "sd", "min", "max", "n"],
            rows,
            title=f"Summary statistics ({self.start}..{self.end})",
        )


def summary_stats(frame: Frame) -> StatsReport:
    """Mean, sample sd, min, max, and count for every column."""
    cols = []
    for j, name in enumerate(frame.names):
        v = frame.values[:, j]
        n = v.size
        sd = float(np.std(v, ddof=1)) if n > 1 else 0.0
        cols.append(
            ColumnStats(
                name=name,
                mean=float(np.mean(v)),
                sd=sd,
                minimum=float(np.min(v)),
                maximum=float(np.max(v)),
                count=int(n),
            )
        )
    return StatsReport(frame.start, frame.end, tuple(cols))


def proxy_quarterly_output(
    us_quarterly: Series,
    region_annual: Mapping[int, float],
    nation_annual: Mapping[int, float],
    name: str = "output",
) -> Series:
    """Scale a national quarterly series by the region's annual share.

    Each quarter is multiplied by region_annual[year] / nation_annual[year];
    the share is constant across the four quarters of a year.
    """
    out = np.empty(len(us_quarterly))
    for i, q in enumerate(us_quarterly.quarters()):
        year = q.year
        if year not in region_annual or year not in nation_annual:
            raise DomainError(f"no annual value for year {year}")
        region = float(region_annual[year])
        nation = float(nation_annual[year])
        if region <= 0 or nation <= 0:
            raise DomainError(f"annual values must be positive (year {year})")
        out[i] = us_quarterly.values[i] * (region / nation)
    return Series(name, us_quarterly.start, out, us_quarterly.units)


def location_quotient(
    industry_region: float,
    employment_region: float,
    industry_nation: float,
    employment_nation: float,
) -> float:
    """Regional industry employment share over the national share.

    Values above 1 mark regional specialization in the industry.
    """
    inputs = (industry_region, employment_region, industry_nation, employment_nation)
    if any(x <= 0 for x in inputs):
        raise DomainError(f"location quotient needs positive inputs, got {inputs}")
    return (industry_region / employment_region) / (industry_nation / employment_nation)
