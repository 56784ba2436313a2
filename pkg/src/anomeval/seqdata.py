"""Ingestion of time series and event lists onto a common integer time grid.

Input files are plain text, whitespace- or comma-delimited. Series files
carry (timestamp, value) rows; event files carry one timestamp per row with
an optional weight column that is ignored. Timestamps are either
non-negative integers or ISO dates (YYYY-MM-DD); the two forms must not be
mixed within one file. Lines starting with '#' and blank lines are skipped.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import ConfigError, OrderError, ParseError

_INT_RE = re.compile(r"\d+")
_DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}")


@dataclass(frozen=True)
class TimeGrid:
    """A gap-free grid of time steps, one unit (or one day) apart.

    Grid indices are the 0-based integers 0..length-1; index i corresponds
    to the timestamp start + i.
    """

    start: int | date
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ConfigError(f"grid length must be >= 1, got {self.length}")
        if isinstance(self.start, int) and self.start < 0:
            raise ConfigError("integer grid origin must be non-negative")

    @property
    def dated(self) -> bool:
        return isinstance(self.start, date)

    def timestamp(self, index: int):
        """Timestamp at a grid index (int or date, matching the origin)."""
        if not 0 <= index < self.length:
            raise IndexError(f"grid index {index} out of range 0..{self.length - 1}")
        if self.dated:
            return self.start + timedelta(days=index)
        return self.start + index

    def index_of(self, timestamp) -> int | None:
        """Grid index of a timestamp, or None when it falls outside the grid."""
        if self.dated:
            offset = (timestamp - self.start).days
        else:
            offset = timestamp - self.start
        return offset if 0 <= offset < self.length else None

    def label(self, index: int) -> str:
        ts = self.timestamp(index)
        return ts.isoformat() if self.dated else str(ts)


@dataclass(frozen=True, eq=False)
class InputSeries:
    """A real-valued observation per grid step."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        # copy so freezing never touches a caller-owned buffer
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size != self.grid.length:
            raise ConfigError(
                f"series has {values.size} values for a grid of length {self.grid.length}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigError("series values must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class EventSeries:
    """A binary flag per grid step; flag 1 marks an actual anomaly."""

    grid: TimeGrid
    flags: np.ndarray
    n_events: int = field(init=False)

    def __post_init__(self):
        flags = np.asarray(self.flags)
        if flags.ndim != 1 or flags.size != self.grid.length:
            raise ConfigError(
                f"event series has {flags.size} flags for a grid of length {self.grid.length}"
            )
        if not np.isin(flags, (0, 1)).all():
            raise ConfigError("event flags must be 0 or 1")
        flags = flags.astype(np.uint8)
        flags.setflags(write=False)
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "n_events", int(flags.sum()))


@dataclass(frozen=True)
class IngestReport:
    """Counts of repairs applied while reading a file."""

    gaps_filled: int = 0
    duplicates_collapsed: int = 0
    out_of_range: int = 0

    def warnings(self) -> list[str]:
        notes = []
        if self.gaps_filled:
            notes.append(f"filled {self.gaps_filled} missing step(s) with 0")
        if self.duplicates_collapsed:
            notes.append(f"collapsed {self.duplicates_collapsed} duplicate event(s)")
        if self.out_of_range:
            notes.append(f"dropped {self.out_of_range} event(s) outside the grid")
        return notes


def _data_rows(path):
    """Yield (line_number, fields) for every non-blank, non-comment line."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield line_no, line.replace(",", " ").split()


def _parse_timestamp(token: str, path, line_no: int):
    if _INT_RE.fullmatch(token):
        return int(token)
    if _DATE_RE.fullmatch(token):
        try:
            return date.fromisoformat(token)
        except ValueError:
            raise ParseError(f"invalid date {token!r}", path, line_no) from None
    raise ParseError(
        f"unparseable timestamp {token!r} (expected a non-negative integer or YYYY-MM-DD)",
        path,
        line_no,
    )


def _check_form(timestamp, dated: bool | None, path, line_no: int) -> bool:
    is_date = isinstance(timestamp, date)
    if dated is not None and is_date != dated:
        raise ParseError("integer and date timestamps mixed in one file", path, line_no)
    return is_date


def load_series(path) -> tuple[InputSeries, IngestReport]:
    """Read a (timestamp, value) file onto a gap-free grid.

    Timestamps must be strictly increasing; missing intermediate steps are
    filled with value 0 and counted in the returned report.

    Raises ParseError for malformed rows (with the offending line number)
    and OrderError when timestamps are not strictly increasing.
    """
    path = Path(path)
    timestamps = []
    values = []
    dated = None
    for line_no, fields in _data_rows(path):
        if len(fields) != 2:
            raise ParseError(
                f"expected 2 columns (timestamp, value), got {len(fields)}", path, line_no
            )
        ts = _parse_timestamp(fields[0], path, line_no)
        dated = _check_form(ts, dated, path, line_no)
        try:
            value = float(fields[1])
        except ValueError:
            raise ParseError(f"unparseable value {fields[1]!r}", path, line_no) from None
        if not math.isfinite(value):
            raise ParseError(f"non-finite value {fields[1]!r}", path, line_no)
        if timestamps and ts <= timestamps[-1]:
            raise OrderError(
                f"{path}: line {line_no}: timestamps must be strictly increasing"
            )
        timestamps.append(ts)
        values.append(value)

    if not timestamps:
        raise ParseError("no data rows", path)

    grid = TimeGrid(start=timestamps[0], length=_span(timestamps[0], timestamps[-1]))
    filled = np.zeros(grid.length, dtype=np.float64)
    for ts, value in zip(timestamps, values):
        filled[grid.index_of(ts)] = value
    report = IngestReport(gaps_filled=grid.length - len(timestamps))
    return InputSeries(grid, filled), report


def load_events(path, grid: TimeGrid) -> tuple[EventSeries, IngestReport]:
    """Read an event-timestamp file and flag the matching grid steps.

    Duplicate timestamps collapse to a single flag; timestamps outside the
    grid are dropped. Both repairs are counted in the returned report.
    """
    path = Path(path)
    flags = np.zeros(grid.length, dtype=np.uint8)
    duplicates = 0
    out_of_range = 0
    dated = None
    for line_no, fields in _data_rows(path):
        if len(fields) not in (1, 2):  # optional weight column is ignored
            raise ParseError(
                f"expected 1 or 2 columns (timestamp [, weight]), got {len(fields)}",
                path,
                line_no,
            )
        ts = _parse_timestamp(fields[0], path, line_no)
        dated = _check_form(ts, dated, path, line_no)
        if dated != grid.dated:
            raise ParseError(
                "event timestamp form does not match the grid "
                f"({'dates' if grid.dated else 'integers'} expected)",
                path,
                line_no,
            )
        index = grid.index_of(ts)
        if index is None:
            out_of_range += 1
        elif flags[index]:
            duplicates += 1
        else:
            flags[index] = 1
    report = IngestReport(duplicates_collapsed=duplicates, out_of_range=out_of_range)
    return EventSeries(grid, flags), report


def write_series(path, grid: TimeGrid, values, value_column: str = "value") -> None:
    """Write (timestamp, value) rows; floats keep full round-trip precision."""
    values = np.asarray(values, dtype=np.float64)
    if values.size != grid.length:
        raise ConfigError("values length does not match grid")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# timestamp\t{value_column}\n")
        for i in range(grid.length):
            fh.write(f"{grid.label(i)}\t{float(values[i])!r}\n")


def _span(first, last) -> int:
    if isinstance(first, date):
        return (last - first).days + 1
    return last - first + 1
