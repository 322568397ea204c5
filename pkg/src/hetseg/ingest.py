"""Reading daily series from delimited text and building variance-interval maps."""

from __future__ import annotations

import calendar
import csv
import datetime as dt
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DuplicateDate, ParseError, UnknownColumn
from .selection import CRITERIA
from .types import TimeSeries, VarianceIntervalMap

log = logging.getLogger(__name__)

MONTH_NAMES = tuple(calendar.month_abbr[1:])


@dataclass(frozen=True)
class IngestConfig:
    input_path: str | Path
    date_column: str = "date"
    value_column: str = "value"
    missing_policy: str = "drop"
    interval_scheme: str = "calendarMonth"
    labels_column: str | None = None
    kmax: int | None = None
    criteria: tuple[str, ...] = CRITERIA
    zero_scale_floor: bool = False
    seed: int = 0
    delimiter: str | None = None

    def __post_init__(self):
        if self.missing_policy not in ("drop", "error"):
            raise ValueError(f"missing_policy must be 'drop' or 'error', not {self.missing_policy!r}")
        if self.interval_scheme not in ("calendarMonth", "explicitLabels"):
            raise ValueError(f"unknown interval scheme {self.interval_scheme!r}")
        if self.interval_scheme == "explicitLabels" and not self.labels_column:
            raise ValueError("explicitLabels needs a labels column")
        cols = [self.date_column, self.value_column] + ([self.labels_column] if self.labels_column else [])
        if len(set(cols)) != len(cols):
            raise ValueError(f"columns must be distinct: {cols}")
        if self.kmax is not None and self.kmax < 1:
            raise ValueError("kmax must be at least 1")


class Ingested(NamedTuple):
    series: TimeSeries
    vmap: VarianceIntervalMap
    dropped: int


def _sniff_delimiter(header: str) -> str:
    for d in ("\t", ",", ";"):
        if d in header:
            return d
    return ","


def month_map(dates) -> VarianceIntervalMap:
    """Label each day by its calendar month, densely renumbered over months present."""
    months = np.asarray(dates, dtype="datetime64[M]").astype(int) % 12 + 1
    present = np.unique(months)
    dense = np.searchsorted(present, months) + 1
    return VarianceIntervalMap(dense, len(present), tuple(MONTH_NAMES[m - 1] for m in present))


def label_map(raw: Sequence[str]) -> VarianceIntervalMap:
    """Dense 1..J labels from arbitrary label strings (numeric order when all are integers)."""
    uniq = sorted(set(raw))
    try:
        uniq = sorted(uniq, key=int)
    except ValueError:
        pass
    index = {u: i + 1 for i, u in enumerate(uniq)}
    return VarianceIntervalMap(np.array([index[r] for r in raw]), len(uniq), tuple(uniq))


def parse_series(cfg: IngestConfig) -> Ingested:
    path = Path(cfg.input_path)
    with path.open(newline="") as fh:
        header = fh.readline()
        if not header.strip():
            raise ParseError(1, "missing header row")
        delim = cfg.delimiter or _sniff_delimiter(header)
        fields = next(csv.reader([header], delimiter=delim))
        fields = [f.strip() for f in fields]
        wanted = [cfg.date_column, cfg.value_column]
        if cfg.interval_scheme == "explicitLabels":
            wanted.append(cfg.labels_column)
        missing = [c for c in wanted if c not in fields]
        if missing:
            raise UnknownColumn(f"column(s) {missing} not in header {fields}")
        di, vi = fields.index(cfg.date_column), fields.index(cfg.value_column)
        li = fields.index(cfg.labels_column) if cfg.interval_scheme == "explicitLabels" else None
        dates, values, labels = [], [], []
        dropped = 0
        for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(fields):
                raise ParseError(lineno, f"expected {len(fields)} fields, got {len(row)}")
            try:
                day = dt.date.fromisoformat(row[di].strip())
            except ValueError:
                raise ParseError(lineno, f"bad date {row[di]!r}") from None
            try:
                value = float(row[vi])
                if not math.isfinite(value):
                    raise ValueError
            except ValueError:
                if cfg.missing_policy == "error":
                    raise ParseError(lineno, f"bad value {row[vi]!r}") from None
                dropped += 1
                continue
            dates.append(day)
            values.append(value)
            if li is not None:
                labels.append(row[li].strip())
    if dropped:
        log.info("dropped %d row(s) with missing or non-numeric values", dropped)
    d = np.array(dates, dtype="datetime64[D]")
    order = np.argsort(d, kind="stable")
    d = d[order]
    dup = np.flatnonzero(np.diff(d) == np.timedelta64(0, "D"))
    if dup.size:
        raise DuplicateDate(f"date {d[dup[0]]} appears more than once")
    series = TimeSeries(np.asarray(values, dtype=float)[order], d)
    if li is None:
        vmap = month_map(d)
    else:
        vmap = label_map([labels[i] for i in order])
    return Ingested(series, vmap, dropped)


def write_series(path, series: TimeSeries, vmap: VarianceIntervalMap | None = None,
                 date_column: str = "date", value_column: str = "value", labels_column: str = "label"):
    """Write a dated series as TSV; floats are written with round-trip precision."""
    if series.dates is None:
        raise ValueError("only dated series can be written")
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow([date_column, value_column] + ([labels_column] if vmap is not None else []))
        for i in range(series.n):
            row = [str(series.dates[i]), repr(float(series.values[i]))]
            if vmap is not None:
                row.append(vmap.name(int(vmap.labels[i])))
            w.writerow(row)
