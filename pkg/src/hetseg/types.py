"""Value types shared by every module.

Indices exposed to users are 1-based: a breakpoint ``t`` is the last index of
its segment, so segment ``k`` covers ``t[k-1]+1 .. t[k]`` with ``t[0] = 0`` and
``t[K] = n``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import EmptyInterval, LengthMismatch, NonFiniteValue, TooShort


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered real observations, optionally stamped with calendar days."""

    values: np.ndarray
    dates: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise LengthMismatch("values must be one-dimensional")
        if values.size < 2:
            raise TooShort(f"series needs at least 2 observations, got {values.size}")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0]) + 1
            raise NonFiniteValue(f"non-finite value at index {bad}")
        object.__setattr__(self, "values", _frozen(values))
        if self.dates is not None:
            dates = np.asarray(self.dates, dtype="datetime64[D]")
            if dates.shape != values.shape:
                raise LengthMismatch(
                    f"{dates.size} dates for {values.size} values"
                )
            if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
                raise ValueError("dates must be strictly increasing")
            object.__setattr__(self, "dates", _frozen(dates))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        if not np.array_equal(self.values, other.values):
            return False
        if (self.dates is None) != (other.dates is None):
            return False
        return self.dates is None or np.array_equal(self.dates, other.dates)


@dataclass(frozen=True, eq=False)
class VarianceIntervalMap:
    """Per-index labels in ``1..J`` naming the variance interval of each point.

    Intervals need not be contiguous; a label may cover several runs (all
    Januaries of a multi-year daily series, for instance).
    """

    labels: np.ndarray
    J: int | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.size == 0:
            raise LengthMismatch("labels must be a non-empty 1-D array")
        if not np.issubdtype(labels.dtype, np.integer):
            as_int = labels.astype(int)
            if not np.array_equal(as_int, labels):
                raise ValueError("labels must be integers")
            labels = as_int
        labels = labels.astype(np.int64)
        J = int(labels.max()) if self.J is None else int(self.J)
        if labels.min() < 1 or labels.max() > J:
            raise ValueError(f"labels must lie in 1..{J}")
        counts = np.bincount(labels, minlength=J + 1)[1:]
        unused = np.flatnonzero(counts == 0)
        if unused.size:
            raise EmptyInterval(f"variance interval(s) {list(unused + 1)} have no index")
        if self.names is not None and len(self.names) != J:
            raise LengthMismatch(f"{len(self.names)} interval names for J={J}")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "_counts", _frozen(counts))

    @classmethod
    def single(cls, n: int) -> "VarianceIntervalMap":
        return cls(np.ones(n, dtype=np.int64), 1)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def counts(self) -> np.ndarray:
        """Number of indices carrying each label, ``n_j`` for ``j = 1..J``."""
        return self._counts

    def name(self, j: int) -> str:
        return self.names[j - 1] if self.names is not None else str(j)

    def __eq__(self, other):
        if not isinstance(other, VarianceIntervalMap):
            return NotImplemented
        return (
            self.J == other.J
            and np.array_equal(self.labels, other.labels)
            and self.names == other.names
        )


@dataclass(frozen=True)
class Segmentation:
    breakpoints: tuple[int, ...]
    means: tuple[float, ...]
    n: int

    def __post_init__(self):
        bps = tuple(int(b) for b in self.breakpoints)
        means = tuple(float(m) for m in self.means)
        n = int(self.n)
        if len(means) != len(bps) + 1:
            raise LengthMismatch(f"{len(means)} means for {len(bps) + 1} segments")
        bounds = (0,) + bps + (n,)
        if any(b <= a for a, b in zip(bounds, bounds[1:])):
            raise ValueError(f"breakpoints {bps} do not partition 1..{n}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "n", n)

    @property
    def K(self) -> int:
        return len(self.breakpoints) + 1

    @property
    def bounds(self) -> tuple[int, ...]:
        return (0,) + self.breakpoints + (self.n,)

    def segments(self) -> list[tuple[int, int]]:
        """Inclusive 1-based ``(first, last)`` index range of each segment."""
        b = self.bounds
        return [(b[k] + 1, b[k + 1]) for k in range(self.K)]

    def lengths(self) -> np.ndarray:
        return np.diff(np.asarray(self.bounds))

    def fitted(self) -> np.ndarray:
        return np.repeat(np.asarray(self.means), self.lengths())

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "breakpoints": list(self.breakpoints), "means": list(self.means)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Segmentation":
        return cls(tuple(d["breakpoints"]), tuple(d["means"]), d["n"])

    def to_json(self) -> str:
        # repr-precision floats keep the round trip exact
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "Segmentation":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True, eq=False)
class ScaleEstimates:
    """Robust standard deviation per variance interval (``sigma[j-1]`` for label j)."""

    sigma: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim != 1 or sigma.size == 0:
            raise LengthMismatch("sigma must be a non-empty 1-D array")
        if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
            raise ValueError("scale estimates must be finite and strictly positive")
        object.__setattr__(self, "sigma", _frozen(sigma))

    @property
    def J(self) -> int:
        return int(self.sigma.size)

    def per_index(self, vmap: VarianceIntervalMap) -> np.ndarray:
        if vmap.J != self.J:
            raise LengthMismatch(f"{self.J} scales for J={vmap.J} intervals")
        return self.sigma[vmap.labels - 1]

    def __eq__(self, other):
        if not isinstance(other, ScaleEstimates):
            return NotImplemented
        return np.array_equal(self.sigma, other.sigma)


@dataclass
class SelectionReport:
    contrast: np.ndarray
    chosen: dict[str, int] = field(default_factory=dict)
    diagnostics: dict[str, dict[str, Any]] = field(default_factory=dict)
    warnings: dict[str, str] = field(default_factory=dict)

    @property
    def kmax(self) -> int:
        return int(len(self.contrast))


def validate_inputs(
    series: TimeSeries | Sequence[float], vmap: VarianceIntervalMap | Sequence[int], J: int | None = None
) -> tuple[TimeSeries, VarianceIntervalMap]:
    """Check that a series and an interval map describe the same ``n`` points.

    Raw sequences are accepted and converted, so ``validate_inputs([1, 2, 3],
    [1, 1, 2], J=2)`` is valid.
    """
    if not isinstance(series, TimeSeries):
        series = TimeSeries(np.asarray(series, dtype=float))
    if not isinstance(vmap, VarianceIntervalMap):
        labels = np.asarray(vmap)
        if labels.size != series.n:
            raise LengthMismatch(f"{labels.size} labels for {series.n} values")
        vmap = VarianceIntervalMap(labels, J)
    if vmap.n != series.n:
        raise LengthMismatch(f"{vmap.n} labels for {series.n} values")
    return series, vmap
