"""Exact segmentation under the variance-weighted least-squares contrast.

With the interval scales plugged in, the contrast is a sum over segments of
``sum (y_t - mu_k)^2 / sigma_{j(t)}^2``. The minimizing ``mu_k`` is the
precision-weighted mean, so each segment term has a closed form over three
prefix sums and dynamic programming finds the global optimum for every K.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidRange, KmaxTooLarge, TooManySegmentations, ZeroScale
from .types import ScaleEstimates, Segmentation, TimeSeries, VarianceIntervalMap, validate_inputs


def compensated_cumsum(x: np.ndarray) -> np.ndarray:
    """Neumaier-compensated running sum with a leading zero (length ``len(x)+1``)."""
    out = np.zeros(len(x) + 1)
    s = 0.0
    c = 0.0
    for i, v in enumerate(x.tolist()):
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i + 1] = s + c
    return out


@dataclass(frozen=True, eq=False)
class WeightedPrefixes:
    """Cumulative sums of ``w``, ``w*(y-shift)`` and ``w*(y-shift)^2``.

    ``w`` is the precision ``1/sigma^2`` of each point. Subtracting ``shift``
    (the series median) before accumulating limits cancellation in the
    closed-form segment cost; it is added back for means.
    """

    S1: np.ndarray
    Sy: np.ndarray
    Syy: np.ndarray
    shift: float = 0.0

    @classmethod
    def build(cls, y, weights=None) -> "WeightedPrefixes":
        y = np.asarray(y, dtype=float)
        w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ZeroScale("non-positive or non-finite precision weight")
        shift = float(np.median(y))
        yc = y - shift
        return cls(
            compensated_cumsum(w),
            compensated_cumsum(w * yc),
            compensated_cumsum(w * yc * yc),
            shift,
        )

    @property
    def n(self) -> int:
        return len(self.S1) - 1

    def costs_ending_at(self, t: int, starts: np.ndarray | None = None) -> np.ndarray:
        """Cost of segments ``s+1 .. t`` for each prefix position ``s`` in ``starts``."""
        s = np.arange(t) if starts is None else starts
        w = self.S1[t] - self.S1[s]
        sy = self.Sy[t] - self.Sy[s]
        syy = self.Syy[t] - self.Syy[s]
        cost = np.maximum(syy - sy * sy / w, 0.0)
        cost[s == t - 1] = 0.0  # a single point sits on its own mean
        return cost

    def mean(self, a: int, b: int) -> float:
        return (self.Sy[b] - self.Sy[a - 1]) / (self.S1[b] - self.S1[a - 1]) + self.shift


def _check_range(p: WeightedPrefixes, a: int, b: int):
    if not 1 <= a <= b <= p.n:
        raise InvalidRange(f"segment {a}..{b} outside 1..{p.n}")


def segment_cost(p: WeightedPrefixes, a: int, b: int) -> float:
    """Weighted SSE of ``y[a..b]`` (1-based, inclusive) about its weighted mean."""
    _check_range(p, a, b)
    return float(p.costs_ending_at(b, np.array([a - 1]))[0])


def precision_weights(vmap: VarianceIntervalMap, scales: ScaleEstimates) -> np.ndarray:
    return 1.0 / scales.per_index(vmap) ** 2


def weighted_mean(
    y: TimeSeries, vmap: VarianceIntervalMap, scales: ScaleEstimates, a: int, b: int
) -> float:
    y, vmap = validate_inputs(y, vmap)
    if not 1 <= a <= b <= y.n:
        raise InvalidRange(f"segment {a}..{b} outside 1..{y.n}")
    if a == b:
        return float(y.values[a - 1])
    w = precision_weights(vmap, scales)[a - 1 : b]
    return float(np.dot(w, y.values[a - 1 : b]) / w.sum())


@dataclass(frozen=True, eq=False)
class DPResult:
    """Optimal contrast and backtracking table for K = 1..kmax.

    ``costs[K-1]`` is the optimal contrast with K segments and
    ``back[K-1, t]`` the last breakpoint of the best K-segmentation of
    ``1..t``. ``prefixes`` supplies the segment means reported by
    :meth:`segmentation`.
    """

    costs: np.ndarray
    back: np.ndarray
    prefixes: WeightedPrefixes

    @property
    def kmax(self) -> int:
        return int(self.costs.size)

    @property
    def n(self) -> int:
        return self.back.shape[1] - 1

    def breakpoints(self, K: int) -> tuple[int, ...]:
        if not 1 <= K <= self.kmax:
            raise KmaxTooLarge(f"K={K} outside 1..{self.kmax}")
        bps = []
        t = self.n
        for k in range(K, 1, -1):
            t = int(self.back[k - 1, t])
            bps.append(t)
        return tuple(reversed(bps))

    def segmentation(self, K: int) -> Segmentation:
        bps = self.breakpoints(K)
        bounds = (0,) + bps + (self.n,)
        means = [self.prefixes.mean(a + 1, b) for a, b in zip(bounds, bounds[1:])]
        return Segmentation(bps, means, self.n)

    def segmentations(self) -> list[Segmentation]:
        return [self.segmentation(K) for K in range(1, self.kmax + 1)]


def optimal_partition(
    cost_to: Callable[[int], np.ndarray], n: int, kmax: int, min_size: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Segment-additive DP shared by every model.

    ``cost_to(t)`` returns, for ``s = 0..t-1``, the cost of segment
    ``s+1..t``. Rows are filled in increasing ``t`` so each segment cost is
    evaluated once. Among equal totals the smallest last breakpoint wins
    (``argmin`` keeps the first minimum).
    """
    if kmax < 1:
        raise KmaxTooLarge("kmax must be at least 1")
    if kmax * min_size > n:
        raise KmaxTooLarge(f"kmax={kmax} segments of length >= {min_size} do not fit in n={n}")
    D = np.full((kmax, n + 1), np.inf)
    back = np.zeros((kmax, n + 1), dtype=np.int64)
    for t in range(min_size, n + 1):
        c = np.asarray(cost_to(t), dtype=float)
        if min_size > 1:
            c = c.copy()
            c[t - min_size + 1 :] = np.inf
        D[0, t] = c[0]
        if kmax > 1:
            tot = D[:-1, :t] + c
            arg = np.argmin(tot, axis=1)
            D[1:, t] = tot[np.arange(kmax - 1), arg]
            back[1:, t] = arg
    return D[:, n].copy(), back


def default_kmax(n: int) -> int:
    return max(1, min(n // 5, 100))


def dp_segment(
    y: TimeSeries,
    vmap: VarianceIntervalMap,
    scales: ScaleEstimates,
    kmax: int | None = None,
    min_size: int = 1,
) -> DPResult:
    """Minimize the weighted contrast for every K in ``1..kmax``."""
    y, vmap = validate_inputs(y, vmap)
    kmax = default_kmax(y.n) if kmax is None else int(kmax)
    if kmax > y.n:
        raise KmaxTooLarge(f"kmax={kmax} exceeds n={y.n}")
    if np.any(scales.sigma <= 0):
        raise ZeroScale(int(np.flatnonzero(scales.sigma <= 0)[0]) + 1)
    p = WeightedPrefixes.build(y.values, precision_weights(vmap, scales))
    costs, back = optimal_partition(p.costs_ending_at, y.n, kmax, min_size)
    return DPResult(costs, back, p)


def direct_contrast(y, weights, breakpoints) -> float:
    """Two-pass evaluation of the weighted contrast for given breakpoints."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    bounds = (0,) + tuple(breakpoints) + (y.size,)
    total = 0.0
    for a, b in zip(bounds, bounds[1:]):
        if b - a == 1:
            continue
        ys, ws = y[a:b], w[a:b]
        mu = math.fsum(ws * ys) / math.fsum(ws)
        total += math.fsum(ws * (ys - mu) ** 2)
    return total


def brute_force_segment(
    y: TimeSeries, vmap: VarianceIntervalMap, scales: ScaleEstimates, K: int, rtol: float = 1e-12
) -> tuple[float, Segmentation]:
    """Exhaustive search over all K-segmentations (test oracle).

    Ties within ``rtol`` go to the smallest last breakpoint, then the
    smallest second-to-last, and so on, matching :func:`dp_segment`.
    """
    y, vmap = validate_inputs(y, vmap)
    n = y.n
    if not 1 <= K <= n:
        raise KmaxTooLarge(f"K={K} outside 1..{n}")
    if math.comb(n - 1, K - 1) > 10**6:
        raise TooManySegmentations(f"C({n - 1}, {K - 1}) segmentations exceed 10^6")
    w = precision_weights(vmap, scales)
    scored = [
        (direct_contrast(y.values, w, bps), bps)
        for bps in itertools.combinations(range(1, n), K - 1)
    ]
    best = min(c for c, _ in scored)
    tied = [bps for c, bps in scored if c <= best + rtol * abs(best) + 1e-300]
    bps = min(tied, key=lambda b: tuple(reversed(b)))
    bounds = (0,) + bps + (n,)
    means = [
        float(np.dot(w[a:b], y.values[a:b]) / w[a:b].sum()) for a, b in zip(bounds, bounds[1:])
    ]
    return direct_contrast(y.values, w, bps), Segmentation(bps, means, n)
