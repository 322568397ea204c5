"""Robust per-interval scale estimation on the differenced series.

Differencing turns each mean shift into a single outlying increment, so a
high-breakdown scale estimator applied to the increments recovers the noise
level without knowing where the breakpoints are. The estimator used is the
Croux-Rousseeuw Q statistic: the first quartile of all pairwise absolute
differences, rescaled for consistency at the Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy.special import erfc

from .errors import IntervalTooSparse, TooShort, ZeroScale
from .types import ScaleEstimates, TimeSeries, VarianceIntervalMap

#: Phi^{-1}(5/8), quantile of the standard normal.
INV_PHI_58 = NormalDist().inv_cdf(5 / 8)
#: Consistency constant of the Q estimator, 1 / (sqrt(2) Phi^{-1}(5/8)).
C_Q = 1.0 / (math.sqrt(2.0) * INV_PHI_58)
assert abs(C_Q - 2.2191) < 5e-4, C_Q

# Materializing all m(m-1)/2 differences costs 8 bytes each; above this many
# points the counting selection is used instead.
MATERIALIZE_MAX = 3000


def norm_cdf(x):
    return 0.5 * erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class DifferencedSeries:
    diffs: np.ndarray
    source_label: int | None = None

    def __len__(self):
        return int(np.asarray(self.diffs).size)


def quartile_rank(m: int) -> int:
    """1-based rank of the first-quartile pairwise difference among C(m, 2)."""
    pairs = m * (m - 1) // 2
    return -(-pairs // 4)


def kth_pairwise_difference(x, k: int, method: str = "auto") -> float:
    """The k-th smallest (1-based) of ``|x_i - x_j|`` over all pairs ``i < j``.

    ``method`` is ``"materialize"`` (all pairs, then a partition), ``"select"``
    (sample-guided bracketing with O(m log m) counting per round), or
    ``"auto"`` which picks by size.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    m = xs.size
    if m < 2:
        raise TooShort(f"need at least 2 values, got {m}")
    pairs = m * (m - 1) // 2
    if not 1 <= k <= pairs:
        raise ValueError(f"rank {k} outside 1..{pairs}")
    if method == "auto":
        method = "materialize" if m <= MATERIALIZE_MAX else "select"
    if method == "materialize":
        iu = np.triu_indices(m, 1)
        d = xs[iu[1]] - xs[iu[0]]
        return float(np.partition(d, k - 1)[k - 1])
    if method == "select":
        return _select_sorted_differences(xs, k)
    raise ValueError(f"unknown method {method!r}")


def _count_upto(xs, rows, v, start):
    """Per-row first column j with ``xs[j] - xs[i] > v`` (columns begin at ``start``)."""
    idx = np.searchsorted(xs, xs[rows] + v, side="right")
    idx = np.maximum(idx, start)
    m = xs.size
    # searchsorted compares xs[j] <= xs[i] + v; the gathered values are
    # xs[j] - xs[i], which can round differently, so nudge to agree with them.
    while True:
        fwd = (idx < m) & (xs[np.minimum(idx, m - 1)] - xs[rows] <= v)
        back = (idx > start) & (xs[np.maximum(idx - 1, 0)] - xs[rows] > v)
        if not (fwd.any() or back.any()):
            return idx
        idx = idx + fwd - back


def _select_sorted_differences(xs, k, rng_seed=0):
    m = xs.size
    rows = np.arange(m)
    start = rows + 1
    # candidate columns of row i are lo[i] <= j < hi[i]; n_below pairs lie below
    lo = start.copy()
    hi = np.full(m, m)
    n_below = 0
    cap = max(8 * m, 4096)
    rng = np.random.default_rng(rng_seed)
    while True:
        width = hi - lo
        total = int(width.sum())
        target = k - n_below
        if total <= cap:
            live = np.flatnonzero(width > 0)
            w = width[live]
            r = np.repeat(live, w)
            cols = np.repeat(lo[live], w) + np.arange(total) - np.repeat(np.cumsum(w) - w, w)
            d = xs[cols] - xs[r]
            return float(np.partition(d, target - 1)[target - 1])
        size = min(total, 4096)
        cum = np.cumsum(width)
        pick = rng.integers(0, total, size)
        r = np.searchsorted(cum, pick, side="right")
        c = lo[r] + (pick - (cum[r] - width[r]))
        sample = np.sort(xs[c] - xs[r])
        q = target / total
        spread = 2.5 * math.sqrt(size)
        a = sample[max(int(q * size - spread), 0)]
        b = sample[min(int(math.ceil(q * size + spread)), size - 1)]
        ia = _count_upto(xs, rows, a, start)
        na = int((ia - start).sum())
        if na >= k:
            new_lo, new_hi, new_below = lo, np.minimum(ia, hi), n_below
        else:
            ib = _count_upto(xs, rows, b, start)
            nb = int((ib - start).sum())
            if nb >= k:
                new_lo, new_hi, new_below = np.maximum(ia, lo), np.minimum(ib, hi), na
            else:
                new_lo, new_hi, new_below = np.maximum(ib, lo), hi, nb
        if int((new_hi - new_lo).sum()) == total:
            # no progress: every live candidate shares one value, or the
            # sample missed; split on the smallest live value instead
            live = width > 0
            vmin = float(np.min(xs[lo[live]] - xs[rows[live]]))
            iv = _count_upto(xs, rows, vmin, start)
            nv = int((iv - start).sum())
            if nv >= k:
                return vmin
            new_lo, new_hi, new_below = np.maximum(iv, lo), hi, nv
        lo, hi, n_below = new_lo, new_hi, new_below


def q_cr(x, method: str = "auto") -> float:
    """Croux-Rousseeuw scale: ``C_Q`` times the first-quartile pairwise distance."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise TooShort(f"q_cr needs at least 2 values, got {x.size}")
    return C_Q * kth_pairwise_difference(x, quartile_rank(x.size), method)


def sigma_from_diffs(x, method: str = "auto") -> float:
    """Noise standard deviation from first differences of a step signal.

    Increments of i.i.d. noise have variance ``2 sigma^2``, hence the
    ``1/sqrt(2)``. ``C_Q`` enters once, through :func:`q_cr`.
    """
    diffs = x.diffs if isinstance(x, DifferencedSeries) else x
    return q_cr(diffs, method) / math.sqrt(2.0)


def sd_from_diffs(x) -> float:
    """Non-robust baseline: sample standard deviation of the increments over sqrt(2)."""
    diffs = np.asarray(x.diffs if isinstance(x, DifferencedSeries) else x, dtype=float)
    return float(np.std(diffs, ddof=1) / math.sqrt(2.0))


def admitted_pairs(series: TimeSeries, vmap: VarianceIntervalMap) -> np.ndarray:
    """Boolean mask over ``t = 0..n-2``: may ``y[t+1] - y[t]`` be used for scale?

    Both endpoints must share a variance interval, and when the series is
    dated they must be consecutive calendar days.
    """
    labels = vmap.labels
    ok = labels[1:] == labels[:-1]
    if series.dates is not None:
        ok &= np.diff(series.dates) == np.timedelta64(1, "D")
    return ok


def interval_differences(series: TimeSeries, vmap: VarianceIntervalMap) -> list[DifferencedSeries]:
    y = series.values
    ok = admitted_pairs(series, vmap)
    d = np.diff(y)
    left = vmap.labels[:-1]
    return [DifferencedSeries(d[ok & (left == j)], j) for j in range(1, vmap.J + 1)]


def sigma_per_interval(
    series: TimeSeries,
    vmap: VarianceIntervalMap,
    zero_scale_floor: bool = False,
    floor_eps: float = 1e-6,
) -> ScaleEstimates:
    """Robust sigma for each variance interval from its admitted increments.

    A zero estimate raises :class:`ZeroScale` unless ``zero_scale_floor`` is
    set, in which case it is replaced by ``floor_eps * q_cr(all increments)``.
    """
    sigma = np.empty(vmap.J)
    for dj in interval_differences(series, vmap):
        j = dj.source_label
        if len(dj) >= 1 and not np.any(dj.diffs):
            sigma[j - 1] = 0.0  # constant interval: zero scale, however few increments
            continue
        if len(dj) < 2:
            raise IntervalTooSparse(vmap.name(j), len(dj))
        sigma[j - 1] = sigma_from_diffs(dj)
    zero = np.flatnonzero(sigma <= 0)
    if zero.size:
        if not zero_scale_floor:
            raise ZeroScale(vmap.name(int(zero[0]) + 1))
        floor = floor_eps * q_cr(np.diff(series.values))
        if floor <= 0:
            raise ZeroScale(vmap.name(int(zero[0]) + 1))
        sigma[zero] = floor
    return ScaleEstimates(sigma)


def influence_function(x):
    """Gaussian influence function of the Q scale estimator (vectorized)."""
    x = np.asarray(x, dtype=float)
    inv = 1.0 / C_Q
    denom = math.exp(-1.0 / (4.0 * C_Q * C_Q)) / (2.0 * math.sqrt(math.pi))
    out = C_Q * (0.25 - norm_cdf(x + inv) + norm_cdf(x - inv)) / denom
    return float(out) if out.ndim == 0 else out


def asymptotic_variance(sigma: float, mc_draws: int = 10**6, seed: int = 0, chunk: int = 10**6) -> float:
    """Monte-Carlo value of the long-run variance of ``sqrt(n)(Q_n - sigma)``.

    Standardized increments of i.i.d. noise are 1-dependent with lag-one
    correlation -1/2, so only the lag-zero and lag-one terms survive::

        sigma * (E[IF(Z0)^2] + 2 E[IF(Z0) IF(Z1)]),  corr(Z0, Z1) = -1/2
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if mc_draws < 1:
        raise ValueError("mc_draws must be positive")
    rng = np.random.default_rng(seed)
    sq = 0.0
    cross = 0.0
    done = 0
    while done < mc_draws:
        m = min(chunk, mc_draws - done)
        z0 = rng.standard_normal(m)
        z1 = -0.5 * z0 + math.sqrt(0.75) * rng.standard_normal(m)
        f0 = influence_function(z0)
        f1 = influence_function(z1)
        sq += float(np.dot(f0, f0))
        cross += float(np.dot(f0, f1))
        done += m
    return sigma * (sq / mc_draws + 2.0 * cross / mc_draws)
