"""Comparison segmentation models sharing the DP engine.

``MHomo``: mean changes with one common variance (plain least squares).
``MHetero``: mean and variance change together at every breakpoint, with
contrast ``sum_k n_k log(sigma_k^2)`` (Gaussian -2 log-likelihood up to
constants).
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from .errors import KmaxTooLarge
from .robust_scale import sigma_per_interval
from .selection import CRITERIA, CriterionConfig, select_all
from .types import SelectionReport, TimeSeries, VarianceIntervalMap
from .weighted_dp import DPResult, WeightedPrefixes, default_kmax, optimal_partition


class BaselineKind(str, enum.Enum):
    MHOMO = "MHomo"
    MHETERO = "MHetero"


def _series(y) -> TimeSeries:
    return y if isinstance(y, TimeSeries) else TimeSeries(np.asarray(y, dtype=float))


def mhomo_dp(y, kmax: int | None = None) -> DPResult:
    """Unweighted least-squares segmentation for every K in ``1..kmax``."""
    y = _series(y)
    kmax = default_kmax(y.n) if kmax is None else int(kmax)
    if kmax > y.n:
        raise KmaxTooLarge(f"kmax={kmax} exceeds n={y.n}")
    p = WeightedPrefixes.build(y.values)
    costs, back = optimal_partition(p.costs_ending_at, y.n, kmax)
    return DPResult(costs, back, p)


def mhomo_sigma2(dp: DPResult, K: int) -> float:
    """Pooled ML variance of the MHomo fit with K segments."""
    return float(dp.costs[K - 1] / dp.n)


def mhetero_variance_floor(values: np.ndarray) -> float:
    n = values.size
    floor = 1e-3 * float(np.var(values)) / n**2
    return floor if floor > 0 else 1e-300


def mhetero_dp(y, kmax: int | None = None) -> DPResult:
    """Joint mean/variance segmentation; segments have at least 2 points.

    Per-segment ML variances are floored at ``1e-3 var(y) / n^2`` so that
    constant stretches do not send ``log`` to minus infinity.
    """
    y = _series(y)
    n = y.n
    kmax = min(default_kmax(n), n // 2) if kmax is None else int(kmax)
    if kmax > n // 2:
        raise KmaxTooLarge(f"kmax={kmax} exceeds n//2={n // 2} for 2-point segments")
    p = WeightedPrefixes.build(y.values)
    floor = mhetero_variance_floor(y.values)

    def cost_to(t):
        s = np.arange(t)
        length = (t - s).astype(float)
        sy = p.Sy[t] - p.Sy[s]
        syy = p.Syy[t] - p.Syy[s]
        var = np.maximum((syy - sy * sy / length) / length, floor)
        return length * np.log(var)

    costs, back = optimal_partition(cost_to, n, kmax, min_size=2)
    return DPResult(costs, back, p)


def baseline_dp(kind, y, kmax: int | None = None) -> DPResult:
    kind = BaselineKind(kind)
    return mhomo_dp(y, kmax) if kind is BaselineKind.MHOMO else mhetero_dp(y, kmax)


def robust_global_sigma(y: TimeSeries) -> float:
    """Single-interval robust scale, used to standardize the MHomo contrast."""
    return float(sigma_per_interval(y, VarianceIntervalMap.single(y.n)).sigma[0])


def select_for_dp(kind, dp: DPResult, y, cfg: CriterionConfig = CriterionConfig(),
                  criteria: Sequence[str] = CRITERIA) -> SelectionReport:
    """Apply the selection criteria to a baseline's own contrast.

    MHomo feeds ``SSE / sigma^2`` with a robust global sigma (the
    known-variance form mBIC expects); MHetero counts ``D_K = 2K`` free
    parameters in the Birge-Massart penalty.
    """
    kind = BaselineKind(kind)
    y = _series(y)
    segs = dp.segmentations()
    if kind is BaselineKind.MHOMO:
        s2 = robust_global_sigma(y) ** 2
        report = select_all(dp.costs / s2, segs, y.n, cfg, criteria)
        for d in report.diagnostics.values():
            d["standardizing_sigma2"] = s2
        return report
    return select_all(dp.costs, segs, y.n, cfg, criteria, dims=lambda k: 2 * k)


def baseline_select(kind, y, kmax: int | None = None, cfg: CriterionConfig = CriterionConfig(),
                    criteria: Sequence[str] = CRITERIA) -> SelectionReport:
    y = _series(y)
    dp = baseline_dp(kind, y, kmax)
    return select_for_dp(kind, dp, y, cfg, criteria)
