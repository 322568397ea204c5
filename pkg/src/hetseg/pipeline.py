"""End-to-end fitting: scales, DP, model selection, per-criterion segmentations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baselines import BaselineKind, baseline_dp, mhomo_sigma2, select_for_dp
from .robust_scale import sigma_per_interval
from .selection import CRITERIA, CriterionConfig, select_all
from .types import ScaleEstimates, Segmentation, SelectionReport, TimeSeries, VarianceIntervalMap, validate_inputs
from .weighted_dp import DPResult, default_kmax, dp_segment

FIXED_HETERO = "MFixedHetero"
MODELS = (FIXED_HETERO, BaselineKind.MHOMO.value, BaselineKind.MHETERO.value)


@dataclass
class ModelFit:
    model: str
    dp: DPResult
    report: SelectionReport
    scales: ScaleEstimates | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def segmentation(self, criterion_or_k) -> Segmentation:
        K = criterion_or_k if isinstance(criterion_or_k, (int, np.integer)) else self.report.chosen[criterion_or_k]
        if K not in self._cache:
            self._cache[K] = self.dp.segmentation(int(K))
        return self._cache[K]

    def sigma_homo(self, K: int) -> float:
        """Fitted common standard deviation (MHomo only)."""
        return float(np.sqrt(mhomo_sigma2(self.dp, K)))


def fit_fixed_hetero(
    y: TimeSeries,
    vmap: VarianceIntervalMap,
    kmax: int | None = None,
    cfg: CriterionConfig = CriterionConfig(),
    criteria: Sequence[str] = CRITERIA,
    scales: ScaleEstimates | None = None,
    zero_scale_floor: bool = False,
) -> ModelFit:
    """Two-step procedure: robust interval scales, then weighted DP and selection.

    Pass ``scales`` to plug in known standard deviations instead of estimating them.
    """
    y, vmap = validate_inputs(y, vmap)
    if scales is None:
        scales = sigma_per_interval(y, vmap, zero_scale_floor=zero_scale_floor)
    dp = dp_segment(y, vmap, scales, kmax)
    report = select_all(dp.costs, dp.segmentations(), y.n, cfg, criteria)
    return ModelFit(FIXED_HETERO, dp, report, scales)


def fit_model(
    model: str,
    y: TimeSeries,
    vmap: VarianceIntervalMap | None = None,
    kmax: int | None = None,
    cfg: CriterionConfig = CriterionConfig(),
    criteria: Sequence[str] = CRITERIA,
    **kwargs,
) -> ModelFit:
    if model == FIXED_HETERO:
        return fit_fixed_hetero(y, vmap, kmax, cfg, criteria, **kwargs)
    kind = BaselineKind(model)
    if kmax is None:
        kmax = default_kmax(y.n)
        if kind is BaselineKind.MHETERO:
            kmax = min(kmax, y.n // 2)
    dp = baseline_dp(kind, y, kmax)
    return ModelFit(kind.value, dp, select_for_dp(kind, dp, y, cfg, criteria))
