"""Mean-breakpoint detection for Gaussian series whose variance is constant
on known, fixed time-intervals (for example calendar months).

Typical use::

    from hetseg import TimeSeries, VarianceIntervalMap, fit_fixed_hetero
    fit = fit_fixed_hetero(TimeSeries(y), VarianceIntervalMap(labels))
    fit.segmentation("mbic").breakpoints
"""

from .baselines import BaselineKind, baseline_select, mhetero_dp, mhomo_dp
from .errors import *  # noqa: F401,F403
from .pipeline import FIXED_HETERO, MODELS, ModelFit, fit_fixed_hetero, fit_model
from .robust_scale import (
    C_Q,
    DifferencedSeries,
    asymptotic_variance,
    influence_function,
    q_cr,
    sigma_from_diffs,
    sigma_per_interval,
)
from .selection import (
    CRITERIA,
    CriterionConfig,
    bm1_select,
    bm2_select,
    bm_penalty,
    lavielle_select,
    mbic_select,
    select_all,
)
from .types import ScaleEstimates, Segmentation, SelectionReport, TimeSeries, VarianceIntervalMap, validate_inputs
from .weighted_dp import DPResult, WeightedPrefixes, brute_force_segment, dp_segment, segment_cost, weighted_mean

__version__ = "0.1.0"
