"""Monte-Carlo benchmark: series generator, Hausdorff components, experiment grid."""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import HetsegError
from .pipeline import FIXED_HETERO, MODELS, fit_model
from .selection import CRITERIA, CriterionConfig
from .types import ScaleEstimates, Segmentation, TimeSeries, VarianceIntervalMap

log = logging.getLogger(__name__)

ORACLE = "MFixedHeteroOracle"
KSTAR = "kstar"  # pseudo-criterion: the optimal segmentation with the true K
COLUMNS = ("model", "criterion", "sigma2", "rep", "kHat", "kStar", "d1", "d2",
           "sigmaErr1", "sigmaErr2", "wallMs")
BASE_BREAKS = (27, 38, 88, 111, 150, 183)


@dataclass(frozen=True)
class SimDesign:
    n: int = 200
    years: int = 4
    months_per_year: int = 2
    sigma1: float = 0.5
    sigma2_grid: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5)
    true_breaks: tuple[int, ...] | None = None
    replications: int = 100
    base_seed: int = 0
    kmax: int | None = None

    def __post_init__(self):
        if self.true_breaks is None:
            scale = self.n // 200 if self.n % 200 == 0 else None
            if scale is None:
                raise ValueError("true_breaks must be given when n is not a multiple of 200")
            object.__setattr__(self, "true_breaks", tuple(scale * b for b in BASE_BREAKS))
        tb = self.true_breaks
        if any(b >= a for b, a in zip(tb, tb[1:])) or tb[0] < 1 or tb[-1] >= self.n:
            raise ValueError(f"true breakpoints {tb} must increase within 1..{self.n - 1}")
        if self.n % (self.years * self.months_per_year):
            raise ValueError("n must be divisible by years * months_per_year")
        if self.replications < 1:
            raise ValueError("replications must be positive")

    @property
    def k_star(self) -> int:
        return len(self.true_breaks) + 1

    @property
    def block(self) -> int:
        return self.n // (self.years * self.months_per_year)

    def labels(self) -> np.ndarray:
        t = np.arange(self.n)
        return (t // self.block) % self.months_per_year + 1

    def true_means(self) -> np.ndarray:
        return np.arange(self.k_star) % 2.0

    def true_segmentation(self) -> Segmentation:
        return Segmentation(self.true_breaks, self.true_means(), self.n)

    def sigmas(self, sigma2: float) -> np.ndarray:
        # months beyond the second alternate between the two levels
        return np.array([self.sigma1 if j % 2 == 0 else sigma2 for j in range(self.months_per_year)])


def rep_rng(base_seed: int, sigma2: float, rep: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, sigma2, rep), independent of run order."""
    ss = np.random.SeedSequence([int(base_seed), int(round(sigma2 * 1e6)), int(rep)])
    return np.random.Generator(np.random.Philox(ss))


def generate_series(design: SimDesign, rep: int, sigma2: float | None = None):
    """One replicate: ``(TimeSeries, VarianceIntervalMap, true Segmentation)``."""
    if sigma2 is None:
        sigma2 = design.sigma2_grid[0]
    labels = design.labels()
    seg = design.true_segmentation()
    sd = design.sigmas(sigma2)[labels - 1]
    rng = rep_rng(design.base_seed, sigma2, rep)
    y = seg.fitted() + sd * rng.standard_normal(design.n)
    return TimeSeries(y), VarianceIntervalMap(labels, design.months_per_year), seg


def hausdorff_components(true_breaks: Sequence[int], est_breaks: Sequence[int], n: int | None = None):
    """Directed distances ``(d1, d2)`` between true and estimated breakpoints.

    ``d1`` is the largest distance from an estimated breakpoint to the
    nearest true one, ``d2`` the largest distance from a true breakpoint to
    the nearest estimate. With no estimated breakpoint, ``d1 = 0`` and ``d2``
    measures true breakpoints against the series ends ``{0, n}``.
    """
    a = np.asarray(true_breaks, dtype=float)
    b = np.asarray(est_breaks, dtype=float)
    if b.size == 0:
        if a.size == 0:
            return 0.0, 0.0
        if n is None:
            raise ValueError("n is required when no breakpoint is estimated")
        ends = np.array([0.0, float(n)])
        return 0.0, float(np.abs(a[:, None] - ends[None, :]).min(axis=1).max())
    if a.size == 0:
        raise ValueError("true breakpoint set is empty")
    dist = np.abs(a[:, None] - b[None, :])
    return float(dist.min(axis=0).max()), float(dist.min(axis=1).max())


@dataclass
class RepResult:
    model: str
    criterion: str
    sigma2: float
    rep: int
    k_hat: int
    k_star: int
    d1: float
    d2: float
    sigma_err: tuple[float, float]
    wall_ms: float
    breakpoints: tuple[int, ...] = field(default=(), repr=False)

    def row(self) -> dict:
        return {
            "model": self.model, "criterion": self.criterion, "sigma2": self.sigma2,
            "rep": self.rep, "kHat": self.k_hat, "kStar": self.k_star, "d1": self.d1,
            "d2": self.d2, "sigmaErr1": self.sigma_err[0], "sigmaErr2": self.sigma_err[1],
            "wallMs": self.wall_ms,
        }


def _run_one(design: SimDesign, sigma2: float, rep: int, models, criteria, cfg, record_timing):
    y, vmap, truth = generate_series(design, rep, sigma2)
    true_sd = design.sigmas(sigma2)
    sel = [c for c in criteria if c != KSTAR]
    out = []
    for model in models:
        t0 = time.perf_counter()
        kw = {}
        name = model
        if model == ORACLE:
            name, kw = FIXED_HETERO, {"scales": ScaleEstimates(true_sd)}
        try:
            fit = fit_model(name, y, vmap if name == FIXED_HETERO else None, design.kmax, cfg, sel, **kw)
        except HetsegError as exc:
            log.warning("sigma2=%s rep=%d model=%s failed: %s", sigma2, rep, model, exc)
            continue
        wall = (time.perf_counter() - t0) * 1e3 if record_timing else 0.0
        for crit in criteria:
            if crit == KSTAR:
                k = min(design.k_star, fit.dp.kmax)
            elif crit in fit.report.chosen:
                k = fit.report.chosen[crit]
            else:
                continue
            seg = fit.segmentation(k)
            d1, d2 = hausdorff_components(design.true_breaks, seg.breakpoints, design.n)
            if model == FIXED_HETERO:
                err = tuple(fit.scales.sigma[:2] - true_sd[:2])
            elif model == ORACLE:
                err = (0.0, 0.0)
            elif model == "MHomo":
                s = fit.sigma_homo(k)
                err = (s - true_sd[0], s - true_sd[1])
            else:
                err = (float("nan"), float("nan"))
            out.append(RepResult(model, crit, sigma2, rep, k, design.k_star, d1, d2,
                                 (float(err[0]), float(err[1])), wall, seg.breakpoints))
    return out


def _run_task(args):
    return _run_one(*args)


def run_grid(
    design: SimDesign,
    models: Sequence[str] = MODELS,
    criteria: Sequence[str] = CRITERIA,
    oracle_variances: bool = False,
    cfg: CriterionConfig = CriterionConfig(),
    workers: int = 1,
    record_timing: bool = True,
    sigma2_grid: Iterable[float] | None = None,
) -> list[RepResult]:
    """All (sigma2, rep, model, criterion) results, ordered by key.

    ``oracle_variances`` adds an MFixedHetero run with the true standard
    deviations plugged in. With ``record_timing=False`` the ``wallMs``
    column is zero and the table is byte-reproducible.
    """
    models = list(models)
    if oracle_variances and ORACLE not in models:
        models.append(ORACLE)
    grid = tuple(design.sigma2_grid if sigma2_grid is None else sigma2_grid)
    tasks = [(design, s2, rep, tuple(models), tuple(criteria), cfg, record_timing)
             for s2 in grid for rep in range(design.replications)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        chunks = [_run_task(t) for t in tasks]
    return [r for chunk in chunks for r in chunk]


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def write_table(results: Sequence[RepResult], fh=None, delimiter: str = "\t") -> str | None:
    """Write the flat results table; returns the text when ``fh`` is None."""
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in results:
        row = r.row()
        w.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue() if fh is None else None


def read_table(fh, delimiter: str = "\t") -> list[dict]:
    rows = []
    for row in csv.DictReader(fh, delimiter=delimiter):
        for key in ("sigma2", "d1", "d2", "sigmaErr1", "sigmaErr2", "wallMs"):
            row[key] = float(row[key])
        for key in ("rep", "kHat", "kStar"):
            row[key] = int(row[key])
        rows.append(row)
    return rows


def summarize(results: Sequence[RepResult]) -> list[dict]:
    """Boxplot statistics (quartiles) of K-hat - K*, d1 and d2 per configuration."""
    groups: dict[tuple, list[RepResult]] = {}
    for r in results:
        groups.setdefault((r.model, r.criterion, r.sigma2), []).append(r)
    out = []
    for (model, crit, s2), rs in groups.items():
        dk = np.array([r.k_hat - r.k_star for r in rs], dtype=float)
        d1 = np.array([r.d1 for r in rs])
        d2 = np.array([r.d2 for r in rs])
        e1 = np.array([r.sigma_err[0] for r in rs])
        e2 = np.array([r.sigma_err[1] for r in rs])
        row = {"model": model, "criterion": crit, "sigma2": s2, "reps": len(rs)}
        for name, v in (("dK", dk), ("d1", d1), ("d2", d2)):
            q1, med, q3 = np.percentile(v, [25, 50, 75])
            row.update({f"{name}_q1": q1, f"{name}_median": med, f"{name}_q3": q3})
        row["sigmaErr1_median"] = float(np.median(e1)) if not np.all(np.isnan(e1)) else float("nan")
        row["sigmaErr2_median"] = float(np.median(e2)) if not np.all(np.isnan(e2)) else float("nan")
        out.append(row)
    return out


def select_rows(results: Iterable[RepResult], **match) -> list[RepResult]:
    return [r for r in results if all(getattr(r, k) == v for k, v in match.items())]


def with_replications(design: SimDesign, replications: int) -> SimDesign:
    return replace(design, replications=replications)
