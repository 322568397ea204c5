"""Choosing the number of segments from the optimal-contrast curve.

Four criteria are provided:

* ``lav``: Lavielle's adaptive penalty, the largest K whose normalized
  second difference of the contrast exceeds a threshold ``s``;
* ``bm1`` and ``bm2``: the Birge-Massart penalty ``5 D_K + 2 K log(n/K)``
  with its constant calibrated by the slope heuristic, through the
  dimension jump (``bm1``) or a robust slope fit on the large-K tail
  (``bm2``);
* ``mbic``: Zhang and Siegmund's modified BIC for known variance,
  maximized over K.

``costs[K-1]`` always holds the optimal contrast with K segments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateFit, FlatContrast, NoJump
from .types import Segmentation, SelectionReport

CRITERIA = ("lav", "bm1", "bm2", "mbic")


@dataclass(frozen=True)
class CriterionConfig:
    s: float = 0.7
    kmax: int | None = None
    slope_fit_window: float = 0.5
    alpha_grid_size: int = 200
    lad_iterations: int = 50

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("threshold s must be positive")
        if self.kmax is not None and self.kmax < 2:
            raise ValueError("kmax must be at least 2")
        if not 0 < self.slope_fit_window <= 1:
            raise ValueError("slope_fit_window must lie in (0, 1]")


def _as_costs(costs, cfg: CriterionConfig | None = None) -> np.ndarray:
    c = np.asarray(costs, dtype=float)
    if cfg is not None and cfg.kmax is not None:
        c = c[: cfg.kmax]
    return c


def _dims(kmax: int, dims) -> np.ndarray:
    K = np.arange(1, kmax + 1)
    if dims is None:
        return K.astype(float)
    if callable(dims):
        return np.asarray([dims(k) for k in K], dtype=float)
    return np.asarray(dims, dtype=float)[:kmax]


def bm_penalty(K, n: int, dim=None):
    """Birge-Massart penalty shape ``5 D_K + 2 K log(n/K)`` (``D_K = K`` by default)."""
    K = np.asarray(K, dtype=float)
    D = K if dim is None else np.asarray(dim, dtype=float)
    out = 5.0 * D + 2.0 * K * np.log(n / K)
    return float(out) if out.ndim == 0 else out


def lavielle_select(costs, cfg: CriterionConfig = CriterionConfig(), diagnostics: dict | None = None) -> int:
    c = _as_costs(costs, cfg)
    kmax = c.size
    if kmax < 3:
        raise ValueError("Lavielle's criterion needs kmax >= 3")
    span = c[-1] - c[0]
    if span == 0:
        warnings.warn("flat contrast curve; selecting K=1", FlatContrast, stacklevel=2)
        return 1
    ell = (c[-1] - c) / span * (kmax - 1) + 1
    d = ell[:-2] - 2 * ell[1:-1] + ell[2:]  # K = 2 .. kmax-1
    above = np.flatnonzero(d > cfg.s)
    k_hat = int(above[-1]) + 2 if above.size else 1
    if diagnostics is not None:
        diagnostics.update(normalized=ell, second_difference=d, s=cfg.s)
    return k_hat


def penalized_argmin(costs, pen, alpha: float) -> int:
    return int(np.argmin(np.asarray(costs) + alpha * np.asarray(pen))) + 1


def alpha_grid(costs, n: int, size: int = 200, dims=None) -> np.ndarray:
    c = np.asarray(costs, dtype=float)
    pen_max = bm_penalty(c.size, n, _dims(c.size, dims)[-1])
    scale = (c[0] - c[-1]) / pen_max
    if not scale > 0:
        scale = 1.0
    return scale * np.geomspace(1e-6, 1e6, size)


def bm1_select(costs, n: int, cfg: CriterionConfig = CriterionConfig(), dims=None,
               diagnostics: dict | None = None) -> int:
    """Dimension-jump calibration of the Birge-Massart constant."""
    c = _as_costs(costs, cfg)
    kmax = c.size
    pen = bm_penalty(np.arange(1, kmax + 1), n, _dims(kmax, dims))
    alphas = alpha_grid(c, n, cfg.alpha_grid_size, dims)
    path = np.array([penalized_argmin(c, pen, a) for a in alphas])
    drops = path[:-1] - path[1:]
    if diagnostics is not None:
        diagnostics.update(alphas=alphas, path=path)
    if drops.max() <= 0:
        warnings.warn("selected dimension never jumps over the alpha grid", NoJump, stacklevel=2)
        k_hat = int(path[len(path) // 2])
        if diagnostics is not None:
            diagnostics.update(alpha_jump=None, alpha_hat=None)
        return k_hat
    i = int(np.flatnonzero(drops == drops.max())[0])
    alpha_jump = math.sqrt(alphas[i] * alphas[i + 1])
    k_hat = penalized_argmin(c, pen, 2.0 * alpha_jump)
    if diagnostics is not None:
        diagnostics.update(alpha_jump=alpha_jump, alpha_hat=2.0 * alpha_jump, jump=int(drops[i]))
    return k_hat


def lad_fit(x, y, iterations: int = 50, tol: float = 1e-10) -> tuple[float, float, bool]:
    """Least-absolute-deviation line ``y ~ a + b x`` by reweighted least squares.

    Returns ``(a, b, converged)``; on non-convergence the OLS line is returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        raise DegenerateFit("slope regression needs at least two distinct penalty values")
    X = np.column_stack([np.ones_like(x), x])
    ols = np.linalg.lstsq(X, y, rcond=None)[0]
    beta = ols
    scale = max(np.abs(y).max(), 1.0) * 1e-12
    for _ in range(iterations):
        r = np.abs(y - X @ beta)
        w = 1.0 / np.maximum(r, scale)
        sw = np.sqrt(w)
        new = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)[0]
        if np.allclose(new, beta, rtol=tol, atol=tol * (1 + np.abs(beta).max())):
            return float(new[0]), float(new[1]), True
        beta = new
    return float(ols[0]), float(ols[1]), False


def bm2_select(costs, n: int, cfg: CriterionConfig = CriterionConfig(), dims=None,
               diagnostics: dict | None = None) -> int:
    """Data-driven slope calibration: fit contrast against penalty on the large-K tail."""
    c = _as_costs(costs, cfg)
    kmax = c.size
    if kmax < 6:
        raise ValueError("bm2 needs kmax >= 6")
    pen = bm_penalty(np.arange(1, kmax + 1), n, _dims(kmax, dims))
    m = math.ceil(cfg.slope_fit_window * kmax)
    tail = slice(kmax - m, kmax)
    _, slope, converged = lad_fit(pen[tail], c[tail], cfg.lad_iterations)
    s_hat = -slope
    alpha_hat = 2.0 * s_hat
    k_hat = penalized_argmin(c, pen, alpha_hat)
    if diagnostics is not None:
        diagnostics.update(slope=s_hat, alpha_hat=alpha_hat, fit_points=m, lad_converged=converged)
    return k_hat


def mbic_values(costs, lengths: Sequence[Sequence[int]], n: int) -> np.ndarray:
    c = np.asarray(costs, dtype=float)
    K = np.arange(1, c.size + 1)
    log_len = np.array([np.log(np.asarray(l, dtype=float)).sum() for l in lengths[: c.size]])
    return -0.5 * c - 0.5 * log_len + (1.5 - K) * math.log(n)


def _segment_lengths(segs) -> list[np.ndarray]:
    out = []
    for s in segs:
        out.append(s.lengths() if isinstance(s, Segmentation) else np.asarray(s))
    return out


def mbic_select(costs, segs, n: int, cfg: CriterionConfig = CriterionConfig(),
                diagnostics: dict | None = None) -> int:
    """Maximize mBIC. ``segs[K-1]`` is the optimal K-segmentation (or its segment lengths)."""
    c = _as_costs(costs, cfg)
    values = mbic_values(c, _segment_lengths(segs), n)
    if diagnostics is not None:
        diagnostics.update(values=values)
    return int(np.argmax(values)) + 1  # first maximum, i.e. smaller K on ties


def select_all(costs, segs, n: int, cfg: CriterionConfig = CriterionConfig(),
               criteria: Sequence[str] = CRITERIA, dims=None) -> SelectionReport:
    """Run every requested criterion; a failing criterion is reported, not raised.

    ``dims`` overrides ``D_K`` in the Birge-Massart penalty (models with extra
    per-segment parameters count them there).
    """
    unknown = [name for name in criteria if name not in CRITERIA]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}; choose from {CRITERIA}")
    c = np.asarray(costs, dtype=float)
    report = SelectionReport(contrast=c)
    for name in criteria:
        diag: dict = {}
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                if name == "lav":
                    k = lavielle_select(c, cfg, diag)
                elif name == "bm1":
                    k = bm1_select(c, n, cfg, dims, diag)
                elif name == "bm2":
                    k = bm2_select(c, n, cfg, dims, diag)
                else:
                    k = mbic_select(c, segs, n, cfg, diag)
            except (ValueError, np.linalg.LinAlgError) as exc:
                report.warnings[name] = str(exc)
                report.diagnostics[name] = diag
                continue
        if caught:
            report.warnings[name] = "; ".join(str(w.message) for w in caught)
        report.chosen[name] = k
        report.diagnostics[name] = diag
    return report
