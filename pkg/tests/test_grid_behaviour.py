"""Qualitative simulation behaviour on the default n=200 design, 100 replications."""

import numpy as np
import pytest

from hetseg.baselines import mhetero_dp
from hetseg.simulation import KSTAR, SimDesign, generate_series, select_rows


def k_hats(results, model, criterion, sigma2):
    return np.array([r.k_hat for r in select_rows(results, model=model, criterion=criterion, sigma2=sigma2)])


def test_grid_is_complete(default_grid):
    design, results, _ = default_grid
    per_config = len(design.sigma2_grid) * design.replications
    assert len(results) == 4 * 5 * per_config  # 3 models + oracle, 4 criteria + true K


def test_small_noise_lavielle_recovers_k(default_grid):
    _, results, _ = default_grid
    assert np.mean(k_hats(results, "MFixedHetero", "lav", 0.1) == 7) >= 0.8


def test_small_noise_mbic_majority(default_grid):
    _, results, _ = default_grid
    k = k_hats(results, "MFixedHetero", "mbic", 0.1)
    assert np.mean(k == 7) > 0.5
    rows = select_rows(results, model="MFixedHetero", criterion="mbic", sigma2=0.1)
    assert np.median([r.k_hat - r.k_star for r in rows]) == 0
    assert np.median([r.d2 for r in rows]) <= 2


def test_bm1_returns_valid_k_when_easy(default_grid):
    _, results, _ = default_grid
    k = k_hats(results, "MFixedHetero", "bm1", 0.1)
    assert k.size == 100 and np.all((k >= 1) & (k <= 40))


def test_large_noise_under_segments(default_grid):
    _, results, _ = default_grid
    for crit in ("lav", "mbic"):
        rows = select_rows(results, model="MFixedHetero", criterion=crit, sigma2=1.5)
        assert np.median([r.k_hat - r.k_star for r in rows]) < 0
        forced = select_rows(results, model="MFixedHetero", criterion=KSTAR, sigma2=1.5)
        assert np.median([r.d1 for r in rows]) <= np.median([r.d1 for r in forced])


def test_bm2_selects_more_than_lavielle(default_grid):
    _, results, _ = default_grid
    assert np.median(k_hats(results, "MFixedHetero", "bm2", 1.5)) > np.median(
        k_hats(results, "MFixedHetero", "lav", 1.5))


@pytest.mark.parametrize("crit", ["lav", "bm2", "mbic"])
def test_mhomo_close_to_fixed_hetero_when_variances_equal(default_grid, crit):
    _, results, _ = default_grid
    assert np.median(k_hats(results, "MHomo", crit, 0.5)) == np.median(
        k_hats(results, "MFixedHetero", crit, 0.5))


def test_mhetero_mbic_overestimates_at_small_noise(default_grid):
    _, results, _ = default_grid
    assert np.median(k_hats(results, "MHetero", "mbic", 0.1)) > 7


def test_mhetero_finds_variance_changes():
    design = SimDesign(n=200, replications=100, base_seed=2019)
    changes = np.arange(25, 200, 25)
    hits = 0
    for rep in range(design.replications):
        y, _, _ = generate_series(design, rep, 1.5)
        bps = np.array(mhetero_dp(y, kmax=14).breakpoints(14))
        near = np.abs(bps[:, None] - changes[None, :]).min(axis=1) <= 3
        hits += near.sum() >= 3
    assert hits > design.replications / 2
