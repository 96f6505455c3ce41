"""Tests for mawalk/fbm.py"""

import numpy as np
import pytest

from mawalk.core import DomainError
from mawalk.fbm import (
    CHOLESKY_MAX_N,
    FbmError,
    GaussPath,
    PathKind,
    TimeGrid,
    covariance_matrix,
    fbm_cov,
    increment_autocovariance,
    sample_fbm,
    sample_fbm_paths,
)
from mawalk.verify.stats import ks_two_sample, standard_error_of_variance


# ---------------------------------------------------------------------------
# Covariance
# ---------------------------------------------------------------------------

def test_fbm_cov_diagonal():
    assert fbm_cov(0.7, 0.7, 0.3) == pytest.approx(0.7 ** 0.6)


@pytest.mark.parametrize("H", [0.1, 0.5, 0.9])
def test_fbm_cov_one_half_cancels(H):
    assert fbm_cov(1.0, 0.5, H) == pytest.approx(0.5)


def test_fbm_cov_brownian_is_min():
    assert fbm_cov(0.8, 0.2, 0.5) == pytest.approx(0.2)


def test_fbm_cov_bad_hurst():
    with pytest.raises(DomainError):
        fbm_cov(0.5, 0.5, 1.0)


HURSTS = [0.1, 0.3, 0.5, 0.7, 0.9]
TIMES = np.array([0.0, 0.05, 0.3, 0.5, 0.77, 1.0])


@pytest.mark.parametrize("H", HURSTS)
def test_fbm_cov_is_symmetric(H):
    t, s = TIMES[:, None], TIMES[None, :]
    assert np.array_equal(fbm_cov(t, s, H), fbm_cov(s, t, H))


@pytest.mark.parametrize("H", HURSTS)
@pytest.mark.parametrize("lam", [0.25, 2.0, 7.5])
def test_fbm_cov_self_similar(H, lam):
    t, s = TIMES[:, None], TIMES[None, :]
    scaled = fbm_cov(lam * t, lam * s, H)
    assert np.allclose(scaled, lam ** (2 * H) * fbm_cov(t, s, H), rtol=1e-12, atol=1e-14)


def test_fbm_cov_brownian_grid_is_min():
    t, s = TIMES[:, None], TIMES[None, :]
    assert np.allclose(fbm_cov(t, s, 0.5), np.minimum(t, s), rtol=1e-14, atol=1e-15)


def test_covariance_matrix_shape_and_symmetry():
    cov = covariance_matrix(TimeGrid(8), 0.7)
    assert cov.shape == (8, 8)
    assert np.allclose(cov, cov.T)
    assert cov[-1, -1] == pytest.approx(1.0)


def test_increment_autocovariance_lag_zero_is_one():
    assert increment_autocovariance(0, 0.7) == pytest.approx(1.0)
    assert increment_autocovariance(1, 0.5) == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# TimeGrid / GaussPath
# ---------------------------------------------------------------------------

def test_time_grid_index():
    grid = TimeGrid(1024)
    assert grid.index(1.0) == 1024
    assert grid.index(0.25) == 256
    assert TimeGrid(3).index(0.5) == 1


def test_time_grid_rejects_outside_unit_interval():
    with pytest.raises(DomainError):
        TimeGrid(4).index(1.5)


def test_gauss_path_must_start_at_zero():
    with pytest.raises(FbmError, match="start at 0"):
        GaussPath(TimeGrid(2), np.array([1.0, 0.0, 0.0]), 0.5, PathKind.FBM)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def test_single_step_is_standard_normal():
    paths = sample_fbm_paths(TimeGrid(1), 0.5, 100_000, np.random.default_rng(1))
    assert np.all(paths[:, 0] == 0.0)
    assert np.var(paths[:, 1]) == pytest.approx(1.0, abs=0.02)


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_cholesky_covariance_matches_entrywise(H):
    grid = TimeGrid(64)
    trials = 20_000
    paths = sample_fbm_paths(grid, H, trials, np.random.default_rng(42))[:, 1:]
    target = covariance_matrix(grid, H)
    empirical = paths.T @ paths / trials
    diag = np.diag(target)
    se = np.sqrt((np.outer(diag, diag) + target ** 2) / trials)
    assert np.all(np.abs(empirical - target) <= 5 * se)


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_circulant_agrees_with_cholesky(H):
    grid = TimeGrid(64)
    chol = sample_fbm_paths(grid, H, 4000, np.random.default_rng(7), "cholesky")
    circ = sample_fbm_paths(grid, H, 4000, np.random.default_rng(7), "circulant")
    assert np.var(circ[:, -1]) == pytest.approx(1.0, abs=0.1)
    _, p = ks_two_sample(chol[:, -1], circ[:, -1])
    assert p > 0.01


def test_same_seed_same_path():
    a = sample_fbm(TimeGrid(32), 0.7, np.random.default_rng(9), "circulant")
    b = sample_fbm(TimeGrid(32), 0.7, np.random.default_rng(9), "circulant")
    assert np.array_equal(a.values, b.values)
    assert a.kind is PathKind.FBM


def test_cholesky_size_limit():
    with pytest.raises(FbmError, match="circulant"):
        sample_fbm_paths(TimeGrid(CHOLESKY_MAX_N + 1), 0.5, 1, np.random.default_rng(0))


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_increments_are_stationary(H):
    grid = TimeGrid(64)
    paths = sample_fbm_paths(grid, H, 20_000, np.random.default_rng(5))
    for delta in (1 / 64, 1 / 8):
        for t in (0.0, 0.5):
            lo, hi = grid.index(t), grid.index(t + delta)
            inc = paths[:, hi] - paths[:, lo]
            se = standard_error_of_variance(inc)
            assert abs(np.var(inc) - delta ** (2 * H)) <= 5 * se
