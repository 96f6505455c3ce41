"""Fractional Brownian motion: exact covariance and path sampling on uniform grids.

Usage:
    grid = TimeGrid(1024)
    path = sample_fbm(grid, 0.7, rng)                          # exact Cholesky
    batch = sample_fbm_paths(grid, 0.7, 2000, rng, "circulant") # (2000, 1025)

Two samplers are provided and cross-checked in the tests:

* ``cholesky``  exact factorisation of the n x n covariance (n <= 4096),
  with up to 1e-10 diagonal jitter before giving up.
* ``circulant`` circulant embedding of the increment covariance, sampled
  with one FFT per path; fails loudly if the embedding is not
  non-negative definite.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from mawalk.core import DomainError

#: Largest grid the Cholesky sampler accepts.
CHOLESKY_MAX_N = 4096

_JITTERS = (1e-12, 1e-11, 1e-10)
_EMBEDDING_TOLERANCE = 1e-8


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------

class FbmError(Exception):
    """Base exception for fBm sampling."""


class CovarianceError(FbmError):
    """Raised when the covariance matrix is not positive definite after jitter."""

    def __init__(self, message: str, eigenvalue: float) -> None:
        super().__init__(message)
        self.eigenvalue = eigenvalue


class EmbeddingError(FbmError):
    """Raised when the circulant embedding has a significantly negative eigenvalue."""

    def __init__(self, message: str, min_eigenvalue: float, max_eigenvalue: float) -> None:
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.max_eigenvalue = max_eigenvalue


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class SamplingMethod(str, Enum):
    CHOLESKY = "cholesky"
    CIRCULANT = "circulant"


class PathKind(str, Enum):
    FBM = "fbm"
    Z_PROCESS = "z_process"
    S_N = "s_n"
    R_N = "r_n"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i / n, i = 0..n."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"grid needs at least one step, got n={self.n}")

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    def index(self, t: float) -> int:
        """[n t], the grid index holding the value at time t."""
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"time must lie in [0, 1], got {t}")
        return int(np.floor(self.n * t + 1e-12 * self.n))


@dataclass(frozen=True, eq=False)
class GaussPath:
    """A sampled process on a uniform grid, values[i] at t_i = i / n."""

    grid: TimeGrid
    values: np.ndarray
    hurst: float
    kind: PathKind

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n + 1,):
            raise FbmError(
                f"path has {values.shape} values, grid needs ({self.grid.n + 1},)"
            )
        if values[0] != 0.0:
            raise FbmError(f"{self.kind.value} path must start at 0, got {values[0]}")
        object.__setattr__(self, "values", values)

    def at(self, t: float) -> float:
        return float(self.values[self.grid.index(t)])


# ---------------------------------------------------------------------------
# Covariance
# ---------------------------------------------------------------------------

def _check_hurst(H: float) -> None:
    if not 0.0 < H < 1.0:
        raise DomainError(f"Hurst index must lie in (0, 1), got {H}")


def fbm_cov(t, s, H: float):
    """R(t, s) = (t**2H + s**2H - |t - s|**2H) / 2 for scalars or arrays."""
    _check_hurst(H)
    t_arr = np.asarray(t, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    if np.any(t_arr < 0) or np.any(s_arr < 0):
        raise DomainError("fBm covariance is defined for t, s >= 0")
    two_h = 2.0 * H
    out = 0.5 * (t_arr ** two_h + s_arr ** two_h - np.abs(t_arr - s_arr) ** two_h)
    return float(out) if out.ndim == 0 else out


def covariance_matrix(grid: TimeGrid, H: float) -> np.ndarray:
    """Covariance of (B_H(t_1), ..., B_H(t_n)); t_0 = 0 is omitted."""
    t = grid.points[1:]
    return fbm_cov(t[:, None], t[None, :], H)


@functools.lru_cache(maxsize=16)
def _cholesky_factor(n: int, H: float) -> np.ndarray:
    cov = covariance_matrix(TimeGrid(n), H)
    try:
        factor = scipy.linalg.cholesky(cov, lower=True)
    except scipy.linalg.LinAlgError:
        factor = None
        for jitter in _JITTERS:
            try:
                factor = scipy.linalg.cholesky(cov + jitter * np.eye(n), lower=True)
            except scipy.linalg.LinAlgError:
                continue
            warnings.warn(
                f"fBm covariance (n={n}, H={H}) needed diagonal jitter {jitter:.0e}",
                UserWarning,
                stacklevel=3,
            )
            break
        if factor is None:
            smallest = float(np.linalg.eigvalsh(cov)[0])
            raise CovarianceError(
                f"fBm covariance (n={n}, H={H}) is not positive definite; "
                f"smallest eigenvalue {smallest:.3e}",
                smallest,
            ) from None
    factor.setflags(write=False)
    return factor


def increment_autocovariance(k, H: float) -> np.ndarray:
    """Covariance of unit-step fBm increments at lag k (fractional Gaussian noise)."""
    k = np.abs(np.asarray(k, dtype=float))
    two_h = 2.0 * H
    return 0.5 * ((k + 1.0) ** two_h + np.abs(k - 1.0) ** two_h - 2.0 * k ** two_h)


@functools.lru_cache(maxsize=16)
def _embedding_eigenvalues(n: int, H: float) -> np.ndarray:
    gamma = increment_autocovariance(np.arange(n + 1), H)
    row = np.concatenate([gamma, gamma[n - 1:0:-1]])
    eig = np.fft.fft(row).real
    lo, hi = float(eig.min()), float(eig.max())
    if lo < -_EMBEDDING_TOLERANCE * hi:
        raise EmbeddingError(
            f"circulant embedding for n={n}, H={H} has eigenvalue {lo:.3e} "
            f"(max {hi:.3e}); use the cholesky method",
            lo,
            hi,
        )
    eig = np.clip(eig, 0.0, None)
    eig.setflags(write=False)
    return eig


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_fbm_paths(
    grid: TimeGrid,
    H: float,
    trials: int,
    rng: np.random.Generator,
    method: SamplingMethod | str = SamplingMethod.CHOLESKY,
) -> np.ndarray:
    """Return a (trials, n + 1) array of fBm paths, column 0 identically zero."""
    _check_hurst(H)
    method = SamplingMethod(method)
    n = grid.n
    out = np.zeros((trials, n + 1))

    if method is SamplingMethod.CHOLESKY:
        if n > CHOLESKY_MAX_N:
            raise FbmError(
                f"cholesky sampling is limited to n <= {CHOLESKY_MAX_N}, got n={n}; "
                "use the circulant method"
            )
        factor = _cholesky_factor(n, H)
        z = rng.standard_normal((trials, n))
        out[:, 1:] = z @ factor.T
        return out

    eig = _embedding_eigenvalues(n, H)
    size = eig.size
    z = rng.standard_normal((trials, size)) + 1j * rng.standard_normal((trials, size))
    w = np.fft.fft(np.sqrt(eig / size) * z, axis=1)
    increments = w.real[:, :n] * float(n) ** (-H)
    out[:, 1:] = np.cumsum(increments, axis=1)
    return out


def sample_fbm(
    grid: TimeGrid,
    H: float,
    rng: np.random.Generator,
    method: SamplingMethod | str = SamplingMethod.CHOLESKY,
) -> GaussPath:
    """One exact fBm path on ``grid``."""
    values = sample_fbm_paths(grid, H, 1, rng, method)[0]
    return GaussPath(grid, values, H, PathKind.FBM)
