"""Linear process X_j, partial sums S_n, the moving average v_k and the walk R_n.

Usage:
    model = InnovationModel("gaussian")
    walk = simulate_walk(kernel, memory, model, n=1024, rng=rng)
    walk.s_path.values      # s_n(i/n) = S_i / sqrt(Var(S_n))
    walk.r_path.values      # r_n(i/n) = R_i / (h(n) n**H M(n))
    exact_var_R(kernel, memory, 1024)

Index conventions: X_j = sum_k a_{j-k} xi_k; S_i = X_1 + ... + X_i;
v_0 = 0, v_k = sum_{i<k} X_{k-i} dM(i); R_i = v_0 + ... + v_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np

from mawalk.core import DomainError, MemoryFunction, delta_memory_array, eval_memory
from mawalk.fbm import GaussPath, PathKind, TimeGrid
from mawalk.kernels import Kernel, var_partial_sum
from mawalk.streams import run_trials

#: Multiply-add count above which convolutions go through the FFT.
DIRECT_CONVOLUTION_LIMIT = 10 ** 7

#: Declared moment order of Student-t innovations is df minus this margin.
STUDENT_T_MOMENT_MARGIN = 1e-6

_CONSISTENCY_TOLERANCE = 1e-10


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------

class LinprocError(Exception):
    """Base exception for linear-process simulation."""


class CoverageError(LinprocError):
    """Raised when an indexed array does not cover the indices a computation needs."""


class ConsistencyError(LinprocError):
    """Raised when two algebraically equal forms of R_n disagree."""


class DegenerateWalkError(LinprocError):
    """Raised when a normalising constant vanishes."""


# ---------------------------------------------------------------------------
# Innovations
# ---------------------------------------------------------------------------

class InnovationLaw(str, Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    STUDENT_T = "student_t"
    ZERO = "zero"


@dataclass(frozen=True)
class InnovationModel:
    """Law of the i.i.d. driver xi_k: zero mean, unit variance.

    ``zero`` is a debug law (all draws 0) used to anchor degenerate cases.
    """

    law: InnovationLaw
    df: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "law", InnovationLaw(self.law))
        if self.law is InnovationLaw.STUDENT_T:
            if self.df is None or not self.df > 2.0 + STUDENT_T_MOMENT_MARGIN:
                raise DomainError(
                    f"student_t innovations need df > 2 (finite variance), got df={self.df}"
                )
        elif self.df is not None:
            raise DomainError(f"df only applies to student_t innovations, not {self.law.value}")

    @property
    def moment_order_alpha(self) -> float:
        if self.law is InnovationLaw.STUDENT_T:
            return self.df - STUDENT_T_MOMENT_MARGIN
        return math.inf

    def admits_hurst(self, H: float) -> bool:
        """The moment condition alpha * H > 1."""
        return self.moment_order_alpha * H > 1.0

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.law is InnovationLaw.GAUSSIAN:
            return rng.standard_normal(size)
        if self.law is InnovationLaw.RADEMACHER:
            return 2.0 * rng.integers(0, 2, size=size) - 1.0
        if self.law is InnovationLaw.STUDENT_T:
            return rng.standard_t(self.df, size=size) * math.sqrt((self.df - 2.0) / self.df)
        return np.zeros(size)

    def to_dict(self) -> dict:
        out: dict = {"law": self.law.value}
        if self.df is not None:
            out["df"] = self.df
        return out


@dataclass(frozen=True, eq=False)
class IndexedArray:
    """values[i] holds the element with integer index ``start + i``."""

    start: int
    values: np.ndarray

    @property
    def stop(self) -> int:
        """Last covered index (inclusive)."""
        return self.start + len(self.values) - 1

    def segment(self, lo: int, hi: int) -> np.ndarray:
        if lo < self.start or hi > self.stop:
            raise CoverageError(
                f"indices [{lo}, {hi}] requested, array covers [{self.start}, {self.stop}]"
            )
        return self.values[lo - self.start: hi - self.start + 1]

    def at(self, i: int) -> float:
        return float(self.segment(i, i)[0])

    def scaled(self, factor: float) -> "IndexedArray":
        return IndexedArray(self.start, self.values * factor)


def sample_innovations(
    model: InnovationModel, lo: int, hi: int, rng: np.random.Generator
) -> IndexedArray:
    """i.i.d. draws xi_lo, ..., xi_hi."""
    if hi < lo:
        raise DomainError(f"empty innovation range [{lo}, {hi}]")
    return IndexedArray(lo, model.sample(rng, hi - lo + 1))


# ---------------------------------------------------------------------------
# Convolution
# ---------------------------------------------------------------------------

def convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Full linear convolution; direct sum when small, FFT otherwise."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or y.size == 0:
        return np.zeros(0)
    if x.size * y.size <= DIRECT_CONVOLUTION_LIMIT:
        return np.convolve(x, y)
    length = x.size + y.size - 1
    size = 1 << (length - 1).bit_length()
    out = np.fft.irfft(np.fft.rfft(x, size) * np.fft.rfft(y, size), size)
    return out[:length]


# ---------------------------------------------------------------------------
# Linear process and partial sums
# ---------------------------------------------------------------------------

def sample_linear_process(k: Kernel, innovations: IndexedArray, lo: int, hi: int) -> IndexedArray:
    """X_j = sum_k a_{j-k} xi_k for j in [lo, hi]; no zero-padding of missing xi."""
    xi = innovations.segment(lo - k.k_max, hi - k.k_min)
    full = convolve(xi, k.coeffs)
    return IndexedArray(lo, full[k.width - 1: k.width - 1 + hi - lo + 1])


def s_n_path(X: IndexedArray, k: Kernel, n: int) -> GaussPath:
    """s_n(i/n) = (X_1 + ... + X_i) / sqrt(Var(S_n))."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    var = var_partial_sum(k, n)
    if var <= 0:
        raise DegenerateWalkError(f"Var(S_{n}) = 0")
    partial = np.concatenate([[0.0], np.cumsum(X.segment(1, n))])
    return GaussPath(TimeGrid(n), partial / math.sqrt(var), k.target_hurst, PathKind.S_N)


def v_sequence(X: IndexedArray, M: MemoryFunction, n: int) -> np.ndarray:
    """v_0 = 0, v_k = sum_{i=0}^{k-1} X_{k-i} dM(i) for k = 1..n."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    x = X.segment(1, n)
    full = convolve(x, delta_memory_array(M, n))
    return np.concatenate([[0.0], full[:n]])


def r_n_path(
    v: np.ndarray,
    k: Kernel,
    M: MemoryFunction,
    n: int,
    partial_sums: np.ndarray | None = None,
) -> GaussPath:
    """r_n(i/n) = R_i / (h(n) n**H M(n)) with R_i = v_0 + ... + v_i.

    When ``partial_sums`` (S_0..S_n) is given, R is also rebuilt in the
    reordered form R_i = sum_{j<=i} S_{i-j} dM(j) and the two must agree.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (n + 1,):
        raise CoverageError(f"v must hold v_0..v_{n}, got shape {v.shape}")
    walk = np.cumsum(v)
    if partial_sums is not None:
        reordered = convolve(np.asarray(partial_sums, dtype=float),
                             delta_memory_array(M, n + 1))[: n + 1]
        scale = max(float(np.max(np.abs(walk))), float(np.max(np.abs(reordered))))
        gap = float(np.max(np.abs(walk - reordered)))
        if gap > _CONSISTENCY_TOLERANCE * scale:
            raise ConsistencyError(
                f"R_n and its reordered form differ by {gap:.3e} (scale {scale:.3e})"
            )
    m_n = eval_memory(M, n)
    if m_n == 0:
        raise DegenerateWalkError(f"M({n}) = 0")
    var = var_partial_sum(k, n)
    if var <= 0:
        raise DegenerateWalkError(f"Var(S_{n}) = 0")
    return GaussPath(TimeGrid(n), walk / (math.sqrt(var) * m_n), k.target_hurst, PathKind.R_N)


# ---------------------------------------------------------------------------
# Whole walks
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WalkSample:
    s_path: GaussPath
    r_path: GaussPath
    partial_sums: np.ndarray
    walk: np.ndarray
    config: dict[str, Any] = field(default_factory=dict)
    innovations: IndexedArray | None = None


def simulate_walk(
    k: Kernel,
    M: MemoryFunction,
    model: InnovationModel,
    n: int,
    rng: np.random.Generator,
    *,
    keep_innovations: bool = False,
) -> WalkSample:
    """Draw innovations, build X_1..X_n and return both normalised paths."""
    lo, hi = k.innovation_range(n)
    xi = sample_innovations(model, lo, hi, rng)
    X = sample_linear_process(k, xi, 1, n)
    s_path = s_n_path(X, k, n)
    partial = np.concatenate([[0.0], np.cumsum(X.values)])
    v = v_sequence(X, M, n)
    r_path = r_n_path(v, k, M, n, partial_sums=partial)
    return WalkSample(
        s_path=s_path,
        r_path=r_path,
        partial_sums=partial,
        walk=np.cumsum(v),
        config={"kernel": k.to_dict(), "memory": M.to_dict(),
                "innovation": model.to_dict(), "n": n},
        innovations=xi if keep_innovations else None,
    )


def simulate_walks(
    k: Kernel,
    M: MemoryFunction,
    model: InnovationModel,
    n: int,
    trials: int,
    master_seed: int,
    stream: str,
    workers: int = 1,
    reduce: Callable[[WalkSample], Any] | None = None,
    *,
    keep_innovations: bool = False,
) -> list:
    """Run ``trials`` independent walks; ``reduce`` maps each sample to what is kept."""

    def _one(rng: np.random.Generator, trial: int):
        sample = simulate_walk(k, M, model, n, rng, keep_innovations=keep_innovations)
        return reduce(sample) if reduce is not None else sample

    return run_trials(_one, trials, master_seed, stream, workers)


# ---------------------------------------------------------------------------
# Exact variance of R_n
# ---------------------------------------------------------------------------

def walk_weights(k: Kernel, M: MemoryFunction, n: int) -> np.ndarray:
    """Coefficients c_m of R_n = sum_m c_m xi_m over m in [1 - k_max, n - k_min].

    R_n = sum_t X_t (M(n-t+1) - M(0)), so c_m = sum_t (M(n-t+1) - M(0)) a_{t-m}.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    m_vals = eval_memory(M, np.arange(n, 0, -1, dtype=float))
    b = m_vals - eval_memory(M, 0.0)
    return convolve(b, k.coeffs[::-1])


def exact_var_R(k: Kernel, M: MemoryFunction, n: int) -> float:
    """Var(R_n) = sum_m c_m**2, no sampling."""
    c = walk_weights(k, M, n)
    return float(np.dot(c, c))
