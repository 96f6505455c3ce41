"""Coefficient sequences {a_k} of the linear process and their exact variances.

Usage:
    k = make_fractional_kernel(0.7)            # K chosen by the truncation rule
    var_partial_sum(k, 1024)                   # exact Var(S_1024)
    h_of(k, 1024)                              # sqrt(Var(S_n)) / n**H
    estimate_hurst_slope(k, [64, 128, 256])    # empirical Hurst index

A kernel is a finite window of coefficients a_{k_min}, ..., a_{k_max}; all
coefficients outside the window are zero, so every variance below is an
exact finite sum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from mawalk.core import DomainError

#: Default relative bound on the discarded tail sum_{k>K} a_k**2.
DEFAULT_TAIL_TOLERANCE = 1e-6

#: Largest window the default truncation rule will build.
DEFAULT_MAX_K = 2 ** 20

_MIN_K = 2 ** 4


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------

class KernelError(Exception):
    """Base exception for kernel construction and analysis."""


class TruncationError(KernelError):
    """Raised when the requested window violates the truncation rule."""


class DegenerateKernelError(KernelError):
    """Raised when Var(S_n) vanishes and no normalisation exists."""


class InsufficientDataError(KernelError):
    """Raised when a regression gets too few points."""


class TruncationWarning(UserWarning):
    """Emitted when the default window is capped before reaching the tolerance."""


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Kernel:
    """Finite window of coefficients a_k, k in [k_min, k_max]."""

    coeffs: np.ndarray
    target_hurst: float
    k_min: int = 0
    truncation_tail_bound: float = 0.0
    kind: str = "explicit"
    two_sided: bool = False
    _prefix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise KernelError("kernel coefficients must be a non-empty 1-D array")
        if not np.all(np.isfinite(coeffs)):
            raise KernelError("kernel coefficients must be finite")
        if not 0.0 < self.target_hurst < 1.0:
            raise DomainError(f"Hurst index must lie in (0, 1), got {self.target_hurst}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        if self.sum_sq <= 0:
            raise DegenerateKernelError("kernel has sum of squares 0")
        prefix = np.cumsum(coeffs)
        prefix.setflags(write=False)
        object.__setattr__(self, "_prefix", prefix)

    @property
    def k_max(self) -> int:
        return self.k_min + self.coeffs.size - 1

    @property
    def width(self) -> int:
        return self.coeffs.size

    @property
    def sum_sq(self) -> float:
        return float(np.dot(self.coeffs, self.coeffs))

    def coefficient(self, k: int) -> float:
        if self.k_min <= k <= self.k_max:
            return float(self.coeffs[k - self.k_min])
        return 0.0

    def prefix(self, x) -> np.ndarray:
        """P(x) = sum_{j <= x} a_j for integer array ``x``."""
        idx = np.asarray(x, dtype=np.int64) - self.k_min
        out = self._prefix[np.clip(idx, 0, self.width - 1)]
        return np.where(idx < 0, 0.0, out)

    def innovation_range(self, n: int) -> tuple[int, int]:
        """Indices m with a nonzero weight in S_1..S_n: [1 - k_max, n - k_min]."""
        return 1 - self.k_max, n - self.k_min

    def shifted(self, c: int) -> "Kernel":
        """The translated kernel a_k -> a_{k-c}."""
        return Kernel(self.coeffs, self.target_hurst, self.k_min + c,
                      self.truncation_tail_bound, self.kind, self.two_sided)

    def to_dict(self) -> dict:
        out: dict = {"type": self.kind, "hurst": self.target_hurst}
        if self.kind == "fractional":
            out["K"] = self.k_max
            out["two_sided"] = self.two_sided
            out["allow_truncation"] = True
        elif self.kind == "explicit":
            out["coeffs"] = [float(a) for a in self.coeffs]
            out["k_min"] = self.k_min
        return out


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def make_iid_kernel(hurst: float = 0.5) -> Kernel:
    """The i.i.d. kernel a_0 = 1, optionally declared with another H."""
    return Kernel(np.array([1.0]), hurst, 0, 0.0, "iid")


def make_explicit_kernel(coeffs, hurst: float, k_min: int = 0) -> Kernel:
    return Kernel(np.asarray(coeffs, dtype=float), hurst, int(k_min), 0.0, "explicit")


def _fractional_coeffs(d: float, K: int) -> np.ndarray:
    # psi_0 = 1, psi_k = psi_{k-1} (k - 1 + d) / k
    k = np.arange(1, K + 1, dtype=float)
    return np.concatenate([[1.0], np.cumprod((k - 1.0 + d) / k)])


def _tail_estimate(psi_K: float, K: int, d: float) -> float:
    # psi_k ~ c k**(d-1); sum_{k>K} psi_k**2 ~ c**2 K**(2d-1) / (1-2d)
    return psi_K ** 2 * K / (1.0 - 2.0 * d)


def make_fractional_kernel(
    H: float,
    K: int | None = None,
    *,
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
    allow_truncation: bool = False,
    max_K: int = DEFAULT_MAX_K,
    two_sided: bool = False,
) -> Kernel:
    """Fractional-difference kernel psi_k = Gamma(k+d) / (Gamma(d) Gamma(k+1)), d = H - 1/2.

    Without ``K`` the window is the smallest power of two whose estimated
    tail is at most ``tail_tolerance`` times the retained sum of squares,
    capped at ``max_K`` (a ``TruncationWarning`` reports the cap). An
    explicit ``K`` violating the tolerance raises ``TruncationError`` unless
    ``allow_truncation`` is set.

    ``two_sided`` mirrors the kernel: a_k = (psi_k + psi_{-k}) / sqrt(2)
    on [-K, K].
    """
    if not 0.0 < H < 1.0:
        raise DomainError(f"Hurst index must lie in (0, 1), got {H}")
    if K is not None and K < 1:
        raise DomainError(f"window size K must be >= 1, got {K}")

    if H == 0.5:
        return Kernel(np.array([1.0]), 0.5, 0, 0.0, "iid")

    d = H - 0.5
    explicit_K = K is not None
    if not explicit_K:
        psi = _fractional_coeffs(d, max_K)
        sq = np.cumsum(psi ** 2)
        chosen = None
        size = _MIN_K
        while size <= max_K:
            if _tail_estimate(psi[size], size, d) <= tail_tolerance * sq[size]:
                chosen = size
                break
            size *= 2
        if chosen is None:
            chosen = max_K
            ratio = _tail_estimate(psi[chosen], chosen, d) / sq[chosen]
            warnings.warn(
                f"Fractional kernel H={H}: window capped at K={chosen} with relative "
                f"tail {ratio:.2e} > tolerance {tail_tolerance:.0e}. "
                "Pass an explicit K with allow_truncation to silence this.",
                TruncationWarning,
                stacklevel=2,
            )
        K = chosen
        psi = psi[: K + 1]
    else:
        psi = _fractional_coeffs(d, K)

    tail = _tail_estimate(psi[-1], K, d)
    if explicit_K and not allow_truncation and tail > tail_tolerance * float(np.dot(psi, psi)):
        raise TruncationError(
            f"K={K} leaves an estimated tail {tail:.3e} above "
            f"{tail_tolerance:.0e} x sum of squares; increase K or set allow_truncation"
        )

    if two_sided:
        # both discarded tails carry half the squares each
        coeffs = np.concatenate([psi[:0:-1], [2.0 * psi[0]], psi[1:]]) / math.sqrt(2.0)
        return Kernel(coeffs, H, -K, tail, "fractional", True)
    return Kernel(psi, H, 0, tail, "fractional")


# ---------------------------------------------------------------------------
# Exact variances
# ---------------------------------------------------------------------------

def window_sums(k: Kernel, length: int, m) -> np.ndarray:
    """Weights of xi_m in S_length: sum_{t=1}^{length} a_{t-m} = P(length-m) - P(-m)."""
    m = np.asarray(m, dtype=np.int64)
    if length <= 0:
        return np.zeros(m.shape)
    return k.prefix(length - m) - k.prefix(-m)


def partial_sum_weights(k: Kernel, length: int, n: int) -> np.ndarray:
    """Weights of S_length on the innovation range of S_1..S_n."""
    lo, hi = k.innovation_range(n)
    return window_sums(k, length, np.arange(lo, hi + 1))


def var_partial_sum(k: Kernel, n: int) -> float:
    """Exact Var(S_n) = sum_m (a_{1-m} + ... + a_{n-m})**2; Var(S_0) = 0."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n == 0:
        return 0.0
    w = partial_sum_weights(k, n, n)
    return float(np.dot(w, w))


def h_of(k: Kernel, n: int) -> float:
    """h(n) = sqrt(Var(S_n)) / n**H, so Var(S_n) = h(n)**2 n**(2H) exactly."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    var = var_partial_sum(k, n)
    if var <= 0:
        raise DegenerateKernelError(f"Var(S_{n}) = 0; kernel cannot be normalised")
    return math.sqrt(var) / n ** k.target_hurst


def estimate_hurst_slope(k: Kernel, n_values) -> float:
    """Half the least-squares slope of log Var(S_n) against log n."""
    ns = [int(n) for n in n_values]
    if len(ns) < 3:
        raise InsufficientDataError(f"need at least 3 values of n, got {len(ns)}")
    if any(n < 2 for n in ns):
        raise DomainError("all n values must be >= 2")
    variances = np.array([var_partial_sum(k, n) for n in ns])
    if np.any(variances <= 0):
        raise DegenerateKernelError("Var(S_n) vanishes for some n")
    slope, _ = np.polyfit(np.log(ns), np.log(variances), 1)
    return float(slope) / 2.0


def autocovariance(k: Kernel, lag: int) -> float:
    """gamma(lag) = sum_j a_j a_{j+lag} (covariance of X_0 and X_lag)."""
    lag = abs(int(lag))
    if lag >= k.width:
        return 0.0
    return float(np.dot(k.coeffs[: k.width - lag], k.coeffs[lag:]))


# ---------------------------------------------------------------------------
# Window-sum bound
# ---------------------------------------------------------------------------

def max_window_sum(k: Kernel, n: int) -> float:
    """max_j |a_{j+1} + ... + a_{j+n}| over all windows of length n."""
    return float(np.max(np.abs(partial_sum_weights(k, n, n))))


def window_sum_bound(k: Kernel, n: int) -> float:
    """Upper bound (4 sqrt(V) sum a**2 (1 + 1/(2 sqrt(V))))**(1/2), V = Var(S_n)."""
    root = math.sqrt(var_partial_sum(k, n))
    if root == 0:
        raise DegenerateKernelError(f"Var(S_{n}) = 0")
    return math.sqrt(4.0 * root * k.sum_sq * (1.0 + 1.0 / (2.0 * root)))
