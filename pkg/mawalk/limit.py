"""The limit process Z_{nu,H}(t) = nu * int_0^t B_H(t - s) s**(nu-1) ds.

Usage:
    spec = ZProcessSpec(nu=2.0, hurst=0.7, quadrature_grid=4096)
    z = sample_Z(fbm_path, spec, [0.25, 0.5, 1.0])
    var_Z_one(2.0, 0.7, 512)          # Var(Z(1)) by quadrature
    limit_factor_nu0(memory)          # 1 - M(0) / M(+inf) for nu = 0

Both the path functional and the variance use the substitution u = s**nu,
which turns the integral into int_0^{t**nu} B_H(t - u**(1/nu)) du and removes
the s**(nu-1) singularity for nu < 1.
"""

from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mawalk.core import DomainError, MemoryFunction, eval_memory, memory_at_infinity
from mawalk.fbm import GaussPath, fbm_cov

#: Fine grid used for sample_Z when nothing else is configured.
DEFAULT_QUADRATURE_GRID = 4096

#: Tensor grid used for var_Z_one when nothing else is configured.
DEFAULT_VARIANCE_GRID = 512

_MIN_QUADRATURE_GRID = 256
_MIN_VARIANCE_GRID = 64


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------

class LimitError(Exception):
    """Base exception for limit-process computations."""


class QuadratureError(LimitError):
    """Raised when the quadrature produces a non-finite value."""


class GridMismatchError(LimitError):
    """Raised when an fBm path does not match the Z-process configuration."""


class WrongBranchError(LimitError):
    """Raised when a nu = 0 operation meets nu > 0 or the reverse."""


class DegenerateFactorWarning(UserWarning):
    """Emitted when the nu = 0 limit factor vanishes (M(0) = M(+inf))."""


# ---------------------------------------------------------------------------
# Z process
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZProcessSpec:
    nu: float
    hurst: float
    quadrature_grid: int = DEFAULT_QUADRATURE_GRID

    def __post_init__(self) -> None:
        if not self.nu > 0:
            raise WrongBranchError(
                f"Z process needs nu > 0, got {self.nu}; use limit_factor_nu0 for nu = 0"
            )
        if not 0.0 < self.hurst < 1.0:
            raise DomainError(f"Hurst index must lie in (0, 1), got {self.hurst}")
        if self.quadrature_grid < _MIN_QUADRATURE_GRID:
            raise DomainError(
                f"quadrature grid must be >= {_MIN_QUADRATURE_GRID}, got {self.quadrature_grid}"
            )


@functools.lru_cache(maxsize=32)
def _z_weights(m: int, nu: float, eval_points: tuple[float, ...]) -> np.ndarray:
    # Column j maps a path sampled on i/m, i = 0..m, to Z(eval_points[j]).
    weights = np.zeros((m + 1, len(eval_points)))
    mid = (np.arange(m) + 0.5) / m
    for col, t in enumerate(eval_points):
        if t == 0.0:
            continue
        upper = t ** nu
        x = t - (mid * upper) ** (1.0 / nu)
        pos = np.clip(x, 0.0, 1.0) * m
        left = np.minimum(np.floor(pos).astype(np.int64), m - 1)
        frac = pos - left
        column = np.bincount(left, weights=1.0 - frac, minlength=m + 1)
        column += np.bincount(left + 1, weights=frac, minlength=m + 1)
        weights[:, col] = column * (upper / m)
    weights.setflags(write=False)
    return weights


def _check_eval_points(eval_points) -> tuple[float, ...]:
    points = tuple(float(t) for t in eval_points)
    for t in points:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"evaluation time must lie in [0, 1], got {t}")
    return points


def sample_Z_batch(paths: np.ndarray, spec: ZProcessSpec, eval_points) -> np.ndarray:
    """Z at ``eval_points`` for each row of a (trials, m + 1) array of fBm paths."""
    paths = np.atleast_2d(np.asarray(paths, dtype=float))
    if paths.shape[1] != spec.quadrature_grid + 1:
        raise GridMismatchError(
            f"paths have {paths.shape[1] - 1} steps, spec expects {spec.quadrature_grid}"
        )
    points = _check_eval_points(eval_points)
    return paths @ _z_weights(spec.quadrature_grid, float(spec.nu), points)


def sample_Z(b: GaussPath, spec: ZProcessSpec, eval_points) -> np.ndarray:
    """Z(t) for each t in ``eval_points``, midpoint rule with linear interpolation of b."""
    if b.hurst != spec.hurst:
        raise GridMismatchError(f"path has H={b.hurst}, spec expects H={spec.hurst}")
    if b.grid.n != spec.quadrature_grid:
        raise GridMismatchError(
            f"path grid has n={b.grid.n}, spec expects m={spec.quadrature_grid}"
        )
    return sample_Z_batch(b.values[None, :], spec, eval_points)[0]


# ---------------------------------------------------------------------------
# Variance at t = 1
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def var_Z_one(nu: float, H: float, quad_n: int = DEFAULT_VARIANCE_GRID) -> float:
    """Var(Z_{nu,H}(1)) by a tensor midpoint rule on quad_n**2 cells."""
    if not nu > 0:
        raise WrongBranchError(f"var_Z_one needs nu > 0, got {nu}")
    if not 0.0 < H < 1.0:
        raise DomainError(f"Hurst index must lie in (0, 1), got {H}")
    if quad_n < _MIN_VARIANCE_GRID:
        raise DomainError(f"quad_n must be >= {_MIN_VARIANCE_GRID}, got {quad_n}")
    with np.errstate(all="ignore"):
        mid = (np.arange(quad_n) + 0.5) / quad_n
        tau = 1.0 - mid ** (1.0 / nu)
        value = float(np.mean(fbm_cov(tau[:, None], tau[None, :], H)))
    if not math.isfinite(value) or value <= 0:
        raise QuadratureError(
            f"quadrature for Var(Z(1)) failed (nu={nu}, H={H}, quad_n={quad_n}): {value}"
        )
    return value


def limit_variance(nu: float, H: float, quad_n: int = DEFAULT_VARIANCE_GRID,
                   cache: "VarZCache | None" = None) -> float:
    """Var(Z_{nu,H}(1)): the closed form 1 / (2H + 2) at nu = 1, quadrature otherwise."""
    if nu == 1:
        return 1.0 / (2.0 * H + 2.0)
    if cache is not None:
        return cache.get(nu, H, quad_n)
    return var_Z_one(nu, H, quad_n)


# ---------------------------------------------------------------------------
# nu = 0
# ---------------------------------------------------------------------------

def limit_factor_nu0(M: MemoryFunction) -> float:
    """1 - M(0) / M(+inf); 1 when M(+inf) is infinite."""
    if M.nu > 0:
        raise WrongBranchError(
            f"limit_factor_nu0 applies to nu = 0 only, got nu={M.nu} (use the Z process)"
        )
    at_inf = memory_at_infinity(M)
    if math.isinf(at_inf):
        return 1.0
    factor = 1.0 - eval_memory(M, 0.0) / at_inf
    if factor == 0.0:
        warnings.warn(
            "limit factor 1 - M(0)/M(+inf) is 0: the scaled limit vanishes",
            DegenerateFactorWarning,
            stacklevel=2,
        )
    return factor


# ---------------------------------------------------------------------------
# On-disk cache for var_Z_one
# ---------------------------------------------------------------------------

class VarZCache:
    """CSV table of var_Z_one results keyed by (nu, H, quad_n)."""

    HEADER = ("nu", "H", "quad_n", "value")

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._table: dict[tuple[float, float, int], float] = {}
        if self.path.exists():
            with self.path.open(newline="", encoding="utf-8") as f:
                for row in csv.DictReader(f):
                    key = (float(row["nu"]), float(row["H"]), int(row["quad_n"]))
                    self._table[key] = float(row["value"])

    def __len__(self) -> int:
        return len(self._table)

    def get(self, nu: float, H: float, quad_n: int = DEFAULT_VARIANCE_GRID) -> float:
        key = (float(nu), float(H), int(quad_n))
        if key not in self._table:
            self._table[key] = var_Z_one(*key)
            self._save()
        return self._table[key]

    def _save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self.HEADER)
            for (nu, H, quad_n), value in sorted(self._table.items()):
                writer.writerow([repr(nu), repr(H), quad_n, repr(value)])
