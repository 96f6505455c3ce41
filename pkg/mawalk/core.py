"""Regular-variation toolkit: slowly varying functions and memory functions.

Usage:
    l = SlowlyVarying.bounded_rational(c_inf=2.0, b=1.0)
    M = MemoryFunction(nu=0.0, l=l)
    eval_memory(M, 3.0)          # l(3) * 3**0
    delta_memory(M, 0)           # M(1) - M(0)
    memory_at_infinity(M)        # 2.0

A memory function is M(t) = l(t) * t**nu with the convention 0**0 = 1, where
l is non-negative, non-decreasing and slowly varying at +infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Grid used for the monotonicity / non-negativity checks of l.
_CHECK_GRID = np.concatenate([
    np.linspace(0.0, 10.0, 201),
    np.logspace(1.0, 9.0, 161),
])


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------

class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class DegenerateInputError(ValueError):
    """Raised when an input makes the requested quantity undefined."""


# ---------------------------------------------------------------------------
# Slowly varying functions
# ---------------------------------------------------------------------------

class SlowlyVaryingForm(str, Enum):
    CONSTANT = "constant"
    LOG_SHIFT = "log_shift"
    BOUNDED_RATIONAL = "bounded_rational"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class SlowlyVarying:
    """A slowly varying function l from a small closed set of forms.

    * ``constant``          l(t) = c
    * ``log_shift``         l(t) = log(e + t)
    * ``bounded_rational``  l(t) = c_inf - b / (1 + t)
    * ``tabulated``         linear interpolation through ``(nodes, values)``,
      equal to ``values[0]`` left of the first node and to ``tail`` right of
      the last one.

    Use the classmethod constructors rather than the raw fields.
    """

    form: SlowlyVaryingForm
    params: tuple[float, ...] = ()
    nodes: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, c: float = 1.0) -> "SlowlyVarying":
        if not math.isfinite(c) or c < 0:
            raise DomainError(f"constant slowly varying value must be finite and >= 0, got {c}")
        return cls(SlowlyVaryingForm.CONSTANT, (float(c),))

    @classmethod
    def log_shift(cls) -> "SlowlyVarying":
        return cls(SlowlyVaryingForm.LOG_SHIFT)

    @classmethod
    def bounded_rational(cls, c_inf: float, b: float) -> "SlowlyVarying":
        if b < 0:
            raise DomainError(f"bounded_rational needs b >= 0, got b={b}")
        if c_inf - b < 0:
            raise DomainError(
                f"bounded_rational needs c_inf >= b so that l(0) >= 0, got c_inf={c_inf}, b={b}"
            )
        return cls(SlowlyVaryingForm.BOUNDED_RATIONAL, (float(c_inf), float(b)))

    @classmethod
    def tabulated(cls, nodes, values, tail: float) -> "SlowlyVarying":
        nodes_t = tuple(float(x) for x in nodes)
        values_t = tuple(float(v) for v in values)
        if len(nodes_t) == 0 or len(nodes_t) != len(values_t):
            raise DomainError("tabulated form needs equally long, non-empty nodes and values")
        if any(b <= a for a, b in zip(nodes_t, nodes_t[1:])):
            raise DomainError("tabulated nodes must be strictly increasing")
        if nodes_t[0] < 0:
            raise DomainError("tabulated nodes must be >= 0")
        if not all(math.isfinite(v) and v >= 0 for v in values_t) or not math.isfinite(tail):
            raise DomainError("tabulated values and tail must be finite and non-negative")
        return cls(SlowlyVaryingForm.TABULATED, (float(tail),), nodes_t, values_t)

    # -- evaluation ---------------------------------------------------------

    def __call__(self, t):
        """Evaluate l at a scalar or array ``t`` (t >= 0)."""
        t_arr = np.asarray(t, dtype=float)
        if self.form is SlowlyVaryingForm.CONSTANT:
            out = np.full_like(t_arr, self.params[0])
        elif self.form is SlowlyVaryingForm.LOG_SHIFT:
            out = np.log(math.e + t_arr)
        elif self.form is SlowlyVaryingForm.BOUNDED_RATIONAL:
            c_inf, b = self.params
            out = c_inf - b / (1.0 + t_arr)
        else:
            out = np.interp(t_arr, self.nodes, self.values, right=self.params[0])
        return float(out) if out.ndim == 0 else out

    @property
    def limit_at_infinity(self) -> float:
        """The limit of l at +infinity (``math.inf`` when it diverges)."""
        if self.form is SlowlyVaryingForm.LOG_SHIFT:
            return math.inf
        return self.params[0]

    @property
    def is_constant(self) -> bool:
        if self.form is SlowlyVaryingForm.CONSTANT:
            return True
        if self.form is SlowlyVaryingForm.BOUNDED_RATIONAL:
            return self.params[1] == 0.0
        if self.form is SlowlyVaryingForm.TABULATED:
            return all(v == self.params[0] for v in self.values)
        return False

    def is_non_decreasing(self) -> bool:
        vals = self(_CHECK_GRID)
        return bool(np.all(np.diff(vals) >= 0.0))

    def to_dict(self) -> dict:
        if self.form is SlowlyVaryingForm.CONSTANT:
            return {"form": self.form.value, "params": {"c": self.params[0]}}
        if self.form is SlowlyVaryingForm.LOG_SHIFT:
            return {"form": self.form.value, "params": {}}
        if self.form is SlowlyVaryingForm.BOUNDED_RATIONAL:
            return {"form": self.form.value,
                    "params": {"c_inf": self.params[0], "b": self.params[1]}}
        return {"form": self.form.value,
                "params": {"nodes": list(self.nodes), "values": list(self.values),
                           "tail": self.params[0]}}


# ---------------------------------------------------------------------------
# Memory functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MemoryFunction:
    """M(t) = l(t) * t**nu, a member of the class R_nu.

    Construction fails for a negative exponent, for an l that decreases or
    goes negative on the check grid, and for a constant M.
    """

    nu: float
    l: SlowlyVarying = field(default_factory=SlowlyVarying.constant)

    def __post_init__(self) -> None:
        if not math.isfinite(self.nu) or self.nu < 0:
            raise DomainError(f"memory exponent nu must be finite and >= 0, got {self.nu}")
        vals = self.l(_CHECK_GRID)
        if np.any(vals < 0):
            raise DomainError("slowly varying factor l must be non-negative")
        if not self.l.is_non_decreasing():
            raise DomainError("slowly varying factor l must be non-decreasing on [0, +inf)")
        if self.nu == 0 and self.l.is_constant:
            raise DomainError("memory function is constant (nu = 0 with constant l)")
        if self.nu > 0 and not np.any(vals > 0):
            raise DomainError("memory function is identically zero")

    def __call__(self, t):
        return eval_memory(self, t)

    def to_dict(self) -> dict:
        return {"nu": self.nu, **self.l.to_dict()}


def _power(t: np.ndarray, nu: float) -> np.ndarray:
    # 0**0 = 1 is numpy's convention as well; spelled out for nu == 0.
    if nu == 0:
        return np.ones_like(t)
    return np.power(t, nu)


def eval_memory(M: MemoryFunction, t):
    """Return M(t) = l(t) * t**nu for scalar or array ``t`` >= 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError(f"memory function is defined on [0, +inf), got t={t}")
    out = np.asarray(M.l(t_arr)) * _power(t_arr, M.nu)
    return float(out) if out.ndim == 0 else out


def delta_memory(M: MemoryFunction, i: int) -> float:
    """Return the increment M(i+1) - M(i)."""
    if i < 0:
        raise DomainError(f"increment index must be >= 0, got i={i}")
    return eval_memory(M, i + 1) - eval_memory(M, i)


def delta_memory_array(M: MemoryFunction, n: int) -> np.ndarray:
    """Vectorised increments ``[dM(0), ..., dM(n-1)]``."""
    if n < 0:
        raise DomainError(f"number of increments must be >= 0, got n={n}")
    values = eval_memory(M, np.arange(n + 1, dtype=float))
    return np.diff(values)


def memory_at_infinity(M: MemoryFunction) -> float:
    """Return M(+inf): infinite for nu > 0 or a divergent l, else lim l."""
    if M.nu > 0:
        return math.inf
    return M.l.limit_at_infinity


def sv_max_ratio(g: SlowlyVarying, eps: float, n: int) -> float:
    """Return max_{1<=k<=n} g(k) k**eps / (g(n) n**eps)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if eps <= 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    k = np.arange(1, n + 1, dtype=float)
    weighted = np.asarray(g(k)) * k ** eps
    denom = weighted[-1]
    if denom == 0:
        raise DegenerateInputError(f"g(n) * n**eps vanishes at n={n}")
    return float(weighted.max() / denom)
