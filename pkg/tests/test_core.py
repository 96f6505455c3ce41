"""Tests for mawalk/core.py"""

import math

import numpy as np
import pytest

from mawalk.core import (
    DegenerateInputError,
    DomainError,
    MemoryFunction,
    SlowlyVarying,
    delta_memory,
    delta_memory_array,
    eval_memory,
    memory_at_infinity,
    sv_max_ratio,
)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def power(nu: float) -> MemoryFunction:
    return MemoryFunction(nu, SlowlyVarying.constant(1.0))


BOUNDED = SlowlyVarying.bounded_rational(c_inf=2.0, b=1.0)


# ---------------------------------------------------------------------------
# SlowlyVarying
# ---------------------------------------------------------------------------

def test_constant_evaluates_everywhere():
    l = SlowlyVarying.constant(3.0)
    assert l(0.0) == 3.0
    assert list(l(np.array([1.0, 10.0]))) == [3.0, 3.0]


def test_bounded_rational_values_and_limit():
    assert BOUNDED(0.0) == 1.0
    assert BOUNDED(1.0) == 1.5
    assert BOUNDED.limit_at_infinity == 2.0


def test_log_shift_diverges():
    l = SlowlyVarying.log_shift()
    assert l(0.0) == pytest.approx(1.0)
    assert l.limit_at_infinity == math.inf


@pytest.mark.parametrize("l", [SlowlyVarying.constant(2.0), BOUNDED])
def test_slow_variation_at_large_t(l):
    t = 1e6
    assert abs(l(2 * t) / l(t) - 1.0) < 1e-3


def test_tabulated_interpolates_and_uses_tail():
    l = SlowlyVarying.tabulated([0.0, 1.0, 2.0], [1.0, 2.0, 3.0], tail=4.0)
    assert l(0.5) == pytest.approx(1.5)
    assert l(2.0) == 3.0
    assert l(100.0) == 4.0


def test_tabulated_rejects_unsorted_nodes():
    with pytest.raises(DomainError, match="strictly increasing"):
        SlowlyVarying.tabulated([0.0, 2.0, 1.0], [1.0, 1.0, 1.0], tail=1.0)


def test_bounded_rational_rejects_negative_start():
    with pytest.raises(DomainError, match="c_inf >= b"):
        SlowlyVarying.bounded_rational(c_inf=1.0, b=2.0)


def test_to_dict_names_the_form():
    assert BOUNDED.to_dict() == {"form": "bounded_rational", "params": {"c_inf": 2.0, "b": 1.0}}


# ---------------------------------------------------------------------------
# MemoryFunction construction
# ---------------------------------------------------------------------------

def test_memory_rejects_negative_nu():
    with pytest.raises(DomainError, match="nu"):
        MemoryFunction(-1.0)


def test_memory_rejects_constant():
    with pytest.raises(DomainError, match="constant"):
        MemoryFunction(0.0, SlowlyVarying.constant(5.0))


def test_memory_rejects_decreasing_l():
    l = SlowlyVarying.tabulated([0.0, 1.0], [2.0, 1.0], tail=1.0)
    with pytest.raises(DomainError, match="non-decreasing"):
        MemoryFunction(1.0, l)


def test_memory_rejects_identically_zero():
    with pytest.raises(DomainError, match="identically zero"):
        MemoryFunction(1.0, SlowlyVarying.constant(0.0))


# ---------------------------------------------------------------------------
# eval_memory / delta_memory
# ---------------------------------------------------------------------------

def test_eval_pure_power():
    assert eval_memory(power(2.0), 3.0) == 9.0


def test_eval_nu_zero_uses_zero_to_the_zero_is_one():
    assert eval_memory(MemoryFunction(0.0, BOUNDED), 0.0) == 1.0


def test_eval_positive_nu_vanishes_at_zero():
    assert eval_memory(MemoryFunction(1.0, SlowlyVarying.log_shift()), 0.0) == 0.0


def test_eval_negative_t_is_domain_error():
    with pytest.raises(DomainError):
        eval_memory(power(1.0), -0.5)


def test_delta_memory_examples():
    assert delta_memory(power(2.0), 3) == 7.0
    assert delta_memory(power(1.0), 5) == 1.0
    assert delta_memory(MemoryFunction(0.0, BOUNDED), 0) == pytest.approx(0.5)


def test_delta_memory_negative_index():
    with pytest.raises(DomainError):
        delta_memory(power(1.0), -1)


def test_delta_memory_array_telescopes():
    rng = np.random.default_rng(3)
    for _ in range(20):
        M = MemoryFunction(float(rng.uniform(0.1, 3.0)),
                           SlowlyVarying.bounded_rational(3.0, float(rng.uniform(0, 3))))
        n = int(rng.integers(1, 64))
        d = delta_memory_array(M, n)
        assert np.all(d >= 0)
        total = eval_memory(M, n) - eval_memory(M, 0)
        assert abs(d.sum() - total) <= 1e-10 * max(1.0, abs(total))


# ---------------------------------------------------------------------------
# memory_at_infinity
# ---------------------------------------------------------------------------

def test_memory_at_infinity():
    assert memory_at_infinity(power(1.0)) == math.inf
    assert memory_at_infinity(MemoryFunction(0.0, BOUNDED)) == 2.0
    assert memory_at_infinity(MemoryFunction(0.0, SlowlyVarying.log_shift())) == math.inf


# ---------------------------------------------------------------------------
# sv_max_ratio
# ---------------------------------------------------------------------------

def test_sv_max_ratio_constant():
    assert sv_max_ratio(SlowlyVarying.constant(1.0), 0.5, 100) == 1.0


def test_sv_max_ratio_log_shift():
    assert sv_max_ratio(SlowlyVarying.log_shift(), 0.5, 1000) == pytest.approx(1.0)


def test_sv_max_ratio_decreasing_table():
    g = SlowlyVarying.tabulated([1.0, 2.0], [2.0, 1.5], tail=1.5)
    assert sv_max_ratio(g, 1.0, 2) == pytest.approx(1.0)


@pytest.mark.parametrize("g", [
    SlowlyVarying.constant(3.0),
    SlowlyVarying.log_shift(),
    SlowlyVarying.bounded_rational(2.0, 1.5),
    SlowlyVarying.tabulated([1.0, 10.0, 100.0], [3.0, 2.0, 1.5], tail=1.5),
], ids=["constant", "log_shift", "bounded_rational", "tabulated"])
@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
def test_sv_max_ratio_stays_bounded(g, eps):
    ratios = [sv_max_ratio(g, eps, 2 ** p) for p in range(4, 21)]
    assert all(1.0 <= r <= 2.0 for r in ratios)


def test_sv_max_ratio_degenerate():
    with pytest.raises(DegenerateInputError):
        sv_max_ratio(SlowlyVarying.constant(0.0), 0.5, 10)


def test_sv_max_ratio_bad_eps():
    with pytest.raises(DomainError, match="eps"):
        sv_max_ratio(SlowlyVarying.constant(1.0), 0.0, 10)
