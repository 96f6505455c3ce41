"""Tests for mawalk/kernels.py"""

import math
import warnings

import numpy as np
import pytest

from mawalk.core import DomainError
from mawalk.kernels import (
    DEFAULT_MAX_K,
    DegenerateKernelError,
    InsufficientDataError,
    KernelError,
    TruncationError,
    TruncationWarning,
    autocovariance,
    estimate_hurst_slope,
    h_of,
    make_explicit_kernel,
    make_fractional_kernel,
    make_iid_kernel,
    max_window_sum,
    partial_sum_weights,
    var_partial_sum,
    window_sum_bound,
)

HALF = 1 / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# make_fractional_kernel
# ---------------------------------------------------------------------------

def test_half_is_iid():
    k = make_fractional_kernel(0.5, 100)
    assert list(k.coeffs) == [1.0]
    assert k.kind == "iid"


@pytest.mark.parametrize("H, expected", [
    (0.7, [1.0, 0.2, 0.12]),
    (0.3, [1.0, -0.2, -0.08]),
])
def test_fractional_recurrence(H, expected):
    k = make_fractional_kernel(H, 2, allow_truncation=True)
    assert k.coeffs == pytest.approx(expected)
    assert k.k_min == 0 and k.k_max == 2


def test_explicit_small_window_violates_tail_rule():
    with pytest.raises(TruncationError, match="allow_truncation"):
        make_fractional_kernel(0.7, 8)


def test_default_window_meets_tolerance_for_antipersistent():
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        k = make_fractional_kernel(0.3)
    assert k.truncation_tail_bound <= 1e-6 * k.sum_sq
    # power of two
    assert k.k_max & (k.k_max - 1) == 0


def test_default_window_is_capped_for_persistent():
    with pytest.warns(TruncationWarning, match="capped"):
        k = make_fractional_kernel(0.7)
    assert k.k_max == DEFAULT_MAX_K
    assert DEFAULT_MAX_K >= 2 ** 18


def test_hurst_out_of_range():
    with pytest.raises(DomainError):
        make_fractional_kernel(1.0, 16)


def test_two_sided_is_symmetric():
    k = make_fractional_kernel(0.7, 32, allow_truncation=True, two_sided=True)
    assert k.k_min == -32 and k.k_max == 32
    assert k.coeffs == pytest.approx(k.coeffs[::-1])
    assert k.two_sided


def test_to_dict_reloads_same_window():
    k = make_fractional_kernel(0.7, 64, allow_truncation=True)
    d = k.to_dict()
    again = make_fractional_kernel(d["hurst"], d["K"], allow_truncation=d["allow_truncation"])
    assert np.array_equal(again.coeffs, k.coeffs)


def test_empty_or_zero_kernel_is_rejected():
    with pytest.raises(KernelError):
        make_explicit_kernel([], 0.5)
    with pytest.raises(DegenerateKernelError):
        make_explicit_kernel([0.0, 0.0], 0.5)


# ---------------------------------------------------------------------------
# var_partial_sum / h_of
# ---------------------------------------------------------------------------

def test_var_partial_sum_iid():
    assert var_partial_sum(make_iid_kernel(), 10) == 10.0


def test_var_partial_sum_two_tap():
    k = make_explicit_kernel([HALF, HALF], 0.5)
    assert var_partial_sum(k, 2) == pytest.approx(3.0)


def test_var_partial_sum_zero_length():
    assert var_partial_sum(make_explicit_kernel([1.0, 2.0], 0.7), 0) == 0.0


def test_var_partial_sum_invariant_under_translation():
    k = make_explicit_kernel([0.5, -1.0, 2.0, 0.25], 0.6)
    for c in (-5, 3, 17):
        assert var_partial_sum(k.shifted(c), 9) == pytest.approx(var_partial_sum(k, 9))


def test_h_of_examples():
    assert h_of(make_iid_kernel(), 100) == pytest.approx(1.0)
    assert h_of(make_iid_kernel(0.7), 100) == pytest.approx(10 ** -0.4)


def test_h_of_at_one_is_root_sum_of_squares():
    k = make_fractional_kernel(0.7, 128, allow_truncation=True)
    assert h_of(k, 1) == pytest.approx(math.sqrt(k.sum_sq))


def test_normalised_weights_have_unit_norm():
    rng = np.random.default_rng(11)
    for _ in range(100):
        k = make_explicit_kernel(rng.normal(size=int(rng.integers(1, 12))), 0.5,
                                 int(rng.integers(-6, 6)))
        n = int(rng.integers(1, 65))
        w = partial_sum_weights(k, n, n) / math.sqrt(var_partial_sum(k, n))
        assert abs(np.dot(w, w) - 1.0) <= 1e-10


# ---------------------------------------------------------------------------
# estimate_hurst_slope
# ---------------------------------------------------------------------------

def test_slope_iid_is_half():
    assert estimate_hurst_slope(make_iid_kernel(), [4, 16, 64]) == pytest.approx(0.5)


def test_slope_differencing_kernel_is_zero():
    k = make_explicit_kernel([1.0, -1.0], 0.5)
    assert var_partial_sum(k, 16) == pytest.approx(2.0)
    assert estimate_hurst_slope(k, [4, 16, 64]) == pytest.approx(0.0, abs=1e-12)


def test_slope_needs_three_points():
    with pytest.raises(InsufficientDataError):
        estimate_hurst_slope(make_iid_kernel(), [4, 16])


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_slope_recovers_fractional_hurst(H):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        k = make_fractional_kernel(H)
    ns = [2 ** p for p in range(6, 13)]
    assert estimate_hurst_slope(k, ns) == pytest.approx(H, abs=0.05)


# ---------------------------------------------------------------------------
# autocovariance and the window-sum bound
# ---------------------------------------------------------------------------

def test_autocovariance_two_tap():
    k = make_explicit_kernel([HALF, HALF], 0.5)
    assert autocovariance(k, 0) == pytest.approx(1.0)
    assert autocovariance(k, 1) == pytest.approx(0.5)
    assert autocovariance(k, 2) == 0.0


def test_window_sums_respect_bound():
    rng = np.random.default_rng(5)
    for _ in range(50):
        coeffs = rng.normal(size=int(rng.integers(1, 40)))
        k = make_explicit_kernel(coeffs / np.linalg.norm(coeffs), 0.5)
        for n in (1, 3, 10, 50):
            assert max_window_sum(k, n) <= window_sum_bound(k, n) + 1e-12


def test_window_sum_bound_fractional():
    k = make_fractional_kernel(0.7, 1024, allow_truncation=True)
    for n in (16, 256, 2048):
        assert max_window_sum(k, n) <= window_sum_bound(k, n)
