"""Tests for mawalk/streams.py"""

import numpy as np

from mawalk.streams import run_trials, stream_id, trial_rng


def test_stream_id_is_stable():
    assert stream_id("test_fdd") == stream_id("test_fdd")
    assert stream_id("test_fdd") != stream_id("test_modulus")
    assert 0 <= stream_id("x") < 2 ** 32


def test_trial_streams_are_reproducible_and_distinct():
    a = trial_rng(7, "s", 3).standard_normal(4)
    assert np.array_equal(a, trial_rng(7, "s", 3).standard_normal(4))
    assert not np.array_equal(a, trial_rng(7, "s", 4).standard_normal(4))
    assert not np.array_equal(a, trial_rng(8, "s", 3).standard_normal(4))
    assert not np.array_equal(a, trial_rng(7, "t", 3).standard_normal(4))


def test_results_in_trial_order_for_any_worker_count():
    def draw(rng, trial):
        return trial, float(rng.standard_normal())

    serial = run_trials(draw, 25, 1, "order", workers=1)
    pooled = run_trials(draw, 25, 1, "order", workers=6)
    assert serial == pooled
    assert [t for t, _ in serial] == list(range(25))
