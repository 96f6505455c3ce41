"""Reproducible random streams and the trial worker pool.

Usage:
    rng = trial_rng(master_seed=7, stream="test_fdd/left/0", trial=12)
    results = run_trials(simulate_one, trials=2000, master_seed=7,
                         stream="test_fdd/left/0", workers=8)

Every trial draws from its own generator, derived from the master seed, a
stream name and the trial index, so results do not depend on the number of
workers or on the order in which trials finish.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")


def stream_id(name: str) -> int:
    """Stable 32-bit identifier of a stream name (independent of PYTHONHASHSEED)."""
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:4], "big")


def trial_rng(master_seed: int, stream: str, trial: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed),
                                 spawn_key=(stream_id(stream), int(trial)))
    return np.random.default_rng(seq)


def run_trials(
    fn: Callable[[np.random.Generator, int], T],
    trials: int,
    master_seed: int,
    stream: str,
    workers: int = 1,
) -> list[T]:
    """Call ``fn(rng, trial)`` for every trial and return results in trial order."""
    if workers <= 1:
        return [fn(trial_rng(master_seed, stream, i), i) for i in range(trials)]

    def _one(i: int) -> T:
        return fn(trial_rng(master_seed, stream, i), i)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one, range(trials)))
