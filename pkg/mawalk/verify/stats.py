"""Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.

Usage:
    d, p = ks_two_sample(x, y)
"""

from __future__ import annotations

import math

import numpy as np
import scipy.special

from mawalk.verify import InsufficientSampleError

MIN_SAMPLE = 50


def ks_two_sample(x, y) -> tuple[float, float]:
    """Return (D, p): D = sup |F_x - F_y| and P(K > sqrt(n m / (n + m)) D).

    K follows the Kolmogorov distribution; ``scipy.special.kolmogorov`` is
    its survival function.
    """
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    n1, n2 = x.size, y.size
    if n1 < MIN_SAMPLE or n2 < MIN_SAMPLE:
        raise InsufficientSampleError(
            f"KS test needs at least {MIN_SAMPLE} observations per sample, got {n1} and {n2}"
        )
    pooled = np.concatenate([x, y])
    cdf1 = np.searchsorted(x, pooled, side="right") / n1
    cdf2 = np.searchsorted(y, pooled, side="right") / n2
    d = float(np.max(np.abs(cdf1 - cdf2)))
    en = math.sqrt(n1 * n2 / (n1 + n2))
    p = float(np.clip(scipy.special.kolmogorov(en * d), 0.0, 1.0))
    return d, p


def standard_error_of_variance(samples) -> float:
    """Standard error of the sample variance, sqrt((m4 - s**4) / N)."""
    samples = np.asarray(samples, dtype=float)
    centred = samples - samples.mean()
    s2 = float(np.mean(centred ** 2))
    m4 = float(np.mean(centred ** 4))
    return math.sqrt(max(m4 - s2 ** 2, 0.0) / samples.size)
