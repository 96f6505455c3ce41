"""Monte Carlo checks of the functional limits.

Usage:
    test_fdd(cfg, FddTarget.PROPOSITION_S_TO_FBM)
    test_modulus(cfg, [1/4, 1/16, 1/64])
    test_moment_bound(cfg, alpha=4.0)
    test_nu0_proxy(cfg)

Convergence in D[0, 1] is checked through two surrogates: finite-dimensional
distributions (two-sample KS on Cramer-Wold combinations) and control of the
modulus of continuity. Every sample is drawn from a named per-trial stream,
so results do not depend on the worker count.
"""

from __future__ import annotations

import math
import statistics
from enum import Enum

import numpy as np
import scipy.ndimage

from mawalk.core import eval_memory
from mawalk.fbm import TimeGrid, fbm_cov, sample_fbm_paths
from mawalk.kernels import var_partial_sum
from mawalk.limit import WrongBranchError, ZProcessSpec, limit_factor_nu0, sample_Z_batch
from mawalk.linproc import exact_var_R, simulate_walks
from mawalk.models import Verdict
from mawalk.streams import trial_rng
from mawalk.verify import (
    DegenerateLimitError,
    HypothesisError,
    build_report,
    non_increasing,
    time_pairs,
)
from mawalk.verify.stats import ks_two_sample, standard_error_of_variance

#: Replicates whose p-values spread by more than this factor are inconclusive.
INCONCLUSIVE_SPREAD = 100.0

#: Standard errors allowed between empirical and exact Var(P_n(1)).
CONSISTENCY_SIGMAS = 5.0

MODULUS_EPSILONS = (0.5, 1.0)
MODULUS_THRESHOLD = 0.05
MOMENT_TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)
CORRELATION_THRESHOLD = 0.95


class FddTarget(str, Enum):
    PROPOSITION_S_TO_FBM = "proposition_s_to_fbm"
    THEOREM_R_TO_Z = "theorem_r_to_Z"
    THEOREM_R_TO_SCALED_FBM = "theorem_r_to_scaled_fbm"


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def aggregate_p_values(p_values, significance: float) -> Verdict:
    """Median rule over replicates; a wide straddle of the level is inconclusive."""
    p_values = list(p_values)
    if statistics.median(p_values) > significance:
        return Verdict.PASS
    hi, lo = max(p_values), min(p_values)
    if hi > significance and (lo == 0.0 or hi / lo > INCONCLUSIVE_SPREAD):
        return Verdict.INCONCLUSIVE
    return Verdict.FAIL


def _cw_label(c) -> str:
    return "(" + ",".join(f"{x:g}" for x in c) + ")"


def _cw_columns(c, times: list[float]) -> list[int]:
    # a vector of length k combines the last k evaluation times
    return list(range(len(times) - len(c), len(times)))


def oscillation(paths: np.ndarray, delta: float) -> np.ndarray:
    """sup over |t - s| < delta of |p(t) - p(s)| for each row of a (trials, n + 1) array."""
    paths = np.atleast_2d(paths)
    n = paths.shape[1] - 1
    if delta >= 1.0:
        return np.ptp(paths, axis=1)
    # |i - j| < n delta  <=>  |i - j| <= ceil(n delta) - 1
    lag = math.ceil(round(n * delta, 9)) - 1
    if lag <= 0:
        return np.zeros(paths.shape[0])
    size = min(lag, n) + 1
    hi = scipy.ndimage.maximum_filter1d(paths, size, axis=1, mode="nearest")
    lo = scipy.ndimage.minimum_filter1d(paths, size, axis=1, mode="nearest")
    return np.max(hi - lo, axis=1)


def _walk_values(cfg, n: int, stream: str, indices: list[int], which: str) -> np.ndarray:
    """(trials, len(indices)) array of s_n or r_n values at grid indices."""

    def _reduce(sample):
        path = sample.s_path if which == "s" else sample.r_path
        return path.values[indices]

    rows = simulate_walks(
        cfg.kernel, cfg.memory, cfg.innovation, n, cfg.trials,
        cfg.master_seed, stream, cfg.workers, reduce=_reduce,
    )
    return np.asarray(rows, dtype=float).reshape(cfg.trials, len(indices))


# ---------------------------------------------------------------------------
# Finite-dimensional distributions
# ---------------------------------------------------------------------------

def _check_branch(cfg, target: FddTarget) -> None:
    if target is FddTarget.THEOREM_R_TO_Z and not cfg.nu > 0:
        raise WrongBranchError(f"{target.value} needs nu > 0, config has nu={cfg.nu}")
    if target is FddTarget.THEOREM_R_TO_SCALED_FBM and cfg.nu != 0:
        raise WrongBranchError(f"{target.value} needs nu = 0, config has nu={cfg.nu}")


def _predicted_variance_at_one(cfg, target: FddTarget, n: int) -> float:
    if target is FddTarget.PROPOSITION_S_TO_FBM:
        return 1.0
    m_n = float(eval_memory(cfg.memory, n))
    return exact_var_R(cfg.kernel, cfg.memory, n) / (m_n ** 2 * var_partial_sum(cfg.kernel, n))


def test_fdd(cfg, target: FddTarget | str):
    """Two-sample KS between Cramer-Wold combinations of P_n and of the limit."""
    target = FddTarget(target)
    _check_branch(cfg, target)
    H = cfg.hurst
    n = cfg.n_max
    times = sorted({float(t) for t in cfg.eval_times})
    grid = TimeGrid(n)
    indices = [grid.index(t) for t in times]
    which = "s" if target is FddTarget.PROPOSITION_S_TO_FBM else "r"

    factor = 1.0
    if target is FddTarget.THEOREM_R_TO_SCALED_FBM:
        factor = limit_factor_nu0(cfg.memory)
        if factor == 0.0:
            raise DegenerateLimitError(
                "scaled limit vanishes (factor 0); use test_nu0_proxy for this memory"
            )
    cov = fbm_cov(np.asarray(times)[:, None], np.asarray(times)[None, :], H)

    p_values: dict[str, list[float]] = {_cw_label(c): [] for c in cfg.cramer_wold_coeffs}
    streams = []
    left_at_one = []
    raw = []
    for rep in range(cfg.replicates):
        left_stream = f"test_fdd/{target.value}/left/{rep}"
        right_stream = f"test_fdd/{target.value}/right/{rep}"
        streams += [left_stream, right_stream]
        left = _walk_values(cfg, n, left_stream, indices, which)
        if times[-1] == 1.0:
            left_at_one.append(left[:, -1])
        if rep == 0:
            raw = [(n, trial, float(value)) for trial, value in enumerate(left[:, -1])]

        rng = trial_rng(cfg.master_seed, right_stream, 0)
        z_values = None
        if target is FddTarget.THEOREM_R_TO_Z:
            spec = ZProcessSpec(cfg.nu, H, cfg.quadrature_grid)
            paths = sample_fbm_paths(
                TimeGrid(cfg.quadrature_grid), H, cfg.trials, rng, cfg.fbm_method
            )
            z_values = sample_Z_batch(paths, spec, times)

        for c in cfg.cramer_wold_coeffs:
            cols = _cw_columns(c, times)
            coeffs = np.asarray(c, dtype=float)
            lhs = left[:, cols] @ coeffs
            if z_values is not None:
                rhs = z_values[:, cols] @ coeffs
            else:
                sd = math.sqrt(max(float(coeffs @ cov[np.ix_(cols, cols)] @ coeffs), 0.0))
                rhs = factor * sd * rng.standard_normal(cfg.trials)
            _, p = ks_two_sample(lhs, rhs)
            p_values[_cw_label(c)].append(p)

    rows = []
    verdicts = []
    for label, ps in p_values.items():
        v = aggregate_p_values(ps, cfg.significance)
        verdicts.append(v)
        rows.append({
            "c": label, "median_p": statistics.median(ps),
            "min_p": min(ps), "max_p": max(ps), "verdict": v.value,
        })

    summary: dict = {"p_values": p_values}
    notes = [
        f"KS level {cfg.significance}, median over {cfg.replicates} replicates",
        "a vector of length k combines the last k evaluation times",
    ]
    if left_at_one:
        pooled = np.concatenate(left_at_one)
        predicted = _predicted_variance_at_one(cfg, target, n)
        empirical = float(np.var(pooled))
        se = standard_error_of_variance(pooled)
        consistent = abs(empirical - predicted) <= CONSISTENCY_SIGMAS * se
        summary.update({
            "var_at_one_empirical": empirical,
            "var_at_one_predicted": predicted,
            "var_at_one_se": se,
            "var_consistent": consistent,
        })
        if not consistent:
            verdicts.append(Verdict.FAIL)
    else:
        notes.append("t = 1 not among eval_times; variance consistency not checked")

    return build_report(
        f"test_fdd[{target.value}]",
        cfg,
        Verdict.combine(verdicts),
        rows,
        parameters={"n": n, "times": times, "trials": cfg.trials,
                    "replicates": cfg.replicates, "significance": cfg.significance},
        summary=summary,
        streams=streams,
        notes=notes,
        raw=raw,
    )


# ---------------------------------------------------------------------------
# Modulus of continuity
# ---------------------------------------------------------------------------

def test_modulus(cfg, delta_values=None):
    """P(sup_{|t-s|<delta} |s_n(t) - s_n(s)| > eps) at the largest n."""
    deltas = sorted({float(d) for d in (delta_values or cfg.delta_values)}, reverse=True)
    if any(d <= 0 for d in deltas):
        raise HypothesisError(f"delta values must be positive, got {deltas}")
    n = cfg.n_max
    stream = "test_modulus"
    paths = np.asarray(simulate_walks(
        cfg.kernel, cfg.memory, cfg.innovation, n, cfg.trials,
        cfg.master_seed, stream, cfg.workers, reduce=lambda w: w.s_path.values,
    ), dtype=float)

    rows = []
    probs: dict[float, list[float]] = {eps: [] for eps in MODULUS_EPSILONS}
    smallest = None
    for delta in deltas:
        osc = oscillation(paths, delta)
        smallest = osc
        for eps in MODULUS_EPSILONS:
            p = float(np.mean(osc > eps))
            probs[eps].append(p)
            rows.append({"delta": delta, "eps": eps, "probability": p})

    monotone = all(non_increasing(ps) for ps in probs.values())
    at_smallest = probs[1.0][-1]
    verdict = Verdict.PASS if monotone and at_smallest < MODULUS_THRESHOLD else Verdict.FAIL
    return build_report(
        "test_modulus",
        cfg,
        verdict,
        rows,
        parameters={"n": n, "trials": cfg.trials, "deltas": deltas, "threshold": MODULUS_THRESHOLD},
        summary={"monotone_in_delta": monotone, "probability_at_smallest_delta": at_smallest},
        streams=[stream],
        raw=[(n, trial, float(v)) for trial, v in enumerate(smallest)],
    )


# ---------------------------------------------------------------------------
# Moment bound
# ---------------------------------------------------------------------------

def test_moment_bound(cfg, alpha: float | None = None):
    """Boundedness of E|s_n(t) - s_n(tau)|**alpha / (([nt] - [ntau]) / n)**((alpha H + 1) / 2)."""
    alpha = float(cfg.moment_alpha if alpha is None else alpha)
    H = cfg.hurst
    if not alpha * H > 1.0:
        raise HypothesisError(f"moment bound needs alpha*H > 1, got alpha={alpha}, H={H}")
    if cfg.innovation.moment_order_alpha < alpha:
        raise HypothesisError(
            f"innovations ({cfg.innovation.law.value}) have no moment of order {alpha}"
        )
    exponent = (alpha * H + 1.0) / 2.0
    pairs = time_pairs(MOMENT_TIMES, strict=True)
    ns = sorted(cfg.n_values)
    exact = alpha == 2.0

    rows = []
    streams = []
    c_hat = []
    for n in ns:
        grid = TimeGrid(n)
        if not exact:
            stream = f"test_moment_bound/{n}"
            streams.append(stream)
            values = _walk_values(cfg, n, stream, [grid.index(t) for t in MOMENT_TIMES], "s")
            column = {t: i for i, t in enumerate(MOMENT_TIMES)}
        best = 0.0
        best_pair = None
        for t, tau in pairs:
            steps = grid.index(t) - grid.index(tau)
            if steps == 0:
                continue
            if exact:
                moment = var_partial_sum(cfg.kernel, steps) / var_partial_sum(cfg.kernel, n)
            else:
                diff = values[:, column[t]] - values[:, column[tau]]
                moment = float(np.mean(np.abs(diff) ** alpha))
            ratio = moment / (steps / n) ** exponent
            if ratio > best:
                best, best_pair = ratio, (t, tau)
        c_hat.append(best)
        rows.append({"n": n, "C_hat": best, "t": best_pair[0] if best_pair else None,
                     "tau": best_pair[1] if best_pair else None})

    half = max(1, len(ns) // 2)
    small, large = max(c_hat[:half]), max(c_hat[half:] or c_hat[:half])
    spread = large / small if small > 0 else (1.0 if large == 0 else math.inf)
    stable = 0.5 <= spread <= 2.0
    return build_report(
        "test_moment_bound",
        cfg,
        Verdict.PASS if stable else Verdict.FAIL,
        rows,
        parameters={"alpha": alpha, "exponent": exponent, "deterministic": exact},
        summary={"C_small_n": small, "C_large_n": large, "spread": spread},
        streams=streams,
        notes=["boundedness check only: the constant itself is not predicted"],
    )


# ---------------------------------------------------------------------------
# nu = 0 proxy
# ---------------------------------------------------------------------------

def test_nu0_proxy(cfg):
    """d_n(t) = r_n(t) - (1 - M(0)/M(+inf)) s_n(t) should vanish as n grows."""
    if cfg.nu > 0:
        raise WrongBranchError(f"test_nu0_proxy needs nu = 0, config has nu={cfg.nu}")
    factor = limit_factor_nu0(cfg.memory)
    times = sorted({float(t) for t in cfg.eval_times})
    ns = sorted(cfg.n_values)

    rows = []
    streams = []
    raw = []
    mean_squares = []
    correlation = math.nan
    for n in ns:
        stream = f"test_nu0_proxy/{n}"
        streams.append(stream)
        grid = TimeGrid(n)
        indices = [grid.index(t) for t in times] + [n]

        def _reduce(sample, idx=indices):
            return np.concatenate([sample.r_path.values[idx], sample.s_path.values[idx]])

        values = np.asarray(simulate_walks(
            cfg.kernel, cfg.memory, cfg.innovation, n, cfg.trials,
            cfg.master_seed, stream, cfg.workers, reduce=_reduce,
        ), dtype=float)
        width = len(indices)
        r_vals, s_vals = values[:, :width], values[:, width:]
        gap = r_vals[:, :-1] - factor * s_vals[:, :-1]
        msq = float(np.mean(gap ** 2))
        mean_squares.append(msq)
        r_one, s_one = r_vals[:, -1], s_vals[:, -1]
        if np.std(r_one) > 0 and np.std(s_one) > 0:
            correlation = float(np.corrcoef(r_one, s_one)[0, 1])
        else:
            correlation = math.nan
        raw += [(n, trial, float(d)) for trial, d in enumerate(r_one - factor * s_one)]
        rows.append({"n": n, "mean_square_gap": msq, "corr_r_s_at_one": correlation})

    decreasing = non_increasing(mean_squares)
    notes = []
    if factor == 0.0:
        correlated = True
        notes.append("limit factor is 0: only E d_n(t)**2 -> 0 is checked")
    else:
        correlated = correlation > CORRELATION_THRESHOLD
    verdict = Verdict.PASS if decreasing and correlated else Verdict.FAIL
    return build_report(
        "test_nu0_proxy",
        cfg,
        verdict,
        rows,
        parameters={"factor": factor, "times": times, "trials": cfg.trials,
                    "correlation_threshold": CORRELATION_THRESHOLD},
        summary={"mean_square_decreasing": decreasing, "corr_at_n_max": correlation},
        streams=streams,
        notes=notes,
        raw=raw,
    )
