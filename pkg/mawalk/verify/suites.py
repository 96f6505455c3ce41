"""Named groups of verification tests.

Usage:
    reports = run_suite(cfg, "corollary")
    reports = run_suite(cfg, "all", cache=VarZCache("var_z.csv"), on_test=print)
"""

from __future__ import annotations

from enum import Enum
from typing import Callable

from mawalk.limit import VarZCache, WrongBranchError
from mawalk.models import TestReport
from mawalk.verify import deterministic, montecarlo
from mawalk.verify.montecarlo import FddTarget

REPORT_HEADER_NOTES = (
    "Convergence in D[0,1] is checked by two surrogates: finite-dimensional "
    "distributions (two-sample KS on Cramer-Wold combinations) plus control of "
    "the modulus of continuity.",
    "Tolerances (ratio band, covariance gap, KS level) are engineering choices; "
    "no convergence rate is known. Each report records the values it used.",
)


class Suite(str, Enum):
    PROPOSITION = "proposition"
    THEOREM_NU_POS = "theorem_nu_pos"
    THEOREM_NU_ZERO = "theorem_nu_zero"
    COROLLARY = "corollary"
    ALL = "all"


def _proposition(cfg, cache):
    return [
        ("test_cov_convergence", lambda: deterministic.test_cov_convergence(cfg)),
        ("test_increment_variance", lambda: deterministic.test_increment_variance(cfg)),
        ("test_fdd", lambda: montecarlo.test_fdd(cfg, FddTarget.PROPOSITION_S_TO_FBM)),
        ("test_modulus", lambda: montecarlo.test_modulus(cfg)),
        ("test_moment_bound", lambda: montecarlo.test_moment_bound(cfg)),
    ]


def _theorem_nu_pos(cfg, cache):
    return [("test_fdd", lambda: montecarlo.test_fdd(cfg, FddTarget.THEOREM_R_TO_Z))]


def _theorem_nu_zero(cfg, cache):
    return [
        ("test_fdd", lambda: montecarlo.test_fdd(cfg, FddTarget.THEOREM_R_TO_SCALED_FBM)),
        ("test_nu0_proxy", lambda: montecarlo.test_nu0_proxy(cfg)),
    ]


def _corollary(cfg, cache):
    return [("test_var_ratio", lambda: deterministic.test_var_ratio(cfg, cache))]


def suite_tests(cfg, suite: Suite | str, cache: VarZCache | None = None) -> list[tuple[str, Callable]]:
    """The (name, thunk) list a suite runs, after checking it fits the config's nu."""
    suite = Suite(suite)
    if suite is Suite.THEOREM_NU_POS and not cfg.nu > 0:
        raise WrongBranchError(f"suite {suite.value} needs nu > 0, config has nu={cfg.nu}")
    if suite is Suite.THEOREM_NU_ZERO and cfg.nu != 0:
        raise WrongBranchError(f"suite {suite.value} needs nu = 0, config has nu={cfg.nu}")

    if suite is Suite.PROPOSITION:
        return _proposition(cfg, cache)
    if suite is Suite.THEOREM_NU_POS:
        return _theorem_nu_pos(cfg, cache)
    if suite is Suite.THEOREM_NU_ZERO:
        return _theorem_nu_zero(cfg, cache)
    if suite is Suite.COROLLARY:
        return _corollary(cfg, cache)
    theorem = _theorem_nu_pos if cfg.nu > 0 else _theorem_nu_zero
    return _proposition(cfg, cache) + theorem(cfg, cache) + _corollary(cfg, cache)


def run_suite(
    cfg,
    suite: Suite | str,
    cache: VarZCache | None = None,
    on_test: Callable[[str], None] | None = None,
) -> list[TestReport]:
    """Run every test of a suite in a fixed order; ``on_test`` is told each name first."""
    reports = []
    for name, run in suite_tests(cfg, suite, cache):
        if on_test is not None:
            on_test(name)
        reports.append(run())
    return reports
