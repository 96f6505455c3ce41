"""Verification harness: statistical and deterministic checks of the limit theorems."""


class VerificationError(Exception):
    """Base exception for verification runs."""


class HypothesisError(VerificationError):
    """Raised when a test's hypothesis (e.g. alpha * H > 1) does not hold."""


class DegenerateLimitError(VerificationError):
    """Raised when the limit variance is zero and no ratio can be formed."""


class InsufficientSampleError(VerificationError):
    """Raised when a statistic gets too few observations."""


from mawalk.models import TestReport, Verdict  # noqa: E402


def build_report(
    name: str,
    cfg,
    verdict: Verdict,
    rows: list[dict],
    *,
    parameters: dict | None = None,
    summary: dict | None = None,
    streams=(),
    notes=(),
    raw=None,
) -> TestReport:
    """Assemble a TestReport with the config and seed echo every test carries."""
    return TestReport(
        name=name,
        verdict=verdict,
        rows=rows,
        parameters=dict(parameters or {}),
        summary=dict(summary or {}),
        seeds={"master_seed": cfg.master_seed, "streams": list(streams)},
        config=cfg.to_dict(),
        notes=list(notes),
        raw=list(raw or []),
    )


def time_pairs(times, *, strict: bool = False) -> list[tuple[float, float]]:
    """Pairs (t, tau) with t >= tau (t > tau if strict) from a set of times."""
    ordered = sorted({float(t) for t in times})
    return [
        (t, tau)
        for i, t in enumerate(ordered)
        for tau in ordered[: i if strict else i + 1]
    ]


def non_increasing(values, slack: float = 0.0) -> bool:
    values = list(values)
    return all(b <= a + slack for a, b in zip(values, values[1:]))
