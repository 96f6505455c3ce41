"""Data models for verification output.

Contains dataclasses used to structure and serialize results:
    - Verdict
    - TestReport    (one verification experiment; JSON + fixed-width text)
    - RunManifest   (what was run, with which config, and how long each stage took)

Reports carry no timestamps so that the same config yields byte-identical
JSON; wall-clock timings live in the manifest only.
"""

from __future__ import annotations

import contextlib
import json
import math
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterator


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    @classmethod
    def combine(cls, verdicts) -> "Verdict":
        """fail beats inconclusive beats pass."""
        verdicts = list(verdicts)
        if cls.FAIL in verdicts:
            return cls.FAIL
        if cls.INCONCLUSIVE in verdicts:
            return cls.INCONCLUSIVE
        return cls.PASS


@dataclass
class TestReport:
    """Structured outcome of one verification experiment."""

    __test__ = False  # not a pytest class

    name: str
    verdict: Verdict
    rows: list[dict[str, Any]] = field(default_factory=list)
    parameters: dict[str, Any] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    seeds: dict[str, Any] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    # (n, trial, stat) triples; dumped to CSV on request, never to JSON
    raw: list[tuple[int, int, float]] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self) -> dict:
        out = asdict(self)
        del out["raw"]
        out["verdict"] = self.verdict.value
        return out

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"== {self.name}: {self.verdict.value.upper()}"]
        lines += [f"   note: {note}" for note in self.notes]
        for key in sorted(self.parameters):
            lines.append(f"   {key} = {_fmt(self.parameters[key])}")
        for key in sorted(self.summary):
            lines.append(f"   {key}: {_fmt(self.summary[key])}")
        if self.rows:
            lines.append(_table(self.rows))
        return "\n".join(lines)


def _jsonable(value):
    # JSON has no inf/nan; spell them as strings
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return _jsonable(value.item())
    return value


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(_fmt(v) for v in value) + ")"
    return str(value)


def _table(rows: list[dict[str, Any]], width: int = 14) -> str:
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    header = "".join(f"{c[:width - 1]:>{width}}" for c in columns)
    body = [
        "".join(f"{_fmt(row.get(c, ''))[:width - 1]:>{width}}" for c in columns)
        for row in rows
    ]
    return "\n".join([header, "-" * len(header), *body])


def render_reports_text(reports: list[TestReport], header: list[str] | None = None) -> str:
    parts = list(header or [])
    parts += [r.to_text() for r in reports]
    overall = Verdict.combine(r.verdict for r in reports)
    parts.append(f"== overall: {overall.value.upper()}")
    return "\n\n".join(parts) + "\n"


def render_reports_json(reports: list[TestReport], header: dict | None = None) -> str:
    payload = {
        **(header or {}),
        "overall": Verdict.combine(r.verdict for r in reports).value,
        "reports": [_jsonable(r.to_dict()) for r in reports],
    }
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def raw_rows(reports: list[TestReport]) -> list[tuple[str, int, int, float]]:
    """Per-trial statistics of all reports as (test, n, trial, stat), in report order."""
    return [(r.name, n, trial, stat) for r in reports for n, trial, stat in r.raw]


# ---------------------------------------------------------------------------
# Run manifest
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    config_path: str | None
    resolved_config: dict[str, Any]
    output_dir: str
    tool_version: str
    options: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def path(self) -> Path:
        return Path(self.output_dir) / "manifest.json"

    def write(self) -> Path:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return self.path

    @contextlib.contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Time a stage and rewrite the manifest when it ends."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - start, 6)
            self.write()
