"""Check reports and their deterministic text / JSON rendering."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass

__all__ = [
    "PASS",
    "FAIL",
    "INDETERMINATE",
    "INAPPLICABLE",
    "RANK_AMBIGUOUS",
    "MISMATCH",
    "CheckReport",
    "emit_report",
    "render_json",
    "render_text",
    "exit_code_for",
]

PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"
INAPPLICABLE = "inapplicable"
RANK_AMBIGUOUS = "rank-ambiguous"
MISMATCH = "MISMATCH"

_STATUSES = (PASS, FAIL, INDETERMINATE, INAPPLICABLE, RANK_AMBIGUOUS, MISMATCH)


@dataclass
class CheckReport:
    """Outcome of one named check.

    Invariants: ``status == "pass"`` implies ``max_residual <= threshold``;
    an ``inapplicable`` status names the failed hypothesis in ``detail``.
    Verdict-style checks (classifications) report their finding in
    ``detail`` with a zero residual.
    """

    check_id: str
    status: str
    max_residual: float = 0.0
    threshold: float = 0.0
    witness: tuple | None = None
    detail: str = ""

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        self.max_residual = float(self.max_residual)
        self.threshold = float(self.threshold)
        if self.witness is not None:
            self.witness = tuple(float(v) for v in self.witness)
        if self.status == PASS and not self.max_residual <= self.threshold:
            raise ValueError(
                f"{self.check_id}: pass status with residual "
                f"{self.max_residual!r} above threshold {self.threshold!r}"
            )


def render_json(reports, fixture: str | None = None, options: dict | None = None) -> str:
    """Byte-deterministic JSON with a fixed field order."""
    payload: dict = {"version": 1}
    if fixture is not None:
        payload["fixture"] = fixture
    if options is not None:
        payload["options"] = options
    payload["checks"] = [
        {
            "check_id": r.check_id,
            "status": r.status,
            "max_residual": r.max_residual,
            "threshold": r.threshold,
            "witness": list(r.witness) if r.witness is not None else None,
            "detail": r.detail,
        }
        for r in reports
    ]
    return json.dumps(payload, separators=(",", ":"), allow_nan=False)


def render_text(reports) -> str:
    return "\n".join(
        f"{r.check_id} {r.status.upper()} residual={r.max_residual!r} thr={r.threshold!r}"
        for r in reports
    )


def emit_report(reports, fmt: str = "text", out=None, fixture: str | None = None,
                options: dict | None = None) -> str:
    """Render and write the report; returns the rendered string."""
    if fmt == "json":
        rendered = render_json(reports, fixture=fixture, options=options)
    elif fmt == "text":
        rendered = render_text(reports)
    else:
        raise ValueError("format must be 'text' or 'json'")
    if out is None:
        sys.stdout.write(rendered + "\n")
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(rendered + "\n")
    return rendered


def exit_code_for(reports) -> int:
    """0 clean, 1 fail/MISMATCH, 3 rank-ambiguous or indeterminate only."""
    statuses = {r.status for r in reports}
    if FAIL in statuses or MISMATCH in statuses:
        return 1
    if RANK_AMBIGUOUS in statuses or INDETERMINATE in statuses:
        return 3
    return 0
