"""Parallelisation verdict derived from a verified iteration contract.

A loop verified without any ``send`` gets ``independent``; one whose sends
all deliver to a point after the send gets ``ivdep``; any send delivering
backwards forces sequential execution.
"""

from __future__ import annotations

from dataclasses import dataclass

from .aggregator import BalanceReport
from .checker import BACKWARD, FORWARD, CheckReport, Diagnostic, SendUse
from .frontend.ir import ValidatedProgram

INDEPENDENT = "Independent"
FORWARD_ONLY = "ForwardOnly"
BACKWARD_DEP = "Backward"
UNVERIFIED = "Unverified"

PRAGMA = {INDEPENDENT: "independent", FORWARD_ONLY: "ivdep", BACKWARD_DEP: "none", UNVERIFIED: "none"}


@dataclass(frozen=True)
class Verdict:
    kind: str
    evidence: tuple[SendUse, ...] = ()
    diagnostic: Diagnostic | None = None

    @property
    def suggested_pragma(self) -> str:
        return PRAGMA[self.kind]


def classify(program: ValidatedProgram, report: CheckReport, agg: BalanceReport) -> Verdict:
    if not report.passed:
        return Verdict(UNVERIFIED, (), report.diagnostic)
    if not agg.ok:
        exc = agg.error
        diag = Diagnostic(exc.code, str(exc), program.source.loop.span, cell=str(exc.cell))
        return Verdict(UNVERIFIED, (), diag)
    uses = report.sends_used
    if not uses:
        return Verdict(INDEPENDENT)
    if all(u.direction == FORWARD for u in uses):
        return Verdict(FORWARD_ONLY, uses)
    assert any(u.direction == BACKWARD for u in uses)
    return Verdict(BACKWARD_DEP, uses)
