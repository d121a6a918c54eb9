"""Static analysis pipeline: body check, footprint balance and verdict."""

from __future__ import annotations

from dataclasses import dataclass

from .aggregator import DEFAULT_BOUND, BalanceReport, check_balance
from .checker import CheckReport, check_iteration
from .classifier import Verdict, classify
from .frontend.ir import ValidatedProgram


@dataclass(frozen=True)
class Analysis:
    program: ValidatedProgram
    check: CheckReport
    balance: BalanceReport
    verdict: Verdict

    @property
    def passed(self) -> bool:
        return self.check.passed and self.balance.ok


def analyze(program: ValidatedProgram, assume_bound: int = DEFAULT_BOUND) -> Analysis:
    check = check_iteration(program)
    balance = check_balance(program, assume_bound)
    return Analysis(program, check, balance, classify(program, check, balance))
