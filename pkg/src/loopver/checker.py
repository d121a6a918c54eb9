"""Symbolic execution of one loop iteration against its iteration contract.

For every region of the iteration space the checker starts from the
normalised precondition, injects permissions received from earlier
iterations in front of their target label, executes the body while
checking read/write permissions, removes what ``send`` hands on, and
finally requires the held permissions to equal the postcondition.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from .affine import Constraint
from .frontend.ir import AssignStmt, Cell, Clause, SendStmt, ValidatedProgram
from .resources import (
    ONE,
    ZERO,
    AliasUndecided,
    CapExceeded,
    InsufficientPermission,
    PermissionMap,
    Region,
    normalize,
    split_regions,
)

Span = tuple[int, int]

FORWARD = "forward"
BACKWARD = "backward"

# ordering of failures inside one region: precondition, body steps, postcondition
_PRE_STAGE = 0
_POST_STAGE = 1_000_000


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span
    region: str | None = None
    cell: str | None = None
    statement: str | None = None
    stage: int = field(default=0, compare=False)

    def __str__(self) -> str:
        where = f" [{self.region}]" if self.region else ""
        return f"{self.code} at {self.span[0]}:{self.span[1]}{where}: {self.message}"


@dataclass(frozen=True)
class TraceStep:
    statement: str
    action: str  # read | write | send | receive
    cell: Cell
    before: Fraction
    after: Fraction


@dataclass(frozen=True)
class ReceiveInstance:
    site: int
    label: str
    formula: tuple[Clause, ...]  # already shifted to i - d
    guard: tuple[Constraint, ...]  # is_iteration(i - d)


@dataclass(frozen=True)
class SymbolicState:
    region: Region
    perms: PermissionMap
    # receives still to be injected: (label, instance, existence on this region)
    pending_receives: tuple[tuple[str, ReceiveInstance, bool | None], ...] = ()


@dataclass(frozen=True)
class RegionResult:
    region: Region
    steps: tuple[TraceStep, ...]
    diagnostic: Diagnostic | None

    @property
    def passed(self) -> bool:
        return self.diagnostic is None


@dataclass(frozen=True)
class SendUse:
    site: int
    target: str
    distance: int
    direction: str


@dataclass(frozen=True)
class CheckReport:
    regions: tuple[RegionResult, ...]
    diagnostic: Diagnostic | None
    sends_used: tuple[SendUse, ...]

    @property
    def passed(self) -> bool:
        return self.diagnostic is None

    @property
    def diagnostics(self) -> tuple[Diagnostic, ...]:
        if not self.regions and self.diagnostic is not None:
            return (self.diagnostic,)
        return tuple(r.diagnostic for r in self.regions if r.diagnostic is not None)


class _Failure(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


def send_direction(send: SendStmt) -> str:
    """Forward when the receive point (before the target) follows the send."""
    return FORWARD if send.target_pos > send.pos else BACKWARD


def receive_points(program: ValidatedProgram) -> dict[str, list[ReceiveInstance]]:
    """Where each send's formula arrives: label -> receives, in send-site order."""
    out: dict[str, list[ReceiveInstance]] = {}
    for s in program.sends:
        inst = ReceiveInstance(
            s.site, s.target,
            tuple(cl.shift(-s.distance) for cl in s.formula),
            program.is_iteration(-s.distance),
        )
        out.setdefault(s.target, []).append(inst)
    return out


def _cells(program: ValidatedProgram) -> list[Cell]:
    cells = [cl.atom.cell for cl in program.requires + program.ensures]
    for s in program.body:
        if isinstance(s, AssignStmt):
            cells.extend(s.reads)
            cells.append(s.target)
        else:
            cells.extend(cl.atom.cell for cl in s.formula)
            cells.extend(cl.atom.cell.shift(-s.distance) for cl in s.formula)
    return cells


def _fork(state: SymbolicState, guard: tuple[Constraint, ...]) -> list[tuple[SymbolicState, bool]]:
    """Split ``state`` until ``guard`` is decided on each piece."""
    truth = state.region.decides_all(guard)
    if truth is not None:
        return [(state, truth)]
    undecided = next(g for g in guard if state.region.decides(g) is None)
    out = []
    for region, _ in state.region.split(undecided):
        perms = PermissionMap(region, tuple(state.perms.items()))
        out.extend(_fork(replace(state, region=region, perms=perms), guard))
    return out


def apply_send(state: SymbolicState, send: SendStmt, program: ValidatedProgram) -> list[SymbolicState]:
    """Hand ``send``'s formula over to iteration ``i + d`` where that iteration exists.

    Returns one state per sub-region; a single state whenever the region
    already decides whether the receiving iteration exists.  Where it does
    not exist the transfer is a no-op.
    """
    if send.distance <= 0:
        raise _Failure(Diagnostic("NonPositiveDistance", f"send distance {send.distance} must be positive",
                                  send.span, statement=send.name))
    out = []
    for st, exists in _fork(state, program.is_iteration(send.distance)):
        if exists:
            perms = st.perms
            for cl in send.formula:
                if cl.guard:
                    raise _Failure(Diagnostic("GuardedSend", "guarded send formulas are not supported",
                                              send.span, statement=send.name))
                cell = cl.atom.cell
                try:
                    perms = perms.subtract(cell, cl.atom.frac)
                except InsufficientPermission:
                    raise _Failure(Diagnostic(
                        "SendWithoutPermission",
                        f"send of {program.render_cell(cell)} at {cl.atom.frac} while holding {perms.get(cell)}",
                        send.span, str(st.region), program.render_cell(cell), send.name)) from None
            st = replace(st, perms=perms)
        out.append(st)
    return out


def _receive(state: SymbolicState, inst: ReceiveInstance, stmt, program: ValidatedProgram
             ) -> list[tuple[SymbolicState, list[TraceStep]]]:
    out = []
    for st, exists in _fork(state, inst.guard):
        steps: list[TraceStep] = []
        if exists:
            perms = st.perms
            for cl in inst.formula:
                cell = cl.atom.cell
                before = perms.get(cell)
                try:
                    perms = perms.add(cell, cl.atom.frac)
                except CapExceeded:
                    raise _Failure(Diagnostic(
                        "CapExceeded", f"receiving {program.render_cell(cell)} exceeds full permission",
                        stmt.span, str(st.region), program.render_cell(cell), stmt.name)) from None
                steps.append(TraceStep(stmt.name, "receive", cell, before, perms.get(cell)))
            st = replace(st, perms=perms)
        out.append((st, steps))
    return out


def _assign(state: SymbolicState, stmt: AssignStmt, program: ValidatedProgram) -> list[TraceStep]:
    steps = []
    region = str(state.region)
    for cell in stmt.reads:
        held = state.perms.get(cell)
        if held <= ZERO:
            raise _Failure(Diagnostic("InsufficientRead", f"{stmt.name} reads {program.render_cell(cell)} "
                                      "without permission", stmt.span, region, program.render_cell(cell), stmt.name))
        steps.append(TraceStep(stmt.name, "read", cell, held, held))
    held = state.perms.get(stmt.target)
    if held < ONE:
        raise _Failure(Diagnostic("InsufficientWrite", f"{stmt.name} writes {program.render_cell(stmt.target)} "
                                  f"holding only {held}", stmt.span, region,
                                  program.render_cell(stmt.target), stmt.name))
    steps.append(TraceStep(stmt.name, "write", stmt.target, held, held))
    return steps


class _Executor:
    def __init__(self, program: ValidatedProgram):
        self.program = program
        self.receives = receive_points(program)

    def fail(self, state: SymbolicState, steps, diag: Diagnostic, stage: int) -> list[RegionResult]:
        return [RegionResult(state.region, tuple(steps), replace(diag, region=str(state.region), stage=stage))]

    def run(self, state: SymbolicState, pc: int, steps: list[TraceStep], recv: int = 0) -> list[RegionResult]:
        body = self.program.body
        if pc == len(body):
            return [_finish(state, self.program, steps)]
        stmt = body[pc]
        pending = self.receives.get(stmt.label, []) if stmt.label else []
        try:
            if recv < len(pending):
                branches = _receive(state, pending[recv], stmt, self.program)
                return [r for st, extra in branches for r in self.run(st, pc, steps + extra, recv + 1)]
        except _Failure as exc:
            return self.fail(state, steps, exc.diag, 1 + 2 * pc)
        except AliasUndecided as exc:
            return self.fail(state, steps, _alias(exc, stmt), 1 + 2 * pc)
        try:
            if isinstance(stmt, AssignStmt):
                return self.run(state, pc + 1, steps + _assign(state, stmt, self.program))
            out = []
            for st in apply_send(state, stmt, self.program):
                extra = []
                if st.region.decides_all(self.program.is_iteration(stmt.distance)):
                    extra = [TraceStep(stmt.name, "send", cl.atom.cell, state.perms.get(cl.atom.cell),
                                       st.perms.get(cl.atom.cell)) for cl in stmt.formula]
                out.extend(self.run(st, pc + 1, steps + extra))
            return out
        except _Failure as exc:
            return self.fail(state, steps, exc.diag, 2 + 2 * pc)
        except AliasUndecided as exc:
            return self.fail(state, steps, _alias(exc, stmt), 2 + 2 * pc)


def _alias(exc: AliasUndecided, stmt) -> Diagnostic:
    return Diagnostic("AliasUndecided", str(exc), stmt.span, cell=str(exc.cell), statement=stmt.name)


def _finish(state: SymbolicState, program: ValidatedProgram, steps: list[TraceStep]) -> RegionResult:
    try:
        expected = normalize(program.ensures, state.region)
    except CapExceeded as exc:
        return RegionResult(state.region, tuple(steps), Diagnostic(
            "CapExceeded", f"postcondition claims more than full permission on {program.render_cell(exc.cell)}",
            program.source.loop.span, str(state.region), program.render_cell(exc.cell), stage=_POST_STAGE))
    missing, leftover = state.perms.compare(expected)
    if not missing and not leftover:
        return RegionResult(state.region, tuple(steps), None)
    parts = []
    if missing:
        parts.append("missing " + ", ".join(f"{program.render_cell(c)}:{f}" for c, f in missing))
    if leftover:
        parts.append("leftover " + ", ".join(f"{program.render_cell(c)}:{f}" for c, f in leftover))
    cell = program.render_cell((missing or leftover)[0][0])
    return RegionResult(state.region, tuple(steps), Diagnostic(
        "PostconditionMismatch", "; ".join(parts), program.source.loop.span, str(state.region), cell,
        stage=_POST_STAGE))


def _primary(results: list[RegionResult]) -> Diagnostic | None:
    failures = [(r.diagnostic.stage, k, r.diagnostic) for k, r in enumerate(results) if r.diagnostic]
    return min(failures, key=lambda t: (t[0], t[1]))[2] if failures else None


def check_iteration(program: ValidatedProgram) -> CheckReport:
    """Check that the body respects the iteration contract on every region."""
    uses = tuple(SendUse(s.site, s.target, s.distance, send_direction(s)) for s in program.sends)
    for s in program.sends:
        if s.distance <= 0:
            diag = Diagnostic("NonPositiveDistance", f"send distance {s.distance} must be positive "
                              "(permissions only flow to later iterations)", s.span, statement=s.name)
            return CheckReport((), diag, uses)
        if any(cl.guard for cl in s.formula):
            diag = Diagnostic("GuardedSend", "guarded send formulas are not supported", s.span, statement=s.name)
            return CheckReport((), diag, uses)

    executor = _Executor(program)
    receives = executor.receives
    clauses = program.requires + program.ensures
    regions = split_regions(clauses, program.sends, program, _cells(program))
    results: list[RegionResult] = []
    for region in regions:
        try:
            pre = normalize(program.requires, region)
        except CapExceeded as exc:
            cl = next(c for c in program.requires if c.atom.cell.array == exc.cell.array)
            results.append(RegionResult(region, (), Diagnostic(
                "CapExceeded", f"precondition claims more than full permission on {program.render_cell(exc.cell)}",
                cl.span, str(region), program.render_cell(exc.cell), stage=_PRE_STAGE)))
            continue
        except AliasUndecided as exc:
            results.append(RegionResult(region, (), Diagnostic(
                "AliasUndecided", str(exc), program.source.loop.span, str(region), str(exc.cell), stage=_PRE_STAGE)))
            continue
        state = SymbolicState(region, pre, tuple(
            (label, inst, region.decides_all(inst.guard)) for label, insts in receives.items() for inst in insts))
        results.extend(executor.run(state, 0, []))
    return CheckReport(tuple(results), _primary(results), uses)
