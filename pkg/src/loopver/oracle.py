"""Concrete execution oracle.

Runs a loop on small seeded inputs, extracts the loop-carried dependences
that actually occur, replays the iterations in orders allowed by the send
annotations and checks the static verdict against what was observed.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .aggregator import instantiate
from .classifier import BACKWARD_DEP, FORWARD_ONLY, INDEPENDENT, UNVERIFIED, Verdict
from .frontend import ast
from .frontend.ir import AssignStmt, ValidatedProgram
from .frontend.printer import pretty_print
from .pipeline import analyze

INPUT_LOW, INPUT_HIGH = -100, 100
INT64_MIN, INT64_MAX = -(2**63), 2**63 - 1
EXHAUSTIVE_MAX_N = 3
EXHAUSTIVE_LIMIT = 200_000

READ, WRITE = "read", "write"
RAW, WAR, WAW = "RAW", "WAR", "WAW"
FORWARD, BACKWARD = "forward", "backward"

Memory = dict[str, dict[int, int]]


class OracleError(Exception):
    code = "OracleError"


class OutOfFootprint(OracleError):
    code = "OutOfFootprint"

    def __init__(self, array: str, index: int, iteration: int, label: str):
        super().__init__(f"{label} in iteration {iteration} accesses {array}[{index}] "
                         "outside the aggregated precondition footprint")
        self.array, self.index = array, index


class ArithmeticOverflow(OracleError):
    code = "ArithmeticOverflow"


@dataclass(frozen=True)
class Inputs:
    scalars: dict[str, int]
    arrays: Memory

    def memory(self) -> Memory:
        return {k: dict(v) for k, v in self.arrays.items()}


@dataclass(frozen=True)
class AccessEvent:
    iteration: int
    label: str
    pos: int
    kind: str
    array: str
    index: int
    value: int


@dataclass(frozen=True)
class ExecutionTrace:
    n: int
    events: tuple[AccessEvent, ...]
    final: Memory


@dataclass(frozen=True, order=True)
class DependenceRecord:
    src_label: str
    sink_label: str
    kind: str
    distance: int
    array: str
    direction: str


def program_digest(program: ValidatedProgram) -> bytes:
    return hashlib.sha256(pretty_print(program.source).encode()).digest()


def _rng(program: ValidatedProgram, n: int, seed: int, stream: int) -> np.random.Generator:
    digest = program_digest(program)
    words = [int.from_bytes(digest[k:k + 4], "little") for k in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence(words + [n, seed, stream]))


def make_inputs(program: ValidatedProgram, n: int, seed: int) -> Inputs:
    """Uniform values in [-100, 100] for every scalar and every footprint cell."""
    rng = _rng(program, n, seed, 0)
    scalars = {}
    for name in program.scalars:
        if name != program.size_param:
            scalars[name] = int(rng.integers(INPUT_LOW, INPUT_HIGH + 1))
    table = instantiate(program.requires, program, n, cap=False)
    arrays: Memory = {}
    for name in sorted(table):
        cells = sorted(table[name])
        values = rng.integers(INPUT_LOW, INPUT_HIGH + 1, size=len(cells))
        arrays[name] = {j: int(v) for j, v in zip(cells, values)}
    return Inputs(scalars, arrays)


def _checked(v: int) -> int:
    if not INT64_MIN <= v <= INT64_MAX:
        raise ArithmeticOverflow(f"value {v} does not fit in 64 bits")
    return v


class _Machine:
    """Executes individual statement instances against a memory."""

    def __init__(self, program: ValidatedProgram, n: int, inputs: Inputs):
        self.program = program
        self.n = n
        self.scalars = dict(inputs.scalars)
        self.scalars[program.size_param] = n
        self.exprs = [s.kind for s in program.source.loop.body]

    def _eval(self, e: ast.Expr, env: dict[str, int], mem: Memory, out: list[AccessEvent],
              ctx: tuple[int, str, int]) -> int:
        if isinstance(e, ast.Num):
            return e.value
        if isinstance(e, ast.Var):
            return env[e.name]
        if isinstance(e, ast.Index):
            j = self._eval(e.index, env, mem, out, ctx)
            cells = mem.get(e.array, {})
            if j not in cells:
                raise OutOfFootprint(e.array, j, ctx[0], ctx[1])
            out.append(AccessEvent(ctx[0], ctx[1], ctx[2], READ, e.array, j, cells[j]))
            return cells[j]
        if isinstance(e, ast.Neg):
            return _checked(-self._eval(e.operand, env, mem, out, ctx))
        if isinstance(e, ast.BinOp):
            a = self._eval(e.left, env, mem, out, ctx)
            b = self._eval(e.right, env, mem, out, ctx)
            if e.op == "+":
                return _checked(a + b)
            if e.op == "-":
                return _checked(a - b)
            return _checked(a * b)
        if isinstance(e, ast.Call):
            return min(self._eval(x, env, mem, out, ctx) for x in e.args)
        raise TypeError(e)

    def step(self, i: int, pos: int, mem: Memory) -> list[AccessEvent]:
        """Execute statement ``pos`` of iteration ``i``; sends do nothing."""
        stmt = self.program.body[pos]
        if not isinstance(stmt, AssignStmt):
            return []
        assign = self.exprs[pos]
        env = dict(self.scalars)
        env[self.program.iter_var] = i
        out: list[AccessEvent] = []
        ctx = (i, stmt.name, pos)
        value = self._eval(assign.rhs, env, mem, out, ctx)
        j = self._eval(assign.target.index, env, mem, out, ctx)
        cells = mem.get(assign.target.array, {})
        if j not in cells:
            raise OutOfFootprint(assign.target.array, j, i, stmt.name)
        cells[j] = value
        out.append(AccessEvent(i, stmt.name, pos, WRITE, assign.target.array, j, value))
        return out


def run_sequential(program: ValidatedProgram, n: int, inputs: Inputs) -> ExecutionTrace:
    machine = _Machine(program, n, inputs)
    mem = inputs.memory()
    events: list[AccessEvent] = []
    for i in program.iterations(n):
        for pos in range(len(program.body)):
            events.extend(machine.step(i, pos, mem))
    return ExecutionTrace(n, tuple(events), mem)


def compute_dependences(trace: ExecutionTrace) -> list[DependenceRecord]:
    """Conflicting accesses to one cell from iterations i < j, at least one a write."""
    by_cell: dict[tuple[str, int], list[AccessEvent]] = {}
    for ev in trace.events:
        by_cell.setdefault((ev.array, ev.index), []).append(ev)
    found: set[DependenceRecord] = set()
    for (array, _), evs in by_cell.items():
        for k, first in enumerate(evs):
            for second in evs[k + 1:]:
                if first.iteration >= second.iteration:
                    continue
                if first.kind == READ and second.kind == READ:
                    continue
                kind = WAW if first.kind == second.kind else (RAW if first.kind == WRITE else WAR)
                direction = FORWARD if first.pos <= second.pos else BACKWARD
                found.add(DependenceRecord(first.label, second.label, kind,
                                           second.iteration - first.iteration, array, direction))
    return sorted(found)


Node = tuple[int, int]  # (iteration, body position)


@dataclass
class ScheduleDag:
    nodes: list[Node]
    succ: dict[Node, list[Node]]

    @classmethod
    def build(cls, program: ValidatedProgram, n: int) -> ScheduleDag:
        iters = program.iterations(n)
        nodes = [(i, p) for i in iters for p in range(len(program.body))]
        succ: dict[Node, list[Node]] = {v: [] for v in nodes}
        for i in iters:
            for p in range(len(program.body) - 1):
                succ[(i, p)].append((i, p + 1))
            for s in program.sends:
                if i + s.distance in iters:
                    succ[(i, s.pos)].append((i + s.distance, s.target_pos))
        return cls(nodes, succ)

    def indegrees(self) -> dict[Node, int]:
        deg = {v: 0 for v in self.nodes}
        for v in self.nodes:
            for w in self.succ[v]:
                deg[w] += 1
        return deg

    def topological(self, rng: np.random.Generator | None = None) -> list[Node] | None:
        """A linear extension; random choice among ready nodes when ``rng`` is given.

        Returns None when the graph has a cycle.
        """
        deg = self.indegrees()
        ready = [v for v in self.nodes if deg[v] == 0]
        order: list[Node] = []
        while ready:
            k = int(rng.integers(len(ready))) if rng is not None else 0
            v = ready.pop(k)
            order.append(v)
            for w in self.succ[v]:
                deg[w] -= 1
                if deg[w] == 0:
                    ready.append(w)
                    ready.sort()
        return order if len(order) == len(self.nodes) else None

    def reachability(self, order: list[Node]) -> dict[Node, int]:
        bit = {v: 1 << k for k, v in enumerate(self.nodes)}
        reach: dict[Node, int] = {}
        for v in reversed(order):
            r = 0
            for w in self.succ[v]:
                r |= bit[w] | reach[w]
            reach[v] = r
        return reach

    def extensions(self, limit: int) -> Iterator[list[Node]]:
        """Every linear extension, stopping after ``limit``."""
        deg = self.indegrees()
        order: list[Node] = []
        count = 0

        def rec() -> Iterator[list[Node]]:
            nonlocal count
            if len(order) == len(self.nodes):
                count += 1
                yield list(order)
                return
            for v in [v for v in self.nodes if deg[v] == 0 and v not in placed]:
                if count >= limit:
                    return
                placed.add(v)
                order.append(v)
                for w in self.succ[v]:
                    deg[w] -= 1
                yield from rec()
                for w in self.succ[v]:
                    deg[w] += 1
                order.pop()
                placed.discard(v)

        placed: set[Node] = set()
        yield from rec()


@dataclass(frozen=True)
class Race:
    first: tuple[int, str]
    second: tuple[int, str]
    array: str
    index: int
    kinds: tuple[str, str]


@dataclass(frozen=True)
class Mismatch:
    trial: int
    cells: tuple[tuple[str, int], ...]  # differing cells, or empty if execution failed
    error: str | None = None


@dataclass(frozen=True)
class EquivalenceReport:
    n: int
    seed: int
    trials: int
    mismatches: tuple[Mismatch, ...]
    races: tuple[Race, ...]
    cyclic: bool = False
    exhaustive: bool = False
    extensions: int = 0  # schedules checked by enumeration
    exhaustive_mismatches: int = 0

    @property
    def equivalent(self) -> bool:
        return not self.cyclic and not self.mismatches and not self.exhaustive_mismatches

    @property
    def race_free(self) -> bool:
        return not self.races


def _diff(a: Memory, b: Memory) -> tuple[tuple[str, int], ...]:
    out = []
    for name in sorted(set(a) | set(b)):
        x, y = a.get(name, {}), b.get(name, {})
        out += [(name, j) for j in sorted(set(x) | set(y)) if x.get(j) != y.get(j)]
    return tuple(out)


def _races(program: ValidatedProgram, dag: ScheduleDag, trace: ExecutionTrace) -> tuple[Race, ...]:
    order = dag.topological()
    assert order is not None
    reach = dag.reachability(order)
    bit = {v: 1 << k for k, v in enumerate(dag.nodes)}
    per_cell: dict[tuple[str, int], dict[Node, set[str]]] = {}
    for ev in trace.events:
        per_cell.setdefault((ev.array, ev.index), {}).setdefault((ev.iteration, ev.pos), set()).add(ev.kind)
    label = {s.pos: s.name for s in program.body}
    races = []
    for (array, j), nodes in per_cell.items():
        items = sorted(nodes.items())
        for k, (u, ku) in enumerate(items):
            for v, kv in items[k + 1:]:
                if WRITE not in ku and WRITE not in kv:
                    continue
                if reach[u] & bit[v] or reach[v] & bit[u]:
                    continue
                kinds = (WRITE if WRITE in ku else READ, WRITE if WRITE in kv else READ)
                races.append(Race((u[0], label[u[1]]), (v[0], label[v[1]]), array, j, kinds))
    return tuple(sorted(races, key=lambda r: (r.array, r.index, r.first, r.second)))


def _execute(machine: _Machine, order: list[Node], inputs: Inputs) -> Memory:
    mem = inputs.memory()
    for i, p in order:
        machine.step(i, p, mem)
    return mem


def replay_schedules(program: ValidatedProgram, n: int, inputs: Inputs, trials: int, seed: int
                     ) -> EquivalenceReport:
    """Execute send-respecting interleavings of the iterations and compare to sequential.

    Trial 0 is always the sequential order.  For ``n <= 3`` every linear
    extension is also executed.
    """
    reference = run_sequential(program, n, inputs)
    dag = ScheduleDag.build(program, n)
    if dag.topological() is None:
        return EquivalenceReport(n, seed, trials, (), (), cyclic=True)
    machine = _Machine(program, n, inputs)
    rng = _rng(program, n, seed, 1)
    sequential = [(i, p) for i in program.iterations(n) for p in range(len(program.body))]
    mismatches = []
    for t in range(trials):
        order = sequential if t == 0 else dag.topological(rng)
        try:
            final = _execute(machine, order, inputs)
        except OracleError as exc:
            mismatches.append(Mismatch(t, (), f"{exc.code}: {exc}"))
            continue
        cells = _diff(final, reference.final)
        if cells:
            mismatches.append(Mismatch(t, cells))
    exhaustive, count, bad = False, 0, 0
    if n <= EXHAUSTIVE_MAX_N:
        for order in dag.extensions(EXHAUSTIVE_LIMIT):
            count += 1
            try:
                if _diff(_execute(machine, order, inputs), reference.final):
                    bad += 1
            except OracleError:
                bad += 1
        exhaustive = count < EXHAUSTIVE_LIMIT
    return EquivalenceReport(n, seed, trials, tuple(mismatches), _races(program, dag, reference),
                             exhaustive=exhaustive, extensions=count, exhaustive_mismatches=bad)


def verdict_agrees(kind: str, observed: list[DependenceRecord]) -> bool:
    if kind == INDEPENDENT:
        return not observed
    if kind == FORWARD_ONLY:
        return bool(observed) and all(d.direction == FORWARD for d in observed)
    if kind == BACKWARD_DEP:
        return any(d.direction == BACKWARD for d in observed)
    return False


@dataclass(frozen=True)
class RunResult:
    n: int
    seed: int
    dependences: tuple[DependenceRecord, ...]
    equivalence: EquivalenceReport | None
    error: str | None = None


@dataclass(frozen=True)
class OracleReport:
    verdict: str
    verified: bool
    n_values: tuple[int, ...]
    seeds: tuple[int, ...]
    trials: int
    observed: tuple[DependenceRecord, ...]
    agree: bool
    runs: tuple[RunResult, ...]
    counterexample: dict | None = field(default=None)

    @property
    def race_free(self) -> bool:
        return all(r.equivalence is not None and r.equivalence.race_free for r in self.runs)

    @property
    def equivalent(self) -> bool:
        return all(r.error is None and r.equivalence is not None and r.equivalence.equivalent
                   for r in self.runs)

    @property
    def ok(self) -> bool:
        if not self.agree:
            return False
        return not self.verified or (self.race_free and self.equivalent)


def _counterexample(verdict: str, runs: list[RunResult]) -> dict | None:
    for r in runs:
        if r.error is not None:
            return {"n": r.n, "seed": r.seed, "error": r.error}
    for r in runs:
        for d in r.dependences:
            if verdict == INDEPENDENT or (verdict == FORWARD_ONLY and d.direction == BACKWARD):
                return {"n": r.n, "seed": r.seed, "dependence": d}
    for r in runs:
        if r.equivalence is not None and r.equivalence.races:
            return {"n": r.n, "seed": r.seed, "race": r.equivalence.races[0]}
    return None


def cross_validate(program: ValidatedProgram, n_values: list[int], seeds: list[int], trials: int = 50,
                   verdict: Verdict | None = None) -> OracleReport:
    """Compare the static verdict with the dependences observed over every (N, seed)."""
    if verdict is None:
        verdict = analyze(program).verdict

    runs: list[RunResult] = []
    observed: set[DependenceRecord] = set()
    for n in n_values:
        for seed in seeds:
            inputs = make_inputs(program, n, seed)
            try:
                trace = run_sequential(program, n, inputs)
            except OracleError as exc:
                runs.append(RunResult(n, seed, (), None, f"{exc.code}: {exc}"))
                continue
            deps = compute_dependences(trace)
            observed.update(deps)
            eq = replay_schedules(program, n, inputs, trials, seed)
            runs.append(RunResult(n, seed, tuple(deps), eq))
    obs = sorted(observed)
    errored = any(r.error is not None for r in runs)
    agree = verdict_agrees(verdict.kind, obs) and not errored
    cex = None if agree and all(r.equivalence.race_free for r in runs) else _counterexample(verdict.kind, runs)
    return OracleReport(verdict.kind, verdict.kind != UNVERIFIED, tuple(n_values), tuple(seeds), trials,
                        tuple(obs), agree, tuple(runs), cex)
