"""Footprint of a contract summed over all iterations of the loop.

The symbolic summary describes, per array, consecutive segments
``[start, stop]`` of global indices (endpoints affine in the size
parameter) together with the total fraction claimed on each cell of the
segment.  Segment endpoints are ordered by their behaviour for large
``N``; the summary records the smallest ``N`` from which that order (and
every guard decision) is stable.  Below it the footprint is tabulated by
instantiating the loop concretely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from math import ceil, floor
from typing import Sequence

from .affine import EQ, GE, Affine
from .frontend.ir import Cell, Clause, ValidatedProgram
from .resources import ONE, ZERO, CapExceeded, PermissionFault

SYMBOLIC_FROM = 3
DEFAULT_BOUND = 16

Table = dict[str, dict[int, Fraction]]


class ZeroCoefficient(PermissionFault):
    code = "ZeroCoefficient"


@dataclass(frozen=True)
class Segment:
    start: Affine
    stop: Affine  # inclusive
    total: Fraction


@dataclass(frozen=True)
class FootprintSummary:
    size_param: str
    symbolic: bool
    # segments per array, valid for N >= valid_from (empty when not symbolic)
    arrays: dict[str, tuple[Segment, ...]]
    valid_from: int
    # concrete tables for N in [tabulated_from, valid_from)
    small: dict[int, Table] = field(default_factory=dict)
    # loop has no iterations for N < empty_below (None: not known)
    empty_below: int | None = None

    def at(self, n: int) -> Table:
        """Per-cell totals for a concrete size ``n``."""
        if n in self.small:
            return self.small[n]
        if self.empty_below is not None and n < self.empty_below:
            return {}
        if not self.symbolic or n < self.valid_from:
            raise ValueError(f"footprint not available for {self.size_param}={n}")
        out: Table = {}
        for array, segs in self.arrays.items():
            cells: dict[int, Fraction] = {}
            for seg in segs:
                for j in range(seg.start.evaluate(0, n), seg.stop.evaluate(0, n) + 1):
                    cells[j] = seg.total
            if cells:
                out[array] = cells
        return out


class _Horizon:
    """Eventual comparisons of affine functions of N, tracking a stability threshold."""

    def __init__(self) -> None:
        self.threshold: int | None = None

    def bump(self, t: int) -> None:
        self.threshold = t if self.threshold is None else max(self.threshold, t)

    def cmp(self, p: Affine, q: Affine) -> int:
        d = p.n - q.n
        e = p.const - q.const
        if d == 0:
            return (e > 0) - (e < 0)
        self.bump(floor(Fraction(-e, d)) + 1)
        return 1 if d > 0 else -1

    def emax(self, items: Sequence[Affine]) -> Affine:
        best = items[0]
        for x in items[1:]:
            if self.cmp(x, best) > 0:
                best = x
        return best

    def emin(self, items: Sequence[Affine]) -> Affine:
        best = items[0]
        for x in items[1:]:
            if self.cmp(x, best) < 0:
                best = x
        return best


def _pinned(clause: Clause) -> bool:
    return any(g.op == EQ and g.expr.i != 0 for g in clause.guard)


def _symbolic_ok(clauses: Sequence[Clause], program: ValidatedProgram) -> bool:
    if (program.upper - program.lower).n <= 0:
        return False
    for cl in clauses:
        if any(abs(g.expr.i) > 1 for g in cl.guard):
            return False
        if abs(cl.atom.cell.index.i) > 1 and not _pinned(cl):
            return False
    return True


def _check_coefficients(clauses: Sequence[Clause]) -> None:
    for cl in clauses:
        if cl.atom.cell.index.i == 0 and not _pinned(cl):
            raise ZeroCoefficient(cl.atom.cell, f"every iteration claims {cl.atom.render()}; "
                                  "a constant index needs a guard pinning the iteration")


def _empty_below(program: ValidatedProgram) -> int | None:
    span = program.upper - program.lower
    if span.n <= 0:
        return None
    return ceil(Fraction(1 - span.const, span.n))


def instantiate(clauses: Sequence[Clause], program: ValidatedProgram, n: int, cap: bool = True) -> Table:
    """Concrete per-cell totals at size ``n`` by running over every iteration."""
    table: Table = {}
    for i in program.iterations(n):
        for cl in clauses:
            if all(g.holds(i, n) for g in cl.guard):
                cells = table.setdefault(cl.atom.cell.array, {})
                j = cl.atom.cell.index.evaluate(i, n)
                total = cells.get(j, ZERO) + cl.atom.frac
                if cap and total > ONE:
                    raise CapExceeded(Cell(cl.atom.cell.array, Affine.constant(j)),
                                      f"{cl.atom.cell.array}[{j}] reaches {total} at "
                                      f"{program.size_param}={n}")
                cells[j] = total
    return table


def _intervals(clauses: Sequence[Clause], program: ValidatedProgram, hz: _Horizon
               ) -> dict[str, list[tuple[Affine, Affine, Fraction]]]:
    out: dict[str, list[tuple[Affine, Affine, Fraction]]] = {}
    for cl in clauses:
        lows = [program.lower]
        highs = [program.upper - 1]
        alive = True
        for g in cl.guard:
            rest = Affine(0, g.expr.n, g.expr.const)
            if g.expr.i == 0:
                s = hz.cmp(rest, Affine())
                alive &= (s >= 0) if g.op == GE else (rest == Affine())
            elif g.op == EQ:
                pin = -rest.scale(g.expr.i)
                lows.append(pin)
                highs.append(pin)
            elif g.expr.i > 0:
                lows.append(-rest)
            else:
                highs.append(rest)
        if not alive:
            continue
        lo, hi = hz.emax(lows), hz.emin(highs)
        if hz.cmp(hi, lo) < 0:
            continue
        idx = cl.atom.cell.index
        off = Affine(0, idx.n, idx.const)
        if idx.i == 1:
            jlo, jhi = lo + off, hi + off
        elif idx.i == -1:
            jlo, jhi = off - hi, off - lo
        else:
            # pinned iteration: a single cell
            jlo = jhi = lo.scale(idx.i) + off
        out.setdefault(cl.atom.cell.array, []).append((jlo, jhi, cl.atom.frac))
    return out


def _segments(intervals: list[tuple[Affine, Affine, Fraction]], hz: _Horizon) -> tuple[Segment, ...]:
    points = list(dict.fromkeys([p for lo, hi, _ in intervals for p in (lo, hi + 1)]))
    points.sort(key=cmp_to_key(hz.cmp))
    for a, b in zip(points, points[1:]):
        hz.cmp(b, a)
    rank = {p: k for k, p in enumerate(points)}
    raw: list[tuple[int, Fraction]] = []
    for k in range(len(points) - 1):
        total = sum((f for lo, hi, f in intervals if rank[lo] <= k and rank[hi + 1] >= k + 1), ZERO)
        raw.append((k, total))
    segs: list[Segment] = []
    for k, total in raw:
        if total == ZERO:
            continue
        start, stop = points[k], points[k + 1] - 1
        if segs and segs[-1].total == total and segs[-1].stop + 1 == start:
            segs[-1] = Segment(segs[-1].start, stop, total)
        else:
            segs.append(Segment(start, stop, total))
    return tuple(segs)


def aggregate(clauses: Sequence[Clause], program: ValidatedProgram,
              assume_bound: int = DEFAULT_BOUND) -> FootprintSummary:
    """Separating conjunction of ``clauses`` over every iteration of ``program``.

    Raises ``CapExceeded`` when some cell totals more than 1 for some size
    and ``ZeroCoefficient`` when an unguarded atom names the same cell in
    every iteration.
    """
    _check_coefficients(clauses)
    low = _empty_below(program)
    if not _symbolic_ok(clauses, program):
        small = {n: instantiate(clauses, program, n) for n in range(0, assume_bound + 1)}
        return FootprintSummary(program.size_param, False, {}, assume_bound + 1, small, low)

    hz = _Horizon()
    per_array = _intervals(clauses, program, hz)
    arrays = {name: _segments(iv, hz) for name, iv in per_array.items()}
    arrays = {k: v for k, v in arrays.items() if v}
    valid_from = max(SYMBOLIC_FROM, hz.threshold if hz.threshold is not None else SYMBOLIC_FROM)
    for name, segs in arrays.items():
        for seg in segs:
            if seg.total > ONE:
                j = seg.start.evaluate(0, valid_from)
                raise CapExceeded(Cell(name, seg.start), f"{name}[{seg.start.render(nvar=program.size_param)}] "
                                  f"totals {seg.total} (e.g. {name}[{j}] at {program.size_param}={valid_from})")
    start = low if low is not None else valid_from
    small = {n: instantiate(clauses, program, n) for n in range(start, valid_from)}
    return FootprintSummary(program.size_param, True, arrays, valid_from, small, low)


@dataclass(frozen=True)
class BalanceReport:
    preserving: bool
    pre: FootprintSummary | None
    post: FootprintSummary | None
    differing: tuple[str, ...] = ()
    error: PermissionFault | None = None
    error_side: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _differences(pre: FootprintSummary, post: FootprintSummary, assume_bound: int) -> set[str]:
    diff: set[str] = set()
    if pre.symbolic and post.symbolic:
        for name in set(pre.arrays) | set(post.arrays):
            if pre.arrays.get(name) != post.arrays.get(name):
                diff.add(name)
        lows = [x for x in (pre.empty_below, post.empty_below) if x is not None]
        sizes = range(min(lows + [pre.valid_from, post.valid_from]), max(pre.valid_from, post.valid_from))
    else:
        sizes = range(0, assume_bound + 1)
    for n in sizes:
        a, b = pre.at(n), post.at(n)
        diff.update(k for k in set(a) | set(b) if a.get(k) != b.get(k))
    return diff


def check_balance(program: ValidatedProgram, assume_bound: int = DEFAULT_BOUND) -> BalanceReport:
    """Aggregate both sides of the contract and report whether they coincide."""
    try:
        pre = aggregate(program.requires, program, assume_bound)
    except PermissionFault as exc:
        return BalanceReport(False, None, None, (), exc, "requires")
    try:
        post = aggregate(program.ensures, program, assume_bound)
    except PermissionFault as exc:
        return BalanceReport(False, pre, None, (), exc, "ensures")
    diff = _differences(pre, post, assume_bound)
    return BalanceReport(not diff, pre, post, tuple(sorted(diff)))
