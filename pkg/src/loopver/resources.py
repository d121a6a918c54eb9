"""Fractional permissions, linear regions over ``(i, N)`` and permission maps.

Feasibility of a region is decided by equality substitution followed by
Fourier-Motzkin elimination of one variable.  Elimination is exact over
the integers when the eliminated variable has unit coefficients, which
covers every guard of the shape ``i == k``, ``i <= N - k`` and so on.
Otherwise the real shadow is used: an empty shadow still proves
infeasibility, a non-empty one is reported as "unknown" and treated as
feasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Iterable, Iterator, Sequence

from .affine import EQ, GE, Affine, Constraint
from .frontend.ir import Cell, Clause, SendStmt

ONE = Fraction(1)
ZERO = Fraction(0)


def frac_add(a: Fraction, b: Fraction) -> Fraction:
    return a + b


def format_frac(f: Fraction) -> str:
    """Exact ``num/den`` rendering used in reports."""
    return f"{f.numerator}/{f.denominator}"


def parse_frac(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den or 1))


# -- feasibility ------------------------------------------------------------

# a constraint as (coef_i, coef_n, const, op)
_Row = tuple[int, int, int, str]


def _substitute(rows: list[_Row], var: int, coefs: tuple[int, int, int]) -> list[_Row]:
    """Replace variable ``var`` (0 = i, 1 = N) by ``coefs`` = (ci, cn, c)."""
    out = []
    for r in rows:
        k = r[var]
        base = [r[0], r[1], r[2]]
        base[var] = 0
        out.append((base[0] + k * coefs[0], base[1] + k * coefs[1], base[2] + k * coefs[2], r[3]))
    return out


def _feasible(constraints: Iterable[Constraint]) -> bool | None:
    """True / False when decided, None when only the real relaxation is non-empty."""
    rows: list[_Row] = [(c.expr.i, c.expr.n, c.expr.const, c.op) for c in constraints]
    exact = True
    # equalities with a unit coefficient are solved and substituted away
    while True:
        for k, (ci, cn, c, op) in enumerate(rows):
            if op != EQ:
                continue
            if ci == 0 and cn == 0:
                if c != 0:
                    return False
                rows.pop(k)
                break
            if abs(ci) == 1:
                # i = -ci * (cn*N + c)
                rest = rows[:k] + rows[k + 1:]
                rows = _substitute(rest, 0, (0, -ci * cn, -ci * c))
                break
            if abs(cn) == 1:
                rest = rows[:k] + rows[k + 1:]
                rows = _substitute(rest, 1, (-cn * ci, 0, -cn * c))
                break
            if ci == 0 or cn == 0:
                coef = ci or cn
                if c % coef:
                    return False
                var = 0 if ci else 1
                val = -c // coef
                rest = rows[:k] + rows[k + 1:]
                rows = _substitute(rest, var, (0, 0, val))
                break
        else:
            break
    ineqs: list[tuple[int, int, int]] = []
    for ci, cn, c, op in rows:
        if op == EQ:
            exact = False
            ineqs += [(ci, cn, c), (-ci, -cn, -c)]
        else:
            ineqs.append((ci, cn, c))

    # eliminate one variable, preferring one with unit coefficients
    def unit(var: int) -> bool:
        return all(abs(r[var]) <= 1 for r in ineqs)

    var = 0 if unit(0) else (1 if unit(1) else 0)
    if not unit(var):
        exact = False
    other = 1 - var
    lowers = [r for r in ineqs if r[var] > 0]
    uppers = [r for r in ineqs if r[var] < 0]
    single = [(r[other], r[2]) for r in ineqs if r[var] == 0]
    for lo in lowers:
        for up in uppers:
            a, b = lo[var], -up[var]
            single.append((b * lo[other] + a * up[other], b * lo[2] + a * up[2]))
    low, high = None, None
    for coef, c in single:
        if coef == 0:
            if c < 0:
                return False
        elif coef > 0:
            bound = ceil(Fraction(-c, coef))
            low = bound if low is None else max(low, bound)
        else:
            bound = floor(Fraction(-c, coef))
            high = bound if high is None else min(high, bound)
    if low is not None and high is not None and low > high:
        return False
    return True if exact else None


# -- regions ----------------------------------------------------------------


def _canonical(constraints: Sequence[Constraint]) -> tuple[Constraint, ...]:
    cons = [c for c in dict.fromkeys(constraints) if not c.trivially_true]
    # an equality pinning i lets every other constraint be stated over N only
    pin = next((c for c in cons if c.op == EQ and abs(c.expr.i) == 1), None)
    if pin is not None:
        e = pin.expr
        repl = Affine(0, -e.i * e.n, -e.i * e.const)
        cons = [pin] + [c if c is pin else c.substitute_i(repl) for c in cons if c is not pin]
        cons = [c for c in dict.fromkeys(cons) if not c.trivially_true]
    kept = list(cons)
    for c in list(cons):
        rest = [k for k in kept if k is not c]
        if _implies(rest, c):
            kept = rest
    kept.sort(key=lambda c: (c.expr.i == 0, c.op != EQ, -abs(c.expr.i), c.expr.n, c.expr.const, c))
    return tuple(kept)


def _implies(constraints: Sequence[Constraint], c: Constraint) -> bool:
    return all(_feasible([*constraints, neg]) is False for neg in c.negation())


@dataclass(frozen=True)
class Region:
    """A conjunction of linear constraints over ``(i, N)``."""

    constraints: tuple[Constraint, ...]

    @classmethod
    def build(cls, constraints: Iterable[Constraint]) -> Region | None:
        """Canonical region, or None when provably empty."""
        cons = tuple(constraints)
        if _feasible(cons) is False:
            return None
        return cls(_canonical(cons))

    def refine(self, *extra: Constraint) -> Region | None:
        return Region.build(self.constraints + extra)

    def implies(self, c: Constraint) -> bool:
        return _implies(self.constraints, c)

    def decides(self, c: Constraint) -> bool | None:
        if self.implies(c):
            return True
        if _feasible([*self.constraints, c]) is False:
            return False
        return None

    def decides_all(self, guard: Sequence[Constraint]) -> bool | None:
        """Truth of a conjunction on this region (None if undecided)."""
        results = [self.decides(g) for g in guard]
        if any(r is False for r in results):
            return False
        if all(r is True for r in results):
            return True
        return None

    def split(self, c: Constraint) -> list[tuple[Region, bool]]:
        """Sub-regions where ``c`` holds / fails, tagged with its truth value."""
        out = []
        pos = self.refine(c)
        if pos is not None:
            out.append((pos, True))
        for neg in c.negation():
            r = self.refine(neg)
            if r is not None:
                out.append((r, False))
        return out

    def contains(self, i: int, n: int) -> bool:
        return all(c.holds(i, n) for c in self.constraints)

    def render(self, ivar: str = "i", nvar: str = "N") -> str:
        return " && ".join(c.render(ivar, nvar) for c in self.constraints) or "true"

    def __str__(self) -> str:
        return self.render()


def _branches(c: Constraint) -> list[Constraint]:
    if c.op == GE:
        return [c, *c.negation()]
    lt, gt = c.negation()
    return [c, lt, gt]


def split_regions(clauses: Sequence[Clause], sends: Sequence[SendStmt], loop,
                  cells: Iterable[Cell] = ()) -> list[Region]:
    """Partition the iteration space so that every case distinction is decided.

    ``loop`` supplies the bounds (a ``ValidatedProgram``).  The atoms split
    on are the clause guards, the existence of the sending and receiving
    iteration of every send, and the equality of any two same-array cells
    in ``cells`` whose index difference is not constant.
    """
    atoms: list[Constraint] = []
    for cl in clauses:
        atoms.extend(cl.guard)
    for s in sends:
        if s.distance > 0:
            atoms.extend(loop.is_iteration(s.distance))
            atoms.extend(loop.is_iteration(-s.distance))
    cells = list(dict.fromkeys(cells))
    for k, a in enumerate(cells):
        for b in cells[k + 1:]:
            if a.array == b.array and not (a.index - b.index).is_constant:
                atoms.append(Constraint.make(a.index - b.index, EQ))
    atoms = [a for a in dict.fromkeys(atoms) if not a.is_trivial]

    base = Region.build(loop.bounds())
    if base is None:
        return []
    regions = [base]
    for atom in atoms:
        nxt = []
        for r in regions:
            if r.decides(atom) is not None:
                nxt.append(r)
                continue
            for b in _branches(atom):
                sub = r.refine(b)
                if sub is not None:
                    nxt.append(sub)
        regions = nxt
    return regions


# -- cells and permission maps ---------------------------------------------

EQUAL = "equal"
DISJOINT = "disjoint"
UNKNOWN = "unknown"


def cell_equal(c1: Cell, c2: Cell, region: Region) -> str:
    if c1.array != c2.array:
        return DISJOINT
    diff = c1.index - c2.index
    if diff == Affine():
        return EQUAL
    if diff.is_constant:
        return DISJOINT
    zero = Constraint.make(diff, EQ)
    if region.implies(zero):
        return EQUAL
    if _feasible([*region.constraints, zero]) is False:
        return DISJOINT
    return UNKNOWN


class PermissionFault(Exception):
    """Base for permission accounting failures."""

    code = "PermissionError"

    def __init__(self, cell: Cell, message: str):
        super().__init__(message)
        self.cell = cell


class CapExceeded(PermissionFault):
    code = "CapExceeded"


class InsufficientPermission(PermissionFault):
    code = "InsufficientPermission"


class AliasUndecided(PermissionFault):
    code = "AliasUndecided"


class PermissionMap:
    """Permissions held on a region, one entry per distinct cell.

    Immutable: ``add`` and ``subtract`` return new maps.  Cells that are
    equal on the region (``a[i]`` and ``a[N]`` when ``i == N``) share an
    entry, keyed by whichever spelling was inserted first.
    """

    __slots__ = ("region", "_entries")

    def __init__(self, region: Region, entries: tuple[tuple[Cell, Fraction], ...] = ()):
        self.region = region
        self._entries = entries

    def _find(self, cell: Cell) -> int | None:
        for k, (existing, _) in enumerate(self._entries):
            rel = cell_equal(existing, cell, self.region)
            if rel == EQUAL:
                return k
            if rel == UNKNOWN:
                raise AliasUndecided(cell, f"cannot decide whether {existing} and {cell} alias on {self.region}")
        return None

    def get(self, cell: Cell) -> Fraction:
        k = self._find(cell)
        return ZERO if k is None else self._entries[k][1]

    def add(self, cell: Cell, frac: Fraction) -> PermissionMap:
        k = self._find(cell)
        entries = list(self._entries)
        if k is None:
            total = frac
            entries.append((cell, frac))
        else:
            total = frac_add(entries[k][1], frac)
            entries[k] = (entries[k][0], total)
        if total > ONE:
            raise CapExceeded(cell, f"permission on {cell} would reach {total} > 1")
        return PermissionMap(self.region, tuple(entries))

    def subtract(self, cell: Cell, frac: Fraction) -> PermissionMap:
        k = self._find(cell)
        held = ZERO if k is None else self._entries[k][1]
        if held < frac:
            raise InsufficientPermission(cell, f"need {frac} of {cell}, hold {held}")
        entries = list(self._entries)
        if held == frac:
            del entries[k]
        else:
            entries[k] = (entries[k][0], held - frac)
        return PermissionMap(self.region, tuple(entries))

    def items(self) -> Iterator[tuple[Cell, Fraction]]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def as_dict(self) -> dict[Cell, Fraction]:
        return dict(self._entries)

    def compare(self, expected: PermissionMap) -> tuple[list[tuple[Cell, Fraction]], list[tuple[Cell, Fraction]]]:
        """``(missing, leftover)`` of this map against ``expected``."""
        missing, leftover = [], []
        for cell, want in expected.items():
            have = self.get(cell)
            if have < want:
                missing.append((cell, want - have))
        for cell, have in self.items():
            want = expected.get(cell)
            if have > want:
                leftover.append((cell, have - want))
        return missing, leftover

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermissionMap):
            return NotImplemented
        return self.compare(other) == ([], [])

    def __repr__(self) -> str:
        inner = ", ".join(f"{c}: {f}" for c, f in self._entries)
        return f"PermissionMap({{{inner}}})"


def normalize(clauses: Sequence[Clause], region: Region) -> PermissionMap:
    """Sum the atoms whose guards hold on ``region``.

    Raises ``CapExceeded`` when a cell would exceed full permission and
    ``ValueError`` when the region leaves a guard undecided.
    """
    perms = PermissionMap(region)
    for cl in clauses:
        holds = region.decides_all(cl.guard)
        if holds is None:
            raise ValueError(f"region {region} does not decide guard of {cl.render()}")
        if holds:
            perms = perms.add(cl.atom.cell, cl.atom.frac)
    return perms
