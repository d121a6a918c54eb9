"""Checked program representation consumed by every analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from ..affine import Affine, Constraint
from . import ast
from .printer import format_fraction

Span = tuple[int, int]


@dataclass(frozen=True, order=True)
class Cell:
    array: str
    index: Affine

    def shift(self, k: int) -> Cell:
        return Cell(self.array, self.index.shift(k))

    def render(self, ivar: str = "i", nvar: str = "N") -> str:
        return f"{self.array}[{self.index.render(ivar, nvar)}]"

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class Atom:
    cell: Cell
    frac: Fraction

    def render(self, ivar: str = "i", nvar: str = "N") -> str:
        return f"perm({self.cell.render(ivar, nvar)},{format_fraction(self.frac)})"


@dataclass(frozen=True)
class Clause:
    guard: tuple[Constraint, ...]
    atom: Atom
    span: Span = field(default=(0, 0), compare=False)

    def shift(self, k: int) -> Clause:
        """The clause as seen from iteration ``i + k``."""
        repl = Affine(1, 0, k)
        guard = tuple(g.substitute_i(repl) for g in self.guard)
        return Clause(guard, Atom(self.atom.cell.shift(k), self.atom.frac), self.span)

    def render(self, ivar: str = "i", nvar: str = "N") -> str:
        atom = self.atom.render(ivar, nvar)
        if not self.guard:
            return atom
        return " && ".join(g.render(ivar, nvar) for g in self.guard) + " ==> " + atom


@dataclass(frozen=True)
class AssignStmt:
    pos: int
    name: str
    label: str | None
    target: Cell
    reads: tuple[Cell, ...]  # in evaluation order, duplicates kept
    rhs: ast.Expr
    span: Span


@dataclass(frozen=True)
class SendStmt:
    pos: int
    name: str
    label: str | None
    site: int
    formula: tuple[Clause, ...]
    target: str
    target_pos: int
    distance: int
    span: Span


Stmt = Union[AssignStmt, SendStmt]


@dataclass(frozen=True)
class ValidatedProgram:
    source: ast.Program
    iter_var: str
    size_param: str
    lower: Affine  # constant in i
    upper: Affine  # exclusive
    requires: tuple[Clause, ...]
    ensures: tuple[Clause, ...]
    body: tuple[Stmt, ...]
    params: tuple[ast.Param, ...]

    @property
    def sends(self) -> tuple[SendStmt, ...]:
        return tuple(s for s in self.body if isinstance(s, SendStmt))

    @property
    def arrays(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params if p.kind == ast.INT_ARRAY)

    @property
    def scalars(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params if p.kind != ast.INT_ARRAY)

    def statement(self, label: str) -> Stmt:
        for s in self.body:
            if s.label == label:
                return s
        raise KeyError(label)

    def is_iteration(self, offset: int) -> tuple[Constraint, Constraint]:
        """Constraints stating that iteration ``i + offset`` exists."""
        k = Affine(1, 0, offset)
        return (Constraint.make(k - self.lower, ">="), Constraint.make(self.upper - k - 1, ">="))

    def bounds(self) -> tuple[Constraint, Constraint]:
        return self.is_iteration(0)

    def iterations(self, n: int) -> range:
        return range(self.lower.evaluate(0, n), self.upper.evaluate(0, n))

    def render_cell(self, cell: Cell) -> str:
        return cell.render(self.iter_var, self.size_param)
