"""Syntax tree produced by the parser.

Spans are excluded from equality so that two parses of differently
formatted sources compare equal when they denote the same program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

Span = tuple[int, int]
NOSPAN: Span = (0, 0)


@dataclass(frozen=True)
class Num:
    value: int
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class Index:
    array: str
    index: "Expr"
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "Expr"
    right: "Expr"
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]
    span: Span = field(default=NOSPAN, compare=False)


Expr = Union[Num, Var, Index, BinOp, Neg, Call]


@dataclass(frozen=True)
class Compare:
    op: str  # == < <= > >=
    left: Expr
    right: Expr
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class PermAtom:
    array: str
    index: Expr
    frac: Fraction
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class ContractClause:
    guard: tuple[Compare, ...]
    atom: PermAtom
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class Assign:
    target: Index
    rhs: Expr


@dataclass(frozen=True)
class Send:
    formula: tuple[ContractClause, ...]
    target_label: str
    distance: int


@dataclass(frozen=True)
class Statement:
    label: str | None
    kind: Assign | Send
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class LoopSpec:
    iter_var: str
    lower: Expr
    upper: Expr
    inclusive_upper: bool
    requires: tuple[ContractClause, ...]
    ensures: tuple[ContractClause, ...]
    body: tuple[Statement, ...]
    span: Span = field(default=NOSPAN, compare=False)


INT_SCALAR = "int-scalar"
INT_ARRAY = "int-array"
CONST_SCALAR = "const-scalar"


@dataclass(frozen=True)
class Param:
    name: str
    kind: str
    span: Span = field(default=NOSPAN, compare=False)


@dataclass(frozen=True)
class Program:
    params: tuple[Param, ...]
    loop: LoopSpec
    # False when the source has no declaration prologue and parameters are
    # inferred from use
    declared: bool = False
