"""Integer affine forms over the iteration variable and the size parameter.

Every index, bound and guard the checker reasons about is an ``Affine``
``i*i + n*N + const``.  Comparisons are kept in the normal form
``expr >= 0`` or ``expr == 0`` (see ``Constraint``).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd


@dataclass(frozen=True, order=True)
class Affine:
    i: int = 0
    n: int = 0
    const: int = 0

    @classmethod
    def constant(cls, value: int) -> Affine:
        return cls(0, 0, value)

    def __add__(self, other: Affine | int) -> Affine:
        if isinstance(other, int):
            return Affine(self.i, self.n, self.const + other)
        return Affine(self.i + other.i, self.n + other.n, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> Affine:
        return Affine(-self.i, -self.n, -self.const)

    def __sub__(self, other: Affine | int) -> Affine:
        return self + (-other)

    def __rsub__(self, other: int) -> Affine:
        return (-self) + other

    def scale(self, k: int) -> Affine:
        return Affine(self.i * k, self.n * k, self.const * k)

    def substitute_i(self, replacement: Affine) -> Affine:
        """Replace the iteration variable by ``replacement``."""
        return replacement.scale(self.i) + Affine(0, self.n, self.const)

    def shift(self, k: int) -> Affine:
        """The form evaluated at iteration ``i + k``."""
        return self.substitute_i(Affine(1, 0, k))

    @property
    def is_constant(self) -> bool:
        return self.i == 0 and self.n == 0

    def evaluate(self, i: int, n: int) -> int:
        return self.i * i + self.n * n + self.const

    def render(self, ivar: str = "i", nvar: str = "N") -> str:
        parts: list[str] = []
        for coef, name in ((self.i, ivar), (self.n, nvar)):
            if coef == 0:
                continue
            mag = abs(coef)
            term = name if mag == 1 else f"{mag}*{name}"
            if coef < 0:
                parts.append("-" + term)
            else:
                parts.append(("+" if parts else "") + term)
        if self.const or not parts:
            if self.const < 0:
                parts.append(str(self.const))
            else:
                parts.append(("+" if parts else "") + str(self.const))
        return "".join(parts)

    def __str__(self) -> str:
        return self.render()


GE = ">="
EQ = "=="


@dataclass(frozen=True, order=True)
class Constraint:
    """``expr >= 0`` or ``expr == 0``; build through :meth:`make`."""

    expr: Affine
    op: str

    @classmethod
    def make(cls, expr: Affine, op: str) -> Constraint:
        g = gcd(expr.i, expr.n)
        if g > 1:
            if op == GE:
                # integer tightening: g*x + c >= 0  <=>  x + floor(c/g) >= 0
                expr = Affine(expr.i // g, expr.n // g, expr.const // g)
            elif expr.const % g == 0:
                expr = Affine(expr.i // g, expr.n // g, expr.const // g)
        if op == EQ and (expr.i < 0 or (expr.i == 0 and expr.n < 0)):
            expr = -expr
        return cls(expr, op)

    @classmethod
    def compare(cls, lhs: Affine, op: str, rhs: Affine) -> Constraint:
        """Normalise ``lhs op rhs`` for op in ``== < <= > >=``."""
        if op == "==":
            return cls.make(lhs - rhs, EQ)
        if op == ">=":
            return cls.make(lhs - rhs, GE)
        if op == ">":
            return cls.make(lhs - rhs - 1, GE)
        if op == "<=":
            return cls.make(rhs - lhs, GE)
        if op == "<":
            return cls.make(rhs - lhs - 1, GE)
        raise ValueError(f"unsupported comparison {op!r}")

    @property
    def is_trivial(self) -> bool:
        return self.expr.is_constant

    @property
    def trivially_true(self) -> bool:
        c = self.expr.const
        return self.is_trivial and (c >= 0 if self.op == GE else c == 0)

    def negation(self) -> tuple[Constraint, ...]:
        """Disjuncts whose union is the complement of this constraint."""
        if self.op == GE:
            return (Constraint.make(-self.expr - 1, GE),)
        return (Constraint.make(-self.expr - 1, GE), Constraint.make(self.expr - 1, GE))

    def holds(self, i: int, n: int) -> bool:
        v = self.expr.evaluate(i, n)
        return v >= 0 if self.op == GE else v == 0

    def substitute_i(self, replacement: Affine) -> Constraint:
        return Constraint.make(self.expr.substitute_i(replacement), self.op)

    def render(self, ivar: str = "i", nvar: str = "N") -> str:
        e = self.expr
        if e.i != 0:
            lead, rest = Affine(e.i, 0, 0), Affine(0, e.n, e.const)
        elif e.n != 0:
            lead, rest = Affine(0, e.n, 0), Affine(0, 0, e.const)
        else:
            return f"{e.const}{self.op}0"
        op = self.op
        if (lead.i or lead.n) < 0:
            lead, rest = -lead, -rest
            if op == GE:
                op = "<="
        return f"{lead.render(ivar, nvar)}{op}{(-rest).render(ivar, nvar)}"

    def __str__(self) -> str:
        return self.render()
