"""Name resolution, parameter kinds and affine normalisation."""

from __future__ import annotations

from ..affine import Affine, Constraint
from ..errors import (
    DuplicateLabel,
    InvalidFraction,
    KindMismatch,
    NonAffineIndex,
    UnknownIdentifier,
    UnknownSendTarget,
    UnsupportedBound,
    UnsupportedGuard,
)
from . import ast
from .ir import AssignStmt, Atom, Cell, Clause, SendStmt, ValidatedProgram

BUILTINS = frozenset({"min"})


class _NotAffine(Exception):
    def __init__(self, span, reason: str):
        self.span = span
        self.reason = reason


def _linear(e: ast.Expr, names: dict[str, Affine]) -> Affine:
    """Affine form of ``e`` where ``names`` maps the admissible variables."""
    if isinstance(e, ast.Num):
        return Affine.constant(e.value)
    if isinstance(e, ast.Var):
        if e.name not in names:
            raise _NotAffine(e.span, f"{e.name!r} may not appear here")
        return names[e.name]
    if isinstance(e, ast.Neg):
        return -_linear(e.operand, names)
    if isinstance(e, ast.BinOp):
        left, right = _linear(e.left, names), _linear(e.right, names)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if left.is_constant:
            return right.scale(left.const)
        if right.is_constant:
            return left.scale(right.const)
        raise _NotAffine(e.span, "product of two non-constant terms")
    raise _NotAffine(getattr(e, "span", None), "array reads and calls are not affine")


def _walk(e: ast.Expr):
    yield e
    if isinstance(e, ast.Index):
        yield from _walk(e.index)
    elif isinstance(e, ast.BinOp):
        yield from _walk(e.left)
        yield from _walk(e.right)
    elif isinstance(e, ast.Neg):
        yield from _walk(e.operand)
    elif isinstance(e, ast.Call):
        for a in e.args:
            yield from _walk(a)


def _reads(e: ast.Expr) -> list[ast.Index]:
    """Array reads in evaluation order (left to right, innermost index first)."""
    out: list[ast.Index] = []

    def visit(x: ast.Expr) -> None:
        if isinstance(x, ast.Index):
            visit(x.index)
            out.append(x)
        elif isinstance(x, ast.BinOp):
            visit(x.left)
            visit(x.right)
        elif isinstance(x, ast.Neg):
            visit(x.operand)
        elif isinstance(x, ast.Call):
            for a in x.args:
                visit(a)

    visit(e)
    return out


def _formula_exprs(clauses):
    for c in clauses:
        for g in c.guard:
            yield g.left
            yield g.right
        yield ast.Index(c.atom.array, c.atom.index, c.atom.span)


class _Usage:
    """Collects how each identifier is used, for inference and kind checks."""

    def __init__(self, iter_var: str):
        self.iter_var = iter_var
        self.arrays: dict[str, tuple[int, int]] = {}
        self.scalars: dict[str, tuple[int, int]] = {}
        self.bound_scalars: dict[str, tuple[int, int]] = {}

    def add(self, e: ast.Expr, in_bound: bool = False) -> None:
        for node in _walk(e):
            if isinstance(node, ast.Index):
                self.arrays.setdefault(node.array, node.span)
            elif isinstance(node, ast.Var) and node.name != self.iter_var:
                self.scalars.setdefault(node.name, node.span)
                if in_bound:
                    self.bound_scalars.setdefault(node.name, node.span)


def validate(program: ast.Program) -> ValidatedProgram:
    loop = program.loop
    ivar = loop.iter_var

    usage = _Usage(ivar)
    usage.add(loop.lower, in_bound=True)
    usage.add(loop.upper, in_bound=True)
    for e in _formula_exprs(loop.requires + loop.ensures):
        usage.add(e)
    for stmt in loop.body:
        if isinstance(stmt.kind, ast.Assign):
            usage.add(stmt.kind.target)
            usage.add(stmt.kind.rhs)
        else:
            for e in _formula_exprs(stmt.kind.formula):
                usage.add(e)

    for name, span in list(usage.arrays.items()) + list(usage.scalars.items()):
        if name == ivar and name in usage.arrays:
            raise KindMismatch(f"iteration variable {name!r} used as an array", span)
        if name in BUILTINS:
            raise KindMismatch(f"{name!r} is a builtin function", span)
    for name, span in usage.scalars.items():
        if name in usage.arrays:
            raise KindMismatch(f"{name!r} used both as array and scalar", span)

    if program.declared:
        declared = {p.name: p for p in program.params}
        seen: set[str] = set()
        for p in program.params:
            if p.name in seen or p.name == ivar:
                raise KindMismatch(f"{p.name!r} declared twice", p.span)
            seen.add(p.name)
        for name, span in usage.arrays.items():
            if name not in declared:
                raise UnknownIdentifier(f"undeclared array {name!r}", span)
            if declared[name].kind != ast.INT_ARRAY:
                raise KindMismatch(f"{name!r} is declared as a scalar", span)
        for name, span in usage.scalars.items():
            if name not in declared:
                raise UnknownIdentifier(f"undeclared identifier {name!r}", span)
            if declared[name].kind == ast.INT_ARRAY:
                raise KindMismatch(f"{name!r} is declared as an array", span)
        params = program.params
    else:
        inferred = []
        for name, span in usage.scalars.items():
            kind = ast.INT_SCALAR if name in usage.bound_scalars else ast.CONST_SCALAR
            inferred.append(ast.Param(name, kind, span))
        inferred.sort(key=lambda p: (p.kind != ast.INT_SCALAR, p.span))
        arrays = [ast.Param(n, ast.INT_ARRAY, s) for n, s in usage.arrays.items()]
        arrays.sort(key=lambda p: p.span)
        params = tuple(inferred + arrays)

    # bounds: affine in at most one scalar, which becomes the size parameter
    bound_names = sorted(usage.bound_scalars, key=lambda n: usage.bound_scalars[n])
    if len(bound_names) > 1:
        raise UnsupportedBound("loop bounds may mention a single size parameter", loop.span)
    size = bound_names[0] if bound_names else "N"
    if size == ivar:
        raise UnsupportedBound("loop bounds may not mention the iteration variable", loop.span)
    for e in (loop.lower, loop.upper):
        for node in _walk(e):
            if isinstance(node, ast.Var) and node.name == ivar:
                raise UnsupportedBound("loop bounds may not mention the iteration variable", node.span)

    bound_names_map = {size: Affine(0, 1, 0)}
    try:
        lower = _linear(loop.lower, bound_names_map)
        upper = _linear(loop.upper, bound_names_map)
    except _NotAffine as exc:
        raise UnsupportedBound(f"loop bound is not affine: {exc.reason}", exc.span or loop.span) from None
    if loop.inclusive_upper:
        upper = upper + 1

    names = {ivar: Affine(1, 0, 0), size: Affine(0, 1, 0)}

    def index(e: ast.Expr, span) -> Affine:
        try:
            return _linear(e, names)
        except _NotAffine as exc:
            raise NonAffineIndex(f"index is not affine in ({ivar}, {size}): {exc.reason}",
                                 exc.span or span) from None

    def clauses(raw) -> tuple[Clause, ...]:
        out = []
        for c in raw:
            guard = []
            for g in c.guard:
                try:
                    cons = Constraint.compare(_linear(g.left, names), g.op, _linear(g.right, names))
                except _NotAffine as exc:
                    raise UnsupportedGuard(f"guards must be linear in ({ivar}, {size}): {exc.reason}",
                                           exc.span or g.span) from None
                if not cons.trivially_true:
                    guard.append(cons)
            frac = c.atom.frac
            if not 0 < frac <= 1:
                raise InvalidFraction(f"permission {frac} outside (0,1]", c.atom.span)
            cell = Cell(c.atom.array, index(c.atom.index, c.atom.span))
            out.append(Clause(tuple(guard), Atom(cell, frac), c.span))
        return tuple(out)

    requires = clauses(loop.requires)
    ensures = clauses(loop.ensures)

    labels: dict[str, int] = {}
    for pos, stmt in enumerate(loop.body):
        if stmt.label is not None:
            if stmt.label in labels:
                raise DuplicateLabel(f"label {stmt.label!r} used twice", stmt.span)
            labels[stmt.label] = pos

    body = []
    site = 0
    for pos, stmt in enumerate(loop.body):
        name = stmt.label or f"#{pos}"
        k = stmt.kind
        if isinstance(k, ast.Assign):
            target = Cell(k.target.array, index(k.target.index, k.target.span))
            reads = tuple(Cell(r.array, index(r.index, r.span)) for r in _reads(k.rhs))
            body.append(AssignStmt(pos, name, stmt.label, target, reads, k.rhs, stmt.span))
        else:
            if k.target_label not in labels:
                raise UnknownSendTarget(f"send target {k.target_label!r} is not a label of the body", stmt.span)
            body.append(SendStmt(pos, name, stmt.label, site, clauses(k.formula), k.target_label,
                                 labels[k.target_label], k.distance, stmt.span))
            site += 1

    return ValidatedProgram(program, ivar, size, lower, upper, requires, ensures, tuple(body), tuple(params))
