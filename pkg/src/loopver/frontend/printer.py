from __future__ import annotations

from fractions import Fraction

from . import ast

_PREC = {"+": 1, "-": 1, "*": 2}


def format_fraction(frac: Fraction) -> str:
    return str(frac.numerator) if frac.denominator == 1 else f"{frac.numerator}/{frac.denominator}"


def format_expr(e: ast.Expr, prec: int = 0) -> str:
    if isinstance(e, ast.Num):
        return str(e.value)
    if isinstance(e, ast.Var):
        return e.name
    if isinstance(e, ast.Index):
        return f"{e.array}[{format_expr(e.index)}]"
    if isinstance(e, ast.Call):
        return f"{e.func}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, ast.Neg):
        text = "-" + format_expr(e.operand, 3)
        return f"({text})" if prec > 2 else text
    p = _PREC[e.op]
    # right operand of equal precedence is parenthesised to keep left associativity
    text = f"{format_expr(e.left, p)}{e.op}{format_expr(e.right, p + 1)}"
    return f"({text})" if p < prec else text


def format_clause(c: ast.ContractClause) -> str:
    atom = f"perm({c.atom.array}[{format_expr(c.atom.index)}],{format_fraction(c.atom.frac)})"
    if not c.guard:
        return atom
    guard = " && ".join(f"{format_expr(g.left)}{g.op}{format_expr(g.right)}" for g in c.guard)
    return f"{guard} ==> {atom}"


def format_formula(clauses: tuple[ast.ContractClause, ...]) -> str:
    if not clauses:
        return "true"
    return " ** ".join(format_clause(c) if not c.guard else f"({format_clause(c)})" for c in clauses)


def pretty_print(program: ast.Program) -> str:
    """Canonical source text; reparses to an equal ``Program``."""
    lines: list[str] = []
    if program.declared:
        for p in program.params:
            if p.kind == ast.INT_ARRAY:
                lines.append(f"int {p.name}[];")
            elif p.kind == ast.CONST_SCALAR:
                lines.append(f"const int {p.name};")
            else:
                lines.append(f"int {p.name};")
    loop = program.loop
    v = loop.iter_var
    cmp = "<=" if loop.inclusive_upper else "<"
    lines.append(f"for (int {v} = {format_expr(loop.lower)}; {v} {cmp} {format_expr(loop.upper)}; {v}++)")
    contract = [f"requires {format_clause(c)};" for c in loop.requires]
    contract += [f"ensures {format_clause(c)};" for c in loop.ensures]
    if contract:
        lines.append("/*@ " + "\n    ".join(contract) + " @*/")
    lines.append("{")
    for stmt in loop.body:
        prefix = f"{stmt.label}: " if stmt.label else ""
        k = stmt.kind
        if isinstance(k, ast.Assign):
            lines.append(f"  {prefix}{format_expr(k.target)} = {format_expr(k.rhs)};")
        else:
            lines.append(f"  //@ {prefix}send {format_formula(k.formula)} to {k.target_label}, {k.distance};")
    lines.append("}")
    return "\n".join(lines) + "\n"
