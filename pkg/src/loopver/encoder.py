"""Textual proof obligations for an annotated loop.

The loop becomes ``loop_main`` (the starred conjunction of all iteration
contracts), ``loop_body`` (one iteration, bounds as an extra premise) and a
``send_phi_k`` / ``recv_phi_k`` pair per send site.  The syntax is
described in ``docs/obligations.md``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .frontend import ast
from .frontend.ir import AssignStmt, Clause, ValidatedProgram
from .frontend.printer import format_expr


@dataclass(frozen=True)
class Procedure:
    name: str
    params: tuple[str, ...]
    requires: str | None
    ensures: str | None
    body: tuple[str, ...] | None  # None for abstract procedures

    def render(self) -> str:
        spec = []
        if self.requires is not None:
            spec.append(f"requires {self.requires};")
        if self.ensures is not None:
            spec.append(f"ensures  {self.ensures};")
        head = "/*@ " + "\n    ".join(spec) + " @*/\n" if spec else ""
        sig = f"void {self.name}({', '.join(self.params)})"
        if self.body is None:
            return f"{head}{sig};\n"
        inner = "".join(f"    {line}\n" for line in self.body)
        return f"{head}{sig} {{\n{inner}}}\n"


@dataclass(frozen=True)
class Placement:
    kind: str  # "send" | "recv"
    site: int
    pos: int  # body position of the send, or of the statement the receive precedes
    formula: tuple[Clause, ...]


@dataclass(frozen=True)
class EncodedObligations:
    procedures: tuple[Procedure, ...]
    is_iteration_def: str
    placements: tuple[Placement, ...]

    def render(self) -> str:
        parts = [self.is_iteration_def] + [p.render() for p in self.procedures]
        return "\n".join(parts)


def _formula(clauses: tuple[Clause, ...], ivar: str, nvar: str) -> str:
    if not clauses:
        return "true"
    if len(clauses) == 1:
        return clauses[0].render(ivar, nvar)
    return " ** ".join(f"({c.render(ivar, nvar)})" if c.guard else c.render(ivar, nvar) for c in clauses)


def _free_params(program: ValidatedProgram) -> tuple[str, ...]:
    size = program.size_param
    scalars = [f"int {size}"]
    scalars += [f"int {p.name}" for p in program.params if p.kind != ast.INT_ARRAY and p.name != size]
    arrays = [f"int[] {p.name}" for p in program.params if p.kind == ast.INT_ARRAY]
    return tuple(scalars + arrays)


def encode(program: ValidatedProgram) -> EncodedObligations:
    iv, nv = program.iter_var, program.size_param
    lo, hi = program.lower.render(iv, nv), program.upper.render(iv, nv)
    in_bounds = f"{lo}<={iv} && {iv}<{hi}"
    pre = _formula(program.requires, iv, nv)
    post = _formula(program.ensures, iv, nv)
    free = _free_params(program)

    main = Procedure(
        "loop_main", free,
        f"(\\forall* int {iv}; {in_bounds}; {pre})",
        f"(\\forall* int {iv}; {in_bounds}; {post})",
        None,
    )

    placements: list[Placement] = []
    recv_at: dict[int, list] = {}
    for s in program.sends:
        recv_at.setdefault(s.target_pos, []).append(s)
    lines: list[str] = []
    for stmt in program.body:
        for s in recv_at.get(stmt.pos, []):
            shifted = tuple(c.shift(-s.distance) for c in s.formula)
            placements.append(Placement("recv", s.site, stmt.pos, shifted))
            lines.append(f"recv_phi_{s.site}({iv});")
        prefix = f"{stmt.label}: " if stmt.label else ""
        if isinstance(stmt, AssignStmt):
            src = stmt.rhs
            target = program.source.loop.body[stmt.pos].kind.target
            lines.append(f"{prefix}{format_expr(target)} = {format_expr(src)};")
        else:
            placements.append(Placement("send", stmt.site, stmt.pos, stmt.formula))
            lines.append(f"{prefix}send_phi_{stmt.site}({iv});")

    body = Procedure(
        "loop_body", (f"int {iv}",) + free,
        f"({in_bounds}) ** {pre}", post, tuple(lines),
    )

    procs = [main, body]
    for s in program.sends:
        d = s.distance
        ahead = f"{iv}+{d}" if d >= 0 else f"{iv}{d}"
        behind = f"{iv}-{d}" if d >= 0 else f"{iv}+{-d}"
        shifted = tuple(c.shift(-d) for c in s.formula)
        procs.append(Procedure(f"send_phi_{s.site}", (f"int {iv}",),
                               f"is_iteration({ahead}) ==> {_formula(s.formula, iv, nv)}", None, None))
        procs.append(Procedure(f"recv_phi_{s.site}", (f"int {iv}",),
                               None, f"is_iteration({behind}) ==> {_formula(shifted, iv, nv)}", None))

    is_iter = f"boolean is_iteration(int {iv}) {{ return {lo} <= {iv} && {iv} < {hi}; }}\n"
    return EncodedObligations(tuple(procs), is_iter, tuple(placements))
