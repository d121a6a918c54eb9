"""Recursive-descent parser for annotated loops.

Grammar summary (full EBNF in ``docs/grammar.md``)::

    program  := decl* loop
    loop     := 'for' '(' ['int'] ID '=' expr ';' ID ('<'|'<=') expr ';' step ')'
                contract* body
    formula  := guard '==>' formula | factor ('**' factor)*
    factor   := 'perm' '(' ID '[' expr ']' ',' frac ')' | 'true' | '(' formula ')'
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import NestingError, ParseError
from . import ast
from .lexer import FRACTION, IDENT, INT, KEYWORD, SYMBOL, Token, tokenize

_RELOPS = ("==", "<", "<=", ">", ">=")
_OPENERS = ("/*@", "//@")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    # -- token helpers --------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        k = self.pos + offset
        return self.toks[k] if k < len(self.toks) else None

    def at(self, lexeme: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.lexeme == lexeme and tok.kind in (SYMBOL, KEYWORD)

    def error(self, expected: set[str] | frozenset[str], what: str = "") -> ParseError:
        tok = self.peek()
        found = "end of input" if tok is None else repr(tok.lexeme)
        span = tok.span if tok is not None else (self.toks[-1].span if self.toks else (1, 1))
        msg = what or f"expected {' or '.join(sorted(expected))}, found {found}"
        return ParseError(msg, span, frozenset(expected))

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            raise self.error({repr(lexeme)})
        return self.advance()

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect_kind(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise self.error({kind})
        return self.advance()

    def in_annotation(self) -> bool:
        tok = self.peek()
        return tok is not None and tok.annotation and tok.lexeme not in _OPENERS

    # -- program --------------------------------------------------------

    def program(self) -> ast.Program:
        params: list[ast.Param] = []
        while self.at("int") or self.at("const"):
            params.extend(self.declaration())
        if not self.at("for"):
            raise self.error({"'for'", "'int'", "'const'"})
        loop = self.loop()
        if self.peek() is not None:
            if self.at("for"):
                raise self.error(set(), "only a single loop per file is supported")
            raise self.error({"end of input"})
        return ast.Program(tuple(params), loop, declared=bool(params))

    def declaration(self) -> list[ast.Param]:
        is_const = self.at("const")
        self.advance()
        if is_const and self.at("int"):
            self.advance()
        out = []
        while True:
            tok = self.expect_kind(IDENT)
            kind = ast.CONST_SCALAR if is_const else ast.INT_SCALAR
            if not is_const and self.at("["):
                self.advance()
                self.expect("]")
                kind = ast.INT_ARRAY
            out.append(ast.Param(tok.lexeme, kind, tok.span))
            if self.at(","):
                self.advance()
                continue
            self.expect(";")
            return out

    def loop(self) -> ast.LoopSpec:
        start = self.expect("for").span
        self.expect("(")
        if self.at("int"):
            self.advance()
        var = self.expect_kind(IDENT).lexeme
        self.expect("=")
        lower = self.expr()
        self.expect(";")
        cond_var = self.expect_kind(IDENT)
        if cond_var.lexeme != var:
            raise ParseError(f"loop condition must test {var!r}", cond_var.span)
        if self.at("<"):
            inclusive = False
        elif self.at("<="):
            inclusive = True
        else:
            raise self.error({"'<'", "'<='"})
        self.advance()
        upper = self.expr()
        self.expect(";")
        self.step(var)
        self.expect(")")
        requires: list[ast.ContractClause] = []
        ensures: list[ast.ContractClause] = []
        while self.at("/*@") or self.at("//@"):
            self.contract_annotation(requires, ensures)
        body = self.body()
        return ast.LoopSpec(var, lower, upper, inclusive, tuple(requires), tuple(ensures), tuple(body), start)

    def step(self, var: str) -> None:
        if self.at("++"):
            self.advance()
            if self.expect_kind(IDENT).lexeme == var:
                return
        else:
            tok = self.expect_kind(IDENT)
            if tok.lexeme != var:
                raise ParseError(f"loop step must update {var!r}", tok.span)
            if self.at("++"):
                self.advance()
                return
            if self.at("+="):
                self.advance()
                if self.expect_kind(INT).lexeme == "1":
                    return
            elif self.at("="):
                self.advance()
                e = self.expr()
                if e in (ast.BinOp("+", ast.Var(var), ast.Num(1)), ast.BinOp("+", ast.Num(1), ast.Var(var))):
                    return
            else:
                raise self.error({"'++'", "'+='", "'='"})
        raise ParseError("only unit-stride loops are supported", self.toks[self.pos - 1].span)

    def contract_annotation(self, requires: list, ensures: list) -> None:
        opener = self.advance()
        while self.in_annotation() and not self.at("@*/"):
            if self.at("requires"):
                self.advance()
                requires.extend(self.formula())
            elif self.at("ensures"):
                self.advance()
                ensures.extend(self.formula())
            else:
                raise self.error({"'requires'", "'ensures'"})
            self.expect(";")
        if opener.lexeme == "/*@":
            self.expect("@*/")

    def body(self) -> list[ast.Statement]:
        if not self.at("{"):
            return self.statement()
        self.advance()
        out: list[ast.Statement] = []
        while not self.at("}"):
            if self.peek() is None:
                raise self.error({"'}'"})
            out.extend(self.statement())
        self.advance()
        return out

    def statement(self) -> list[ast.Statement]:
        if self.at("/*@") or self.at("//@"):
            return self.body_annotation()
        if self.at("for"):
            raise NestingError("nested loops are not supported", self.peek().span)
        label = None
        tok = self.peek()
        if tok is not None and tok.kind == IDENT and self.at(":", 1):
            label = tok.lexeme
            self.pos += 2
            if self.at("for"):
                raise NestingError("nested loops are not supported", self.peek().span)
        start = self.peek()
        if start is None or start.kind != IDENT:
            raise self.error({"identifier"}, "" if start is None or start.kind != KEYWORD
                             else f"unsupported statement {start.lexeme!r}")
        target = self.primary()
        if not isinstance(target, ast.Index):
            raise ParseError("assignment target must be an array cell", start.span)
        self.expect("=")
        rhs = self.expr()
        self.expect(";")
        return [ast.Statement(label, ast.Assign(target, rhs), start.span if label is None else tok.span)]

    def body_annotation(self) -> list[ast.Statement]:
        opener = self.advance()
        out: list[ast.Statement] = []
        while self.in_annotation() and not self.at("@*/"):
            tok = self.peek()
            label = None
            if tok.kind == IDENT and self.at(":", 1):
                label = tok.lexeme
                self.pos += 2
            if self.at("send"):
                self.advance()
                formula = self.formula()
                self.expect("to")
                target = self.expect_kind(IDENT).lexeme
                self.expect(",")
                sign = 1
                if self.at("-"):
                    self.advance()
                    sign = -1
                dist = int(self.expect_kind(INT).lexeme) * sign
                self.expect(";")
                out.append(ast.Statement(label, ast.Send(tuple(formula), target, dist), tok.span))
            elif self.at("receive") or self.at("if"):
                # receive points are derived from send targets; the comment form is
                # accepted for readability and dropped
                if self.at("if"):
                    self.advance()
                    self.expect("(")
                    self.guard()
                    self.expect(")")
                self.expect("receive")
                self.formula()
                self.expect(";")
            else:
                raise self.error({"'send'", "'receive'"})
        if opener.lexeme == "/*@":
            self.expect("@*/")
        return out

    # -- formulas -------------------------------------------------------

    def formula(self) -> list[ast.ContractClause]:
        save = self.pos
        try:
            guard = self.guard()
            if not self.at("==>"):
                raise self.error({"'==>'"})
            self.advance()
        except ParseError:
            self.pos = save
            return self.sepconj()
        rest = self.formula()
        return [ast.ContractClause(tuple(guard) + c.guard, c.atom, c.span) for c in rest]

    def sepconj(self) -> list[ast.ContractClause]:
        out = self.factor()
        while self.at("**"):
            self.advance()
            out.extend(self.factor())
        return out

    def factor(self) -> list[ast.ContractClause]:
        if self.at("true"):
            self.advance()
            return []
        if self.at("("):
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        start = self.expect("perm").span
        self.expect("(")
        name = self.expect_kind(IDENT)
        self.expect("[")
        index = self.expr()
        self.expect("]")
        self.expect(",")
        frac = self.fraction()
        self.expect(")")
        atom = ast.PermAtom(name.lexeme, index, frac, start)
        return [ast.ContractClause((), atom, start)]

    def fraction(self) -> Fraction:
        tok = self.peek()
        if tok is not None and tok.kind == FRACTION:
            self.advance()
            num, den = tok.lexeme.split("/")
        elif tok is not None and tok.kind == INT:
            self.advance()
            num, den = tok.lexeme, "1"
            if self.at("/"):
                self.advance()
                den = self.expect_kind(INT).lexeme
        else:
            raise self.error({"fraction"})
        if int(den) == 0:
            raise ParseError("zero denominator", tok.span)
        return Fraction(int(num), int(den))

    def guard(self) -> list[ast.Compare]:
        out = self.guard_atom()
        while self.at("&&"):
            self.advance()
            out.extend(self.guard_atom())
        return out

    def guard_atom(self) -> list[ast.Compare]:
        if self.at("("):
            save = self.pos
            self.advance()
            try:
                inner = self.guard()
                self.expect(")")
                if not any(self.at(op) for op in _RELOPS) and not self.at("+") and not self.at("-") \
                        and not self.at("*"):
                    return inner
            except ParseError:
                pass
            self.pos = save
        start = self.peek()
        left = self.expr()
        for op in _RELOPS:
            if self.at(op):
                self.advance()
                right = self.expr()
                return [ast.Compare(op, left, right, start.span)]
        raise self.error({repr(op) for op in _RELOPS})

    # -- arithmetic -----------------------------------------------------

    def expr(self) -> ast.Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            left = ast.BinOp(op.lexeme, left, self.term(), op.span)
        return left

    def term(self) -> ast.Expr:
        left = self.unary()
        while self.at("*"):
            op = self.advance()
            left = ast.BinOp("*", left, self.unary(), op.span)
        return left

    def unary(self) -> ast.Expr:
        if self.at("-"):
            tok = self.advance()
            return ast.Neg(self.unary(), tok.span)
        return self.primary()

    def primary(self) -> ast.Expr:
        tok = self.peek()
        if tok is None:
            raise self.error({"expression"})
        if tok.kind == INT:
            self.advance()
            return ast.Num(int(tok.lexeme), tok.span)
        if tok.kind == IDENT:
            self.advance()
            if self.at("["):
                self.advance()
                index = self.expr()
                self.expect("]")
                return ast.Index(tok.lexeme, index, tok.span)
            if self.at("("):
                self.advance()
                args = [self.expr()]
                while self.at(","):
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                if tok.lexeme != "min":
                    raise ParseError(f"unknown function {tok.lexeme!r}; only min is supported", tok.span)
                return ast.Call(tok.lexeme, tuple(args), tok.span)
            return ast.Var(tok.lexeme, tok.span)
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error({"expression"})


def parse_program(tokens: list[Token]) -> ast.Program:
    return _Parser(tokens).program()


def parse_source(source: str) -> ast.Program:
    return parse_program(tokenize(source))
