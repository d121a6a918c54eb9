"""Lexing, parsing and validation of annotated ``.loop`` sources."""

from .ast import Program
from .ir import AssignStmt, Atom, Cell, Clause, SendStmt, ValidatedProgram
from .lexer import Token, tokenize
from .parser import parse_program, parse_source
from .printer import pretty_print
from .validate import validate


def load(source: str) -> ValidatedProgram:
    """Tokenize, parse and validate ``source``."""
    return validate(parse_program(tokenize(source)))


__all__ = [
    "AssignStmt", "Atom", "Cell", "Clause", "Program", "SendStmt", "Token",
    "ValidatedProgram", "load", "parse_program", "parse_source", "pretty_print",
    "tokenize", "validate",
]
