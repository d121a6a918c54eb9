"""Exceptions raised while reading and checking ``.loop`` sources."""

from __future__ import annotations

Span = tuple[int, int]


class LoopverError(Exception):
    """Base class for input errors (lexing, parsing, validation)."""

    code = "Error"

    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        if self.span is None:
            return f"{self.code}: {self.message}"
        line, col = self.span
        return f"{self.code} at {line}:{col}: {self.message}"


class LexError(LoopverError):
    code = "LexError"


class ParseError(LoopverError):
    code = "ParseError"

    def __init__(self, message: str, span: Span | None = None, expected: frozenset[str] = frozenset()):
        super().__init__(message, span)
        self.expected = expected


class NestingError(ParseError):
    code = "NestingError"


class ValidationError(LoopverError):
    code = "ValidationError"


class UnknownIdentifier(ValidationError):
    code = "UnknownIdentifier"


class DuplicateLabel(ValidationError):
    code = "DuplicateLabel"


class UnknownSendTarget(ValidationError):
    code = "UnknownSendTarget"


class NonAffineIndex(ValidationError):
    code = "NonAffineIndex"


class KindMismatch(ValidationError):
    code = "KindMismatch"


class UnsupportedGuard(ValidationError):
    code = "UnsupportedGuard"


class UnsupportedBound(ValidationError):
    code = "UnsupportedBound"


class InvalidFraction(ValidationError):
    code = "InvalidFraction"
