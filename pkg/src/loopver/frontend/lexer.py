from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset({
    "for", "int", "const", "requires", "ensures", "send", "to",
    "receive", "perm", "if", "true",
})

# longest first; annotation delimiters are ordinary symbol tokens
SYMBOLS = (
    "/*@", "@*/", "//@", "==>", "**", "==", "<=", ">=", "&&", "++", "+=",
    "<", ">", "=", "+", "-", "*", "/", "(", ")", "[", "]", "{", "}",
    ";", ",", ":",
)

KEYWORD = "keyword"
IDENT = "ident"
INT = "int-literal"
FRACTION = "fraction-literal"
SYMBOL = "symbol"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"\d+(?:/\d+)?")


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    span: tuple[int, int]
    annotation: bool = False

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.lexeme!r}, {self.span[0]}:{self.span[1]})"


class _Cursor:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def span(self) -> tuple[int, int]:
        return (self.line, self.col)

    def advance(self, count: int) -> str:
        text = self.src[self.pos:self.pos + count]
        for ch in text:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += count
        return text

    def startswith(self, prefix: str) -> bool:
        return self.src.startswith(prefix, self.pos)


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens.

    Plain ``//`` and ``/* */`` comments are dropped.  Annotation comments
    (``/*@ ... @*/`` and ``//@ ...``) keep their delimiters as symbol tokens
    and every token inside them carries ``annotation=True``.
    """
    cur = _Cursor(source)
    tokens: list[Token] = []
    # None outside annotations; "block" inside /*@ @*/; "line" inside //@
    mode: str | None = None
    while cur.pos < len(cur.src):
        ch = cur.src[cur.pos]
        if ch == "\n" and mode == "line":
            mode = None
        if ch.isspace():
            cur.advance(1)
            continue
        start = cur.span()
        if mode == "block" and cur.startswith("@*/"):
            tokens.append(Token(SYMBOL, cur.advance(3), start, True))
            mode = None
            continue
        if mode is None and cur.startswith("/*@"):
            tokens.append(Token(SYMBOL, cur.advance(3), start, True))
            mode = "block"
            continue
        if mode is None and cur.startswith("//@"):
            tokens.append(Token(SYMBOL, cur.advance(3), start, True))
            mode = "line"
            continue
        if cur.startswith("//"):
            end = cur.src.find("\n", cur.pos)
            cur.advance((len(cur.src) if end < 0 else end) - cur.pos)
            continue
        if cur.startswith("/*"):
            end = cur.src.find("*/", cur.pos + 2)
            if end < 0:
                raise LexError("unterminated comment", start)
            cur.advance(end + 2 - cur.pos)
            continue
        in_annot = mode is not None
        m = _IDENT_RE.match(cur.src, cur.pos)
        if m:
            word = cur.advance(m.end() - m.start())
            tokens.append(Token(KEYWORD if word in KEYWORDS else IDENT, word, start, in_annot))
            continue
        m = _NUMBER_RE.match(cur.src, cur.pos)
        if m:
            text = cur.advance(m.end() - m.start())
            tokens.append(Token(FRACTION if "/" in text else INT, text, start, in_annot))
            continue
        for sym in SYMBOLS:
            if cur.startswith(sym):
                if sym in ("/*@", "//@") or (sym == "@*/" and mode != "block"):
                    raise LexError(f"misplaced annotation delimiter {sym!r}", start)
                tokens.append(Token(SYMBOL, cur.advance(len(sym)), start, in_annot))
                break
        else:
            raise LexError(f"illegal character {ch!r}", start)
    if mode == "block":
        raise LexError("unterminated annotation comment", cur.span())
    return tokens
