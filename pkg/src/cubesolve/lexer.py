"""Tokenizer shared by the dimension-term, cell and `.cube` parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import CubeSyntaxError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>/\\|\\/|->|→|∧|∨|[~(){}\[\],;=:])
    """,
    re.VERBOSE,
)

_UNICODE = {"∧": "/\\", "∨": "\\/", "→": "->"}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "num", "punct" or "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise CubeSyntaxError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tok = m.group()
            tokens.append(Token(kind, _UNICODE.get(tok, tok), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @classmethod
    def of(cls, text: str) -> "TokenStream":
        return cls(tokenize(text))

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind != "eof" and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            self.fail(repr(text))
        return self.next()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail("an identifier")
        return self.next()

    def fail(self, expected: str):
        tok = self.peek()
        raise CubeSyntaxError(tok.line, tok.col, expected, tok.text or "end of input")

    def expect_eof(self):
        if self.peek().kind != "eof":
            self.fail("end of input")
