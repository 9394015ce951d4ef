from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any


class HplSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: tuple = ()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        hint = f" (expected {' or '.join(expected)})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{hint}")


class LexError(HplSyntaxError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: Any
    line: int
    col: int
    end_line: int
    end_col: int

    def __repr__(self):
        if self.kind in ("INT", "REAL", "RAT", "ATOM", "VAR", "OP"):
            return f"{self.kind}({self.text})"
        return self.kind


_PUNCT = {
    ":-": "NECK", "::": "OPDOUBLECOLON", ":": "COLON", "\\+": "NAF", "!": "CUT",
    "(": "LPAREN", ")": "RPAREN", "[": "LBRACKET", "]": "RBRACKET", ",": "COMMA",
    "|": "BAR",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<real>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<rat>\d+/\d+)
  | (?P<int>\d+)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<qatom>'(?:[^'\\\n]|\\.)*')
  | (?P<end>\.(?=\s|%|$))
  | (?P<op>=:=|=\\=|=<|>=|\\==|\\=|==|=\.\.|@=<|@>=|@<|@>|<|>|=|\+|-|\*|/)
  | (?P<punct>:-|::|\\\+|:|!|\(|\)|\[|\]|,|\|)
""", re.VERBOSE | re.DOTALL)


def tokenize(text: str) -> list[Token]:
    """Split program text into tokens; comments and whitespace are dropped."""
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise LexError(f"illegal character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        start_line = line
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        end_col = m.end() - line_start + 1
        pos = m.end()
        if kind in ("ws", "comment", "block"):
            continue
        if kind == "real":
            tok = Token("REAL", lexeme, float(lexeme), start_line, col, line, end_col)
        elif kind == "rat":
            num, den = lexeme.split("/")
            if int(den) == 0:
                raise LexError("zero denominator", start_line, col)
            tok = Token("RAT", lexeme, Fraction(int(num), int(den)), start_line, col,
                        line, end_col)
        elif kind == "int":
            tok = Token("INT", lexeme, int(lexeme), start_line, col, line, end_col)
        elif kind == "atom":
            tok = Token("ATOM", lexeme, lexeme, start_line, col, line, end_col)
        elif kind == "qatom":
            body = re.sub(r"\\(.)", r"\1", lexeme[1:-1])
            tok = Token("ATOM", lexeme, body, start_line, col, line, end_col)
        elif kind == "var":
            tok = Token("VAR", lexeme, lexeme, start_line, col, line, end_col)
        elif kind == "end":
            tok = Token("DOT", lexeme, None, start_line, col, line, end_col)
        elif kind == "op":
            tok = Token("OP", lexeme, lexeme, start_line, col, line, end_col)
        else:
            tok = Token(_PUNCT[lexeme], lexeme, None, start_line, col, line, end_col)
        tokens.append(tok)
    return tokens
