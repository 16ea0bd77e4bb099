"""Hand-rolled scanner for MBL source text."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import ParseError

KEYWORDS = frozenset(
    ["proc", "var", "if", "else", "while", "return", "spawn", "ref", "null"]
)

# Longest first so `<=` wins over `<`.
SYMBOLS = [
    ":=", "==", "!=", "<=", ">=", "<", ">",
    "(", ")", "{", "}", "[", "]", ",", ";", ":", "+", "-", "*",
]


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'int' | 'string' | 'kw' | 'sym' | 'eof'
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":  # line comment
            while i < n and src[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Token("int", src[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < n and src[j] != '"':
                if src[j] == "\n":
                    raise ParseError("unterminated string literal", line, start_col)
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", line, start_col)
            toks.append(Token("string", src[i + 1 : j], line, start_col))
            col += j - i + 1
            i = j + 1
            continue
        for sym in SYMBOLS:
            if src.startswith(sym, i):
                toks.append(Token("sym", sym, line, start_col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks
