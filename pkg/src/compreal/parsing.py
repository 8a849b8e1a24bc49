"""Tokenizer and recursive-descent parser for call-style expression text.

Both the function-expression language (``exp(mul(x,x))``) and the set
language (``union(disk(0,0,1/2),point(1,0))``) are trees of calls over
numbers and bare names, so they share this front end and differ only in
how the resulting tree is elaborated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import parse_rational
from .errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>[+-]?\d+(?:\s*\*\s*2\s*\^\s*[+-]?\d+)?(?:\s*/\s*\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Num:
    value: Fraction
    text: str
    pos: int


@dataclass(frozen=True)
class Name:
    name: str
    pos: int


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    pos: int


def tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos=pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(kind), pos))
        pos = m.end()
    tokens.append(("end", "", pos))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind, value=None):
        tok = self.tokens[self.i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", pos=tok[2])
        self.i += 1
        return tok

    def node(self):
        kind, value, pos = self.peek()
        if kind == "num":
            self.i += 1
            return Num(parse_rational(value), value, pos)
        if kind == "name":
            self.i += 1
            if self.peek()[:2] == ("punct", "("):
                self.i += 1
                args = []
                if self.peek()[:2] != ("punct", ")"):
                    args.append(self.node())
                    while self.peek()[:2] == ("punct", ","):
                        self.i += 1
                        args.append(self.node())
                self.take("punct", ")")
                return Call(value, tuple(args), pos)
            return Name(value, pos)
        raise ParseError(f"unexpected {value or 'end of input'!r}", pos=pos)


def parse_tree(text: str):
    """Parse a whole string into a tree of :class:`Call`/:class:`Num`/:class:`Name`."""
    p = _Parser(text)
    tree = p.node()
    p.take("end")
    return tree


def parse_number_list(text: str):
    """Parse ``a,b,c`` (each a dyadic or fraction literal) into Fractions."""
    parts = text.split(",")
    out = []
    for part in parts:
        if not part.strip():
            raise ParseError(f"empty entry in number list {text!r}")
        out.append(parse_rational(part))
    return out
