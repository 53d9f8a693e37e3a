"""Tokenizer for the PRISM-language subset."""

import re
from dataclasses import dataclass

from ..errors import PrismSyntaxError

KEYWORDS = {
    "mdp", "dtmc", "module", "endmodule", "const", "int", "double", "bool",
    "global", "init", "formula", "label", "rewards", "endrewards",
    "true", "false", "min", "max", "floor", "ceil", "mod", "pow",
}

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<COMMENT>//[^\n]*)
    | (?P<REAL>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
    | (?P<INT>\d+)
    | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<QUOTED>"[A-Za-z_][A-Za-z0-9_]*")
    | (?P<OP>=>|->|\.\.|<=|>=|!=|[-+*/=<>!&|?:;,.\[\](){}'])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # REAL INT NAME QUOTED OP KEYWORD EOF
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise PrismSyntaxError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        if kind in ("WS", "COMMENT"):
            nl = text.count("\n")
            if nl:
                line += nl
                line_start = pos + text.rindex("\n") + 1
        else:
            col = pos - line_start + 1
            if kind == "NAME" and text in KEYWORDS:
                kind = "KEYWORD"
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, n - line_start + 1))
    return tokens
