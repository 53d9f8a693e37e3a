"""Property strings: QUANT=? [ F(<=k)? target ].

QUANT is one of P, Pmin, Pmax (reachability probability), T, Tmin, Tmax
(expected hitting time), or R{"name"}, Rmin{"name"}, Rmax{"name"} (expected
accumulated reward). The target is a quoted label or a parenthesized boolean
expression over the model variables. Step bounds apply to the P family only.
"""

import re
from dataclasses import dataclass
from typing import Optional

from ..errors import PropertyError
from ..prism.parser import parse_expression_text
from ..prism.syntax import Expr

_HEAD = re.compile(r"\s*(P|T|R)(min|max)?\s*")


@dataclass(frozen=True)
class Property:
    kind: str  # 'P' | 'T' | 'R'
    opt: Optional[str]  # None | 'min' | 'max'
    bound: Optional[int]
    target_label: Optional[str]
    target_expr: Optional[Expr]
    reward: Optional[str]
    text: str

    @property
    def wants_optimum(self):
        return self.opt is not None

    def __str__(self):
        return self.text


def parse_property(text: str) -> Property:
    s = text
    m = _HEAD.match(s)
    if not m:
        raise PropertyError(f"property must start with P/T/R[min|max]: {text!r}")
    kind, opt = m.group(1), m.group(2)
    pos = m.end()
    reward = None
    if kind == "R":
        m2 = re.compile(r'\{\s*"([A-Za-z_][A-Za-z0-9_]*)"\s*\}\s*').match(s, pos)
        if not m2:
            raise PropertyError(
                f'R properties name their reward structure: R{{"name"}}=? ... : {text!r}'
            )
        reward = m2.group(1)
        pos = m2.end()
    m3 = re.compile(r"=\?\s*\[\s*F\s*").match(s, pos)
    if not m3:
        raise PropertyError(f"expected '=? [ F ...' in {text!r}")
    pos = m3.end()
    bound = None
    m4 = re.compile(r"<=\s*(\d+)\s*").match(s, pos)
    if m4:
        bound = int(m4.group(1))
        pos = m4.end()
    if bound is not None and kind != "P":
        raise PropertyError("step bounds are only supported on the P family")
    target_label = None
    target_expr = None
    rest = s[pos:]
    m5 = re.compile(r'"([A-Za-z_][A-Za-z0-9_]*)"\s*\]\s*$').match(rest)
    if m5:
        target_label = m5.group(1)
    else:
        if not rest.startswith("("):
            raise PropertyError(
                f'target must be a quoted label or a parenthesized expression: {text!r}'
            )
        depth = 0
        end = None
        for i, ch in enumerate(rest):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    end = i
                    break
        if end is None:
            raise PropertyError(f"unbalanced parentheses in {text!r}")
        if rest[end + 1:].strip() != "]":
            raise PropertyError(f"trailing input after target in {text!r}")
        try:
            target_expr = parse_expression_text(rest[1:end])
        except Exception as exc:
            raise PropertyError(f"bad target expression in {text!r}: {exc}") from exc
    return Property(kind, opt, bound, target_label, target_expr, reward, text.strip())
