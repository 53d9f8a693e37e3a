"""AST node types for the PRISM subset, plus a round-trippable pretty printer.

Expressions carry an optional inferred type in ``ty`` ("int", "real", "bool");
the field is excluded from equality so that a freshly parsed tree compares
equal to a type-checked one.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

Value = Union[int, float, bool]

# reserved prefix for synthetic action identities of unlabeled commands
SILENT_PREFIX = "τ#"
DEADLOCK_ACTION = SILENT_PREFIX + "deadlock"


@dataclass(eq=True)
class Expr:
    pass


@dataclass(eq=True)
class IntLit(Expr):
    value: int
    ty: Optional[str] = field(default="int", compare=False, repr=False)


@dataclass(eq=True)
class RealLit(Expr):
    value: float
    ty: Optional[str] = field(default="real", compare=False, repr=False)


@dataclass(eq=True)
class BoolLit(Expr):
    value: bool
    ty: Optional[str] = field(default="bool", compare=False, repr=False)


@dataclass(eq=True)
class VarRef(Expr):
    name: str
    ty: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class Unary(Expr):
    op: str  # '-' or '!'
    operand: Expr
    ty: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class Binary(Expr):
    op: str  # + - * / & | => = != < <= > >=
    lhs: Expr
    rhs: Expr
    ty: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class Ternary(Expr):
    cond: Expr
    then: Expr
    other: Expr
    ty: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(eq=True)
class Call(Expr):
    func: str  # min max floor ceil mod pow
    args: tuple
    ty: Optional[str] = field(default=None, compare=False, repr=False)


def lit(value: Value) -> Expr:
    if isinstance(value, bool):
        return BoolLit(value)
    if isinstance(value, int):
        return IntLit(value)
    return RealLit(float(value))


# ---------------------------------------------------------------------------
# declarations


@dataclass
class ConstDecl:
    name: str
    kind: str  # int double bool
    value: Optional[Expr]  # None: must come from overrides


@dataclass
class FormulaDecl:
    name: str
    expr: Expr


@dataclass
class VarDecl:
    name: str
    kind: str  # int | bool
    low: Optional[Expr]
    high: Optional[Expr]
    init: Optional[Expr]
    module: Optional[str]  # None for globals


@dataclass
class Update:
    prob: Optional[Expr]  # None means probability 1
    assigns: tuple  # tuple[(var_name, Expr), ...]; empty for "true"


@dataclass
class Command:
    label: Optional[str]  # user synchronization label; None = silent
    guard: Expr
    updates: tuple
    line: int = field(default=0, compare=False)
    action: str = ""  # resolved action identity (label or synthetic)


@dataclass
class ModuleDecl:
    name: str
    variables: list
    commands: list


@dataclass
class RewardItem:
    # action: user label, "" for explicit "[]" (matches every silent action),
    # or None for an unlabeled state-reward item (matches every action)
    action: Optional[str]
    guard: Expr
    value: Expr


@dataclass
class RawProgram:
    kind: str
    constants: list
    formulas: list
    globals: list
    modules: list
    labels: dict
    rewards: dict


@dataclass
class ResolvedVar:
    name: str
    kind: str  # int | bool
    low: int
    high: int
    init: int
    module: Optional[str]


@dataclass
class SymbolicModel:
    """A parsed, constant-resolved, formula-inlined program."""

    kind: str
    constants: dict
    variables: list  # [ResolvedVar] in declaration order
    modules: list  # [ModuleDecl] with resolved expressions
    labels: dict  # name -> Expr(bool)
    rewards: dict  # name -> tuple[RewardItem, ...]
    action_alphabet: tuple

    def variable(self, name: str) -> ResolvedVar:
        for v in self.variables:
            if v.name == name:
                return v
        from ..errors import PrismNameError

        raise PrismNameError(f"unknown variable {name!r}")

    @property
    def var_names(self):
        return tuple(v.name for v in self.variables)


# ---------------------------------------------------------------------------
# pretty printer

_PREC = {
    "?:": 1,
    "=>": 2,
    "|": 3,
    "&": 4,
    "!": 5,
    "=": 6, "!=": 6, "<": 6, "<=": 6, ">": 6, ">=": 6,
    "+": 7, "-": 7,
    "*": 8, "/": 8,
    "neg": 9,
}


def expr_to_str(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, RealLit):
        return repr(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({', '.join(expr_to_str(a) for a in e.args)})"
    if isinstance(e, Unary):
        prec = _PREC["neg"] if e.op == "-" else _PREC["!"]
        s = f"{e.op}{expr_to_str(e.operand, prec)}"
        return f"({s})" if prec < parent_prec else s
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        s = f"{expr_to_str(e.lhs, prec)} {e.op} {expr_to_str(e.rhs, prec + 1)}"
        return f"({s})" if prec < parent_prec else s
    if isinstance(e, Ternary):
        prec = _PREC["?:"]
        s = (
            f"{expr_to_str(e.cond, prec + 1)} ? {expr_to_str(e.then, prec + 1)}"
            f" : {expr_to_str(e.other, prec)}"
        )
        return f"({s})" if prec < parent_prec else s
    raise TypeError(f"not an expression node: {e!r}")


def _const_to_str(name: str, value) -> str:
    if isinstance(value, bool):
        return f"const bool {name} = {'true' if value else 'false'};"
    if isinstance(value, int):
        return f"const int {name} = {value};"
    return f"const double {name} = {value!r};"


def _update_to_str(u: Update) -> str:
    body = " & ".join(f"({n}'={expr_to_str(e)})" for n, e in u.assigns) or "true"
    if u.prob is None:
        return body
    return f"{expr_to_str(u.prob, _PREC['?:'] + 1)}: {body}"


def _command_to_str(c: Command) -> str:
    label = c.label or ""
    ups = " + ".join(_update_to_str(u) for u in c.updates)
    return f"  [{label}] {expr_to_str(c.guard)} -> {ups};"


def _var_to_str(v: ResolvedVar, indent: str) -> str:
    if v.kind == "bool":
        init = "true" if v.init else "false"
        return f"{indent}{v.name} : bool init {init};"
    return f"{indent}{v.name} : [{v.low}..{v.high}] init {v.init};"


def model_to_str(m: SymbolicModel) -> str:
    """Render a resolved model back to source; reparsing yields an equal model."""
    out = [m.kind, ""]
    for name, value in m.constants.items():
        out.append(_const_to_str(name, value))
    if m.constants:
        out.append("")
    for v in m.variables:
        if v.module is None:
            out.append("global " + _var_to_str(v, ""))
    for mod in m.modules:
        out.append(f"module {mod.name}")
        for v in mod.variables:
            out.append(_var_to_str(v, "  "))
        for c in mod.commands:
            out.append(_command_to_str(c))
        out.append("endmodule")
        out.append("")
    for name, pred in m.labels.items():
        out.append(f'label "{name}" = {expr_to_str(pred)};')
    for name, items in m.rewards.items():
        out.append(f'rewards "{name}"')
        for it in items:
            head = "" if it.action is None else f"[{it.action}] "
            out.append(f"  {head}{expr_to_str(it.guard)} : {expr_to_str(it.value)};")
        out.append("endrewards")
    return "\n".join(out) + "\n"
