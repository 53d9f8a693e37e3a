"""Recursive-descent parser producing a RawProgram (before resolution)."""

from ..errors import PrismSyntaxError
from .lexer import Token, tokenize
from .syntax import (
    Binary, BoolLit, Call, Command, ConstDecl, FormulaDecl, IntLit, ModuleDecl,
    RawProgram, RealLit, RewardItem, Ternary, Unary, Update, VarDecl, VarRef,
)

_BUILTINS = {"min", "max", "floor", "ceil", "mod", "pow"}
_CMP_OPS = {"=", "!=", "<", "<=", ">", ">="}


class _Cursor:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self, off=0) -> Token:
        j = min(self.i + off, len(self.tokens) - 1)
        return self.tokens[j]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def accept(self, text=None, kind=None):
        t = self.peek()
        if text is not None and t.text != text:
            return None
        if kind is not None and t.kind != kind:
            return None
        return self.next()

    def expect(self, text=None, kind=None) -> Token:
        t = self.accept(text=text, kind=kind)
        if t is None:
            got = self.peek()
            want = text if text is not None else kind
            raise PrismSyntaxError(
                f"expected {want!r} but found {got.text or 'end of input'!r}",
                got.line, got.col,
            )
        return t

    def error(self, message):
        t = self.peek()
        raise PrismSyntaxError(message, t.line, t.col)


# --------------------------------------------------------------------------
# expressions


def _parse_atom(c: _Cursor):
    t = c.peek()
    if t.kind == "INT":
        c.next()
        return IntLit(int(t.text))
    if t.kind == "REAL":
        c.next()
        return RealLit(float(t.text))
    if t.text in ("true", "false"):
        c.next()
        return BoolLit(t.text == "true")
    if t.text in _BUILTINS:
        c.next()
        c.expect("(")
        args = [parse_expr(c)]
        while c.accept(","):
            args.append(parse_expr(c))
        c.expect(")")
        if t.text in ("floor", "ceil") and len(args) != 1:
            c.error(f"{t.text} takes exactly one argument")
        if t.text in ("mod", "pow") and len(args) != 2:
            c.error(f"{t.text} takes exactly two arguments")
        if t.text in ("min", "max") and len(args) < 2:
            c.error(f"{t.text} takes at least two arguments")
        return Call(t.text, tuple(args))
    if t.kind == "NAME":
        c.next()
        return VarRef(t.text)
    if t.text == "(":
        c.next()
        e = parse_expr(c)
        c.expect(")")
        return e
    c.error(f"expected an expression, found {t.text or 'end of input'!r}")


def _parse_unary_minus(c):
    if c.peek().text == "-":
        c.next()
        return Unary("-", _parse_unary_minus(c))
    return _parse_atom(c)


def _parse_mul(c):
    e = _parse_unary_minus(c)
    while c.peek().text in ("*", "/"):
        op = c.next().text
        e = Binary(op, e, _parse_unary_minus(c))
    return e


def _parse_add(c):
    e = _parse_mul(c)
    while c.peek().text in ("+", "-"):
        op = c.next().text
        e = Binary(op, e, _parse_mul(c))
    return e


def _parse_cmp(c):
    e = _parse_add(c)
    while c.peek().text in _CMP_OPS:
        op = c.next().text
        e = Binary(op, e, _parse_add(c))
    return e


def _parse_not(c):
    if c.peek().text == "!":
        c.next()
        return Unary("!", _parse_not(c))
    return _parse_cmp(c)


def _parse_and(c):
    e = _parse_not(c)
    while c.peek().text == "&":
        c.next()
        e = Binary("&", e, _parse_not(c))
    return e


def _parse_or(c):
    e = _parse_and(c)
    while c.peek().text == "|":
        c.next()
        e = Binary("|", e, _parse_and(c))
    return e


def _parse_implies(c):
    e = _parse_or(c)
    if c.peek().text == "=>":
        c.next()
        return Binary("=>", e, _parse_implies(c))
    return e


def parse_expr(c: _Cursor):
    e = _parse_implies(c)
    if c.peek().text == "?":
        c.next()
        then = parse_expr(c)
        c.expect(":")
        other = parse_expr(c)
        return Ternary(e, then, other)
    return e


def parse_expression_text(text: str):
    """Parse a standalone expression (used for property targets and overrides)."""
    c = _Cursor(tokenize(text))
    e = parse_expr(c)
    if c.peek().kind != "EOF":
        c.error(f"trailing input after expression: {c.peek().text!r}")
    return e


# --------------------------------------------------------------------------
# declarations


def _parse_var_decl(c: _Cursor, module):
    name = c.expect(kind="NAME").text
    c.expect(":")
    if c.peek().text == "bool":
        c.next()
        low = high = None
        kind = "bool"
    else:
        c.expect("[")
        low = parse_expr(c)
        c.expect("..")
        high = parse_expr(c)
        c.expect("]")
        kind = "int"
    init = None
    if c.accept("init"):
        init = parse_expr(c)
    c.expect(";")
    return VarDecl(name, kind, low, high, init, module)


def _looks_like_assign(c: _Cursor) -> bool:
    # '(' NAME '\'' begins an assignment; anything else is a probability expr
    return (
        c.peek().text == "("
        and c.peek(1).kind == "NAME"
        and c.peek(2).text == "'"
    )


def _parse_assign(c: _Cursor):
    c.expect("(")
    name = c.expect(kind="NAME").text
    c.expect("'")
    c.expect("=")
    e = parse_expr(c)
    c.expect(")")
    return (name, e)


def _parse_update(c: _Cursor):
    prob = None
    if not _looks_like_assign(c) and c.peek().text != "true":
        prob = parse_expr(c)
        c.expect(":")
    if c.accept("true"):
        return Update(prob, ())
    assigns = [_parse_assign(c)]
    while c.accept("&"):
        if c.accept("true"):
            continue
        assigns.append(_parse_assign(c))
    return Update(prob, tuple(assigns))


def _parse_command(c: _Cursor):
    line = c.peek().line
    c.expect("[")
    label = None
    if c.peek().kind == "NAME":
        label = c.next().text
    c.expect("]")
    guard = parse_expr(c)
    c.expect("->")
    updates = [_parse_update(c)]
    while c.accept("+"):
        updates.append(_parse_update(c))
    c.expect(";")
    return Command(label, guard, tuple(updates), line=line)


def _parse_module(c: _Cursor):
    c.expect("module")
    name = c.expect(kind="NAME").text
    variables, commands = [], []
    while True:
        t = c.peek()
        if t.text == "endmodule":
            c.next()
            break
        if t.text == "[":
            commands.append(_parse_command(c))
        elif t.kind == "NAME":
            variables.append(_parse_var_decl(c, name))
        else:
            c.error(f"expected a variable or command in module {name!r}")
    return ModuleDecl(name, variables, commands)


def _parse_const(c: _Cursor):
    c.expect("const")
    t = c.peek()
    if t.text in ("int", "double", "bool"):
        kind = c.next().text
    else:
        c.error("constant declarations need a type (int, double, or bool)")
    name = c.expect(kind="NAME").text
    value = None
    if c.accept("="):
        value = parse_expr(c)
    c.expect(";")
    return ConstDecl(name, kind, value)


def _parse_label(c: _Cursor):
    c.expect("label")
    name = c.expect(kind="QUOTED").text.strip('"')
    c.expect("=")
    e = parse_expr(c)
    c.expect(";")
    return name, e


def _parse_reward_item(c: _Cursor):
    action = None
    if c.peek().text == "[":
        c.next()
        action = ""
        if c.peek().kind == "NAME":
            action = c.next().text
        c.expect("]")
    guard = parse_expr(c)
    c.expect(":")
    value = parse_expr(c)
    c.expect(";")
    return RewardItem(action, guard, value)


def _parse_rewards(c: _Cursor):
    c.expect("rewards")
    name = "default"
    if c.peek().kind == "QUOTED":
        name = c.next().text.strip('"')
    items = []
    while c.peek().text != "endrewards":
        if c.peek().kind == "EOF":
            c.error("unterminated rewards block")
        items.append(_parse_reward_item(c))
    c.next()
    return name, items


def parse_program(source: str) -> RawProgram:
    c = _Cursor(tokenize(source))
    kind_tok = c.expect(kind="KEYWORD")
    if kind_tok.text not in ("mdp", "dtmc"):
        raise PrismSyntaxError(
            f"model kind must be 'mdp' or 'dtmc', found {kind_tok.text!r}",
            kind_tok.line, kind_tok.col,
        )
    prog = RawProgram(kind_tok.text, [], [], [], [], {}, {})
    while c.peek().kind != "EOF":
        t = c.peek()
        if t.text == "const":
            prog.constants.append(_parse_const(c))
        elif t.text == "formula":
            c.next()
            name = c.expect(kind="NAME").text
            c.expect("=")
            e = parse_expr(c)
            c.expect(";")
            prog.formulas.append(FormulaDecl(name, e))
        elif t.text == "global":
            c.next()
            prog.globals.append(_parse_var_decl(c, None))
        elif t.text == "module":
            prog.modules.append(_parse_module(c))
        elif t.text == "label":
            name, e = _parse_label(c)
            if name in prog.labels:
                raise PrismSyntaxError(f"duplicate label {name!r}", t.line, t.col)
            prog.labels[name] = e
        elif t.text == "rewards":
            name, items = _parse_rewards(c)
            if name in prog.rewards:
                raise PrismSyntaxError(
                    f"duplicate rewards structure {name!r}", t.line, t.col
                )
            prog.rewards[name] = items
        else:
            c.error(f"unexpected {t.text!r} at top level")
    return prog
