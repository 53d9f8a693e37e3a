"""Expression evaluation: a naive reference walker plus a compiled fast path.

``evaluate_reference`` is the semantic ground truth (plain tree walking).
``compile_expr``/``eval_expr`` generate a Python lambda for the same tree;
the test suite fuzzes both against each other bit-for-bit.
"""

import math

from ..errors import EvalError, PrismTypeError
from .syntax import (
    Binary, BoolLit, Call, Expr, IntLit, RealLit, Ternary, Unary, VarRef,
)


def prism_mod(a, b):
    if b == 0:
        raise EvalError("mod by zero")
    return a % b


def prism_div(a, b):
    # '/' is real division regardless of operand types
    if b == 0:
        raise EvalError("division by zero")
    return a / b


def prism_pow(a, b):
    if isinstance(a, int) and isinstance(b, int):
        # int pow is typed int, so negative exponents are rejected at runtime
        if b < 0:
            raise EvalError("pow with a negative integer exponent (use a real)")
        return a ** b
    try:
        return math.pow(a, b)
    except (ValueError, OverflowError) as exc:
        raise EvalError(f"pow({a}, {b}) is undefined") from exc


def evaluate_reference(e: Expr, env) -> object:
    """Naive tree-walking evaluator over a name -> value mapping."""
    if isinstance(e, (IntLit, RealLit, BoolLit)):
        return e.value
    if isinstance(e, VarRef):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Unary):
        v = evaluate_reference(e.operand, env)
        return (not v) if e.op == "!" else -v
    if isinstance(e, Binary):
        l = evaluate_reference(e.lhs, env)
        if e.op == "&":
            return l and evaluate_reference(e.rhs, env)
        if e.op == "|":
            return l or evaluate_reference(e.rhs, env)
        if e.op == "=>":
            return (not l) or evaluate_reference(e.rhs, env)
        r = evaluate_reference(e.rhs, env)
        if e.op == "+":
            return l + r
        if e.op == "-":
            return l - r
        if e.op == "*":
            return l * r
        if e.op == "/":
            return prism_div(l, r)
        if e.op == "=":
            return l == r
        if e.op == "!=":
            return l != r
        if e.op == "<":
            return l < r
        if e.op == "<=":
            return l <= r
        if e.op == ">":
            return l > r
        if e.op == ">=":
            return l >= r
        raise EvalError(f"unknown operator {e.op!r}")
    if isinstance(e, Ternary):
        if evaluate_reference(e.cond, env):
            return evaluate_reference(e.then, env)
        return evaluate_reference(e.other, env)
    if isinstance(e, Call):
        args = [evaluate_reference(a, env) for a in e.args]
        if e.func == "min":
            return min(args)
        if e.func == "max":
            return max(args)
        if e.func == "floor":
            return math.floor(args[0])
        if e.func == "ceil":
            return math.ceil(args[0])
        if e.func == "mod":
            return prism_mod(args[0], args[1])
        if e.func == "pow":
            return prism_pow(args[0], args[1])
        raise EvalError(f"unknown builtin {e.func!r}")
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# compiled path

_COMPILE_GLOBALS = {
    "__builtins__": {},
    "min": min,
    "max": max,
    "_floor": math.floor,
    "_ceil": math.ceil,
    "_mod": prism_mod,
    "_div": prism_div,
    "_pow": prism_pow,
}

_BIN_FMT = {
    "+": "({} + {})",
    "-": "({} - {})",
    "*": "({} * {})",
    "/": "_div({}, {})",
    "&": "({} and {})",
    "|": "({} or {})",
    "=>": "((not {}) or {})",
    "=": "({} == {})",
    "!=": "({} != {})",
    "<": "({} < {})",
    "<=": "({} <= {})",
    ">": "({} > {})",
    ">=": "({} >= {})",
}

_CALL_FMT = {"floor": "_floor", "ceil": "_ceil", "mod": "_mod", "pow": "_pow"}


def _py_src(e: Expr, slots) -> str:
    if isinstance(e, IntLit):
        return repr(e.value)
    if isinstance(e, RealLit):
        return repr(e.value)
    if isinstance(e, BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, VarRef):
        try:
            return f"v[{slots[e.name]}]"
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Unary):
        inner = _py_src(e.operand, slots)
        return f"(not {inner})" if e.op == "!" else f"(-{inner})"
    if isinstance(e, Binary):
        return _BIN_FMT[e.op].format(_py_src(e.lhs, slots), _py_src(e.rhs, slots))
    if isinstance(e, Ternary):
        return (
            f"({_py_src(e.then, slots)} if {_py_src(e.cond, slots)}"
            f" else {_py_src(e.other, slots)})"
        )
    if isinstance(e, Call):
        args = ", ".join(_py_src(a, slots) for a in e.args)
        fn = _CALL_FMT.get(e.func, e.func)
        return f"{fn}({args})"
    raise TypeError(f"not an expression node: {e!r}")


def compile_expr(e: Expr, slots):
    """Compile ``e`` to a callable over a value vector indexed by ``slots``."""
    src = f"lambda v: {_py_src(e, slots)}"
    return eval(compile(src, "<prism-expr>", "eval"), dict(_COMPILE_GLOBALS))


def eval_expr(e: Expr, env) -> object:
    """Evaluate via the compiled path over a name -> value mapping."""
    names = sorted(env)
    fn = compile_expr(e, {n: i for i, n in enumerate(names)})
    return fn(tuple(env[n] for n in names))


def literal_value(e: Expr):
    if isinstance(e, (IntLit, RealLit, BoolLit)):
        return e.value
    return None


def is_literal(e: Expr) -> bool:
    return isinstance(e, (IntLit, RealLit, BoolLit))


# ---------------------------------------------------------------------------
# strict type checking

_NUMERIC = ("int", "real")


def typecheck(e: Expr, var_types) -> str:
    """Annotate ``e.ty`` bottom-up; raise PrismTypeError on bool/numeric mixes."""
    if isinstance(e, (IntLit, RealLit, BoolLit)):
        return e.ty
    if isinstance(e, VarRef):
        try:
            e.ty = var_types[e.name]
        except KeyError:
            from ..errors import PrismNameError

            raise PrismNameError(f"undeclared identifier {e.name!r}") from None
        return e.ty
    if isinstance(e, Unary):
        t = typecheck(e.operand, var_types)
        if e.op == "!":
            if t != "bool":
                raise PrismTypeError("'!' needs a bool operand")
            e.ty = "bool"
        else:
            if t not in _NUMERIC:
                raise PrismTypeError("unary '-' needs a numeric operand")
            e.ty = t
        return e.ty
    if isinstance(e, Binary):
        lt = typecheck(e.lhs, var_types)
        rt = typecheck(e.rhs, var_types)
        op = e.op
        if op in ("&", "|", "=>"):
            if lt != "bool" or rt != "bool":
                raise PrismTypeError(f"{op!r} needs bool operands")
            e.ty = "bool"
        elif op in ("=", "!="):
            if (lt == "bool") != (rt == "bool"):
                raise PrismTypeError("cannot compare bool with a number")
            e.ty = "bool"
        elif op in ("<", "<=", ">", ">="):
            if lt not in _NUMERIC or rt not in _NUMERIC:
                raise PrismTypeError(f"{op!r} needs numeric operands")
            e.ty = "bool"
        elif op == "/":
            if lt not in _NUMERIC or rt not in _NUMERIC:
                raise PrismTypeError("'/' needs numeric operands")
            e.ty = "real"
        else:
            if lt not in _NUMERIC or rt not in _NUMERIC:
                raise PrismTypeError(f"{op!r} needs numeric operands")
            e.ty = "real" if "real" in (lt, rt) else "int"
        return e.ty
    if isinstance(e, Ternary):
        if typecheck(e.cond, var_types) != "bool":
            raise PrismTypeError("ternary condition must be bool")
        tt = typecheck(e.then, var_types)
        ot = typecheck(e.other, var_types)
        if (tt == "bool") != (ot == "bool"):
            raise PrismTypeError("ternary branches mix bool and numbers")
        e.ty = tt if tt == ot else "real"
        return e.ty
    if isinstance(e, Call):
        ts = [typecheck(a, var_types) for a in e.args]
        if any(t not in _NUMERIC for t in ts):
            raise PrismTypeError(f"{e.func}() needs numeric arguments")
        if e.func in ("floor", "ceil"):
            e.ty = "int"
        elif e.func == "mod":
            if ts != ["int", "int"]:
                raise PrismTypeError("mod() needs integer arguments")
            e.ty = "int"
        elif e.func == "pow":
            e.ty = "int" if ts == ["int", "int"] else "real"
        else:
            e.ty = "real" if "real" in ts else "int"
        return e.ty
    raise TypeError(f"not an expression node: {e!r}")
