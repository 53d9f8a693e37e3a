"""Resolution pipeline: constants, formula macros, folding, validation.

parse_model() runs the whole pipeline and is the only entry point most
callers need.
"""

import copy
from dataclasses import replace

from ..errors import (
    PrismNameError, PrismTypeError, UnresolvedConstantError,
)
from .eval import evaluate_reference, is_literal, typecheck
from .parser import parse_program
from .syntax import (
    Binary, BoolLit, Call, Command, Expr, ModuleDecl, RawProgram, ResolvedVar,
    RewardItem, SILENT_PREFIX, SymbolicModel, Ternary, Unary, VarRef, lit,
)


def substitute(e: Expr, bindings) -> Expr:
    """Replace VarRefs found in ``bindings`` by (copies of) the bound trees."""
    if isinstance(e, VarRef):
        repl = bindings.get(e.name)
        return copy.deepcopy(repl) if repl is not None else e
    if isinstance(e, Unary):
        return replace(e, operand=substitute(e.operand, bindings))
    if isinstance(e, Binary):
        return replace(e, lhs=substitute(e.lhs, bindings), rhs=substitute(e.rhs, bindings))
    if isinstance(e, Ternary):
        return replace(
            e,
            cond=substitute(e.cond, bindings),
            then=substitute(e.then, bindings),
            other=substitute(e.other, bindings),
        )
    if isinstance(e, Call):
        return replace(e, args=tuple(substitute(a, bindings) for a in e.args))
    return e


def fold_constants(e: Expr) -> Expr:
    """Evaluate literal-only subtrees and prune boolean identities.

    Besides plain folding, `x & true`, `x | false`, dead `&`/`|` branches and
    ternaries with a literal condition collapse, so guard splits on constant
    parameters cost nothing at expansion time.
    """
    if isinstance(e, VarRef) or is_literal(e):
        return e
    if isinstance(e, Unary):
        e = replace(e, operand=fold_constants(e.operand))
        if is_literal(e.operand):
            return lit(evaluate_reference(e, {}))
        return e
    if isinstance(e, Binary):
        e = replace(e, lhs=fold_constants(e.lhs), rhs=fold_constants(e.rhs))
        if is_literal(e.lhs) and is_literal(e.rhs):
            return lit(evaluate_reference(e, {}))
        if e.op in ("&", "|", "=>"):
            return _simplify_bool(e)
        return e
    if isinstance(e, Ternary):
        e = replace(
            e,
            cond=fold_constants(e.cond),
            then=fold_constants(e.then),
            other=fold_constants(e.other),
        )
        if isinstance(e.cond, BoolLit):
            return e.then if e.cond.value else e.other
        return e
    if isinstance(e, Call):
        e = replace(e, args=tuple(fold_constants(a) for a in e.args))
        if all(is_literal(a) for a in e.args):
            return lit(evaluate_reference(e, {}))
        return e
    raise TypeError(f"not an expression node: {e!r}")


def _simplify_bool(e: Binary) -> Expr:
    lhs_lit = e.lhs.value if isinstance(e.lhs, BoolLit) else None
    rhs_lit = e.rhs.value if isinstance(e.rhs, BoolLit) else None
    if e.op == "&":
        if lhs_lit is True:
            return e.rhs
        if rhs_lit is True:
            return e.lhs
        if lhs_lit is False or rhs_lit is False:
            return BoolLit(False)
    elif e.op == "|":
        if lhs_lit is False:
            return e.rhs
        if rhs_lit is False:
            return e.lhs
        if lhs_lit is True or rhs_lit is True:
            return BoolLit(True)
    else:  # =>
        if lhs_lit is True:
            return e.rhs
        if lhs_lit is False or rhs_lit is True:
            return BoolLit(True)
    return e


def _resolve_constants(decls, overrides):
    const_types = {}
    values = {}
    pending = {}
    for d in decls:
        if d.name in const_types:
            raise PrismNameError(f"duplicate constant {d.name!r}")
        const_types[d.name] = d.kind
        if d.name in overrides:
            values[d.name] = _coerce_const(d.name, d.kind, overrides[d.name])
        elif d.value is not None:
            pending[d.name] = d.value
        else:
            pending[d.name] = None
    unknown = set(overrides) - set(const_types)
    if unknown:
        raise PrismNameError(
            "overrides for undeclared constants: " + ", ".join(sorted(unknown))
        )
    # constants may reference earlier/later constants; iterate to a fixpoint
    progress = True
    while pending and progress:
        progress = False
        for name in list(pending):
            expr = pending[name]
            if expr is None:
                continue
            folded = fold_constants(substitute(expr, {k: lit(v) for k, v in values.items()}))
            if is_literal(folded):
                values[name] = _coerce_const(name, const_types[name], folded.value)
                del pending[name]
                progress = True
    if pending:
        raise UnresolvedConstantError(pending)
    return values


def _coerce_const(name, kind, value):
    if kind == "bool":
        if not isinstance(value, bool):
            raise PrismTypeError(f"constant {name!r} must be bool, got {value!r}")
        return value
    if isinstance(value, bool):
        raise PrismTypeError(f"constant {name!r} must be numeric, got a bool")
    if kind == "int":
        if isinstance(value, float):
            if value != int(value):
                raise PrismTypeError(f"constant {name!r} must be an integer, got {value!r}")
            value = int(value)
        return int(value)
    return float(value)


def _inline_formulas(formulas, constants):
    """Expand formula macros (which may reference each other) into plain trees."""
    bindings = {k: lit(v) for k, v in constants.items()}
    resolved = {}
    remaining = {f.name: f.expr for f in formulas}
    if len(remaining) != len(formulas):
        raise PrismNameError("duplicate formula name")
    while remaining:
        progress = False
        for name in list(remaining):
            expr = remaining[name]
            refs = _collect_refs(expr)
            if refs & set(remaining):
                continue
            resolved[name] = fold_constants(substitute(expr, {**bindings, **resolved_trees(resolved)}))
            del remaining[name]
            progress = True
        if not progress:
            raise PrismNameError(
                "cyclic formula definitions: " + ", ".join(sorted(remaining))
            )
    return {**bindings, **resolved_trees(resolved)}


def resolved_trees(resolved):
    return dict(resolved)


def _collect_refs(e: Expr, acc=None):
    if acc is None:
        acc = set()
    if isinstance(e, VarRef):
        acc.add(e.name)
    elif isinstance(e, Unary):
        _collect_refs(e.operand, acc)
    elif isinstance(e, Binary):
        _collect_refs(e.lhs, acc)
        _collect_refs(e.rhs, acc)
    elif isinstance(e, Ternary):
        for sub in (e.cond, e.then, e.other):
            _collect_refs(sub, acc)
    elif isinstance(e, Call):
        for a in e.args:
            _collect_refs(a, acc)
    return acc


def _resolve_var(decl, bindings, var_types_for_bounds):
    if decl.kind == "bool":
        low, high = 0, 1
        init = False
    else:
        low = _fold_to_int(decl.low, bindings, f"lower bound of {decl.name!r}")
        high = _fold_to_int(decl.high, bindings, f"upper bound of {decl.name!r}")
        init = low
    if decl.init is not None:
        folded = fold_constants(substitute(decl.init, bindings))
        if not is_literal(folded):
            raise PrismTypeError(f"initial value of {decl.name!r} is not constant")
        init = folded.value
    if decl.kind == "bool":
        if not isinstance(init, bool):
            raise PrismTypeError(f"initial value of {decl.name!r} must be bool")
        init_i = int(init)
    else:
        if isinstance(init, bool) or isinstance(init, float):
            raise PrismTypeError(f"initial value of {decl.name!r} must be an int")
        init_i = int(init)
        if not (low <= init_i <= high):
            raise PrismTypeError(
                f"variable {decl.name!r}: init {init_i} outside [{low}..{high}]"
            )
    if low > high:
        raise PrismTypeError(f"variable {decl.name!r}: empty range [{low}..{high}]")
    return ResolvedVar(decl.name, decl.kind, low, high, init_i, decl.module)


def _fold_to_int(e, bindings, what):
    folded = fold_constants(substitute(e, bindings))
    if not is_literal(folded) or isinstance(folded.value, (bool, float)):
        raise PrismTypeError(f"{what} must be a constant integer")
    return int(folded.value)


def parse_model(source_text: str, const_overrides=None) -> SymbolicModel:
    """Parse, resolve constants and formulas, fold, type-check, validate."""
    prog = parse_program(source_text)
    return resolve_program(prog, const_overrides or {})


def resolve_program(prog: RawProgram, const_overrides) -> SymbolicModel:
    constants = _resolve_constants(prog.constants, const_overrides)
    bindings = _inline_formulas(prog.formulas, constants)

    # variables, in declaration order (globals first, then per module)
    var_decls = list(prog.globals)
    for mod in prog.modules:
        var_decls.extend(mod.variables)
    seen = set(constants) | {f.name for f in prog.formulas}
    variables = []
    for d in var_decls:
        if d.name in seen or any(v.name == d.name for v in variables):
            raise PrismNameError(f"duplicate variable {d.name!r}")
        variables.append(_resolve_var(d, bindings, None))
    var_types = {v.name: ("bool" if v.kind == "bool" else "int") for v in variables}
    owners = {v.name: v.module for v in variables}

    def rewrite(e, expect=None, what=""):
        # type strictness is checked on the unfolded tree so that pruned
        # branches cannot hide a bool/numeric mix
        inlined = substitute(e, bindings)
        ty = typecheck(inlined, var_types)
        if expect == "bool" and ty != "bool":
            raise PrismTypeError(f"{what} must be bool")
        if expect == "numeric" and ty == "bool":
            raise PrismTypeError(f"{what} must be numeric")
        out = fold_constants(inlined)
        typecheck(out, var_types)
        return out

    modules = []
    for mod in prog.modules:
        commands = []
        silent_idx = 0
        for cmd in mod.commands:
            guard = rewrite(cmd.guard, "bool", f"guard in module {mod.name!r}")
            updates = []
            for up in cmd.updates:
                prob = None
                if up.prob is not None:
                    prob = rewrite(up.prob, "numeric", "update probability")
                assigned = set()
                assigns = []
                for name, e in up.assigns:
                    if name not in owners:
                        raise PrismNameError(
                            f"assignment to undeclared variable {name!r}"
                        )
                    if owners[name] is not None and owners[name] != mod.name:
                        raise PrismNameError(
                            f"module {mod.name!r} cannot assign {name!r} "
                            f"(owned by module {owners[name]!r})"
                        )
                    if owners[name] is None and cmd.label is not None:
                        raise PrismNameError(
                            f"global {name!r} cannot be assigned in the "
                            f"synchronizing command [{cmd.label}]"
                        )
                    if name in assigned:
                        raise PrismNameError(
                            f"variable {name!r} assigned twice in one update"
                        )
                    assigned.add(name)
                    value = rewrite(e, None, "assignment")
                    if var_types[name] == "bool":
                        if value.ty != "bool":
                            raise PrismTypeError(f"assignment to bool {name!r} must be bool")
                    elif value.ty != "int":
                        raise PrismTypeError(
                            f"assignment to {name!r} must be int, got {value.ty}"
                        )
                    assigns.append((name, value))
                updates.append(type(up)(prob, tuple(assigns)))
            if cmd.label is None:
                action = f"{SILENT_PREFIX}{mod.name}#{silent_idx}"
                silent_idx += 1
            else:
                action = cmd.label
            commands.append(
                Command(cmd.label, guard, tuple(updates), line=cmd.line, action=action)
            )
        modules.append(ModuleDecl(mod.name, [v for v in variables if v.module == mod.name], commands))

    labels = {
        name: rewrite(e, "bool", f"label {name!r}") for name, e in prog.labels.items()
    }
    rewards = {}
    for name, items in prog.rewards.items():
        out_items = []
        for it in items:
            out_items.append(
                RewardItem(
                    it.action,
                    rewrite(it.guard, "bool", f"reward guard in {name!r}"),
                    rewrite(it.value, "numeric", f"reward value in {name!r}"),
                )
            )
        rewards[name] = tuple(out_items)

    user_actions = sorted({c.label for m in modules for c in m.commands if c.label})
    silent_actions = sorted(
        c.action for m in modules for c in m.commands if c.label is None
    )
    alphabet = tuple(user_actions + silent_actions)

    # reward items naming unknown action labels are almost surely typos
    for name, items in rewards.items():
        for it in items:
            if it.action and it.action not in alphabet:
                raise PrismNameError(
                    f"rewards {name!r} references unknown action [{it.action}]"
                )

    return SymbolicModel(
        kind=prog.kind,
        constants=constants,
        variables=variables,
        modules=modules,
        labels=labels,
        rewards=rewards,
        action_alphabet=alphabet,
    )


def label_states(model: SymbolicModel, label: str) -> Expr:
    """The label's predicate, for use as a reachability target."""
    try:
        return model.labels[label]
    except KeyError:
        raise PrismNameError(f"unknown label {label!r}") from None
