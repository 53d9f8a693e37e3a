"""Reachability, bounded-reachability, and expected-value checking."""

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import CheckError, PrismTypeError
from ..explicit import ExplicitModel
from ..prism.eval import compile_expr, typecheck
from .numeric import (
    EPSILON, MAX_ITERATIONS, bounded_jacobi, gauss_seidel,
    restricted_value_iteration,
)
from .properties import Property, parse_property
from .qualitative import prob01

__all__ = [
    "Property", "parse_property", "CheckResult", "check", "check_reachability",
    "check_bounded", "check_expected", "check_policy", "target_mask",
    "extract_policy", "prob01", "format_value",
]


@dataclass
class CheckResult:
    value: float  # math.inf for divergent expectations
    prop: str
    states: int
    transitions: int
    iterations: int = 0
    residual: float = 0.0
    per_state: Optional[np.ndarray] = field(default=None, repr=False)
    build_time: float = 0.0
    check_time: float = 0.0
    fallback_count: int = 0

    def metrics(self):
        return {
            "property": self.prop,
            "value": format_value(self.value, machine=True),
            "states": self.states,
            "transitions": self.transitions,
            "iterations": self.iterations,
            "residual": format_value(self.residual, machine=True),
            "fallback_count": self.fallback_count,
        }


def format_value(value, machine=False):
    if value is None:
        return "n/a"
    if math.isinf(value):
        return "inf"
    return f"{value:.17g}" if machine else f"{value:.4g}"


def target_mask(mx: ExplicitModel, prop: Property) -> np.ndarray:
    if prop.target_label is not None:
        try:
            return mx.labels[prop.target_label]
        except KeyError:
            raise CheckError(f"unknown label {prop.target_label!r}") from None
    expr = prop.target_expr
    var_types = {
        n: ("bool" if k == "bool" else "int")
        for n, k in zip(mx.var_names, mx.var_kinds)
    }
    try:
        if typecheck(expr, var_types) != "bool":
            raise CheckError(f"target expression in {prop.text!r} is not boolean")
    except PrismTypeError as exc:
        raise CheckError(f"bad target in {prop.text!r}: {exc}") from exc
    fn = compile_expr(expr, {n: i for i, n in enumerate(mx.var_names)})
    return np.fromiter((bool(fn(v)) for v in mx.states), dtype=bool, count=mx.n_states)


def _mode_for(mx, prop):
    if prop.opt is None:
        if mx.kind != "dtmc":
            raise CheckError(
                f"{prop.text!r} has no min/max but the model is an MDP; "
                f"use {prop.kind}min/{prop.kind}max or check under a policy"
            )
        return "dtmc"
    if mx.kind != "mdp":
        raise CheckError(
            f"{prop.text!r} asks for an optimum but the model is a DTMC"
        )
    return prop.opt


def check(mx: ExplicitModel, prop, on_sweep=None) -> CheckResult:
    if isinstance(prop, str):
        prop = parse_property(prop)
    if prop.kind == "P" and prop.bound is not None:
        return check_bounded(mx, prop)
    if prop.kind == "P":
        return check_reachability(mx, prop, on_sweep=on_sweep)
    return check_expected(mx, prop, on_sweep=on_sweep)


def check_reachability(mx, prop, on_sweep=None) -> CheckResult:
    t0 = time.perf_counter()
    mode = _mode_for(mx, prop)
    target = target_mask(mx, prop)
    prob0, prob1 = prob01(mx, target, mode)
    x = np.zeros(mx.n_states)
    x[prob1] = 1.0
    order = np.flatnonzero(~(prob0 | prob1))
    iterations, resid = gauss_seidel(mx, x, order, mode, on_sweep=on_sweep)
    return CheckResult(
        value=float(x[0]), prop=prop.text, states=mx.n_states,
        transitions=mx.n_transitions, iterations=iterations, residual=resid,
        per_state=x, check_time=time.perf_counter() - t0,
    )


def check_bounded(mx, prop) -> CheckResult:
    t0 = time.perf_counter()
    mode = _mode_for(mx, prop)
    target = target_mask(mx, prop)
    y = bounded_jacobi(mx, target, prop.bound, mode)
    return CheckResult(
        value=float(y[0]), prop=prop.text, states=mx.n_states,
        transitions=mx.n_transitions, iterations=prop.bound, residual=0.0,
        per_state=y, check_time=time.perf_counter() - t0,
    )


def check_expected(mx, prop, on_sweep=None) -> CheckResult:
    t0 = time.perf_counter()
    mode = _mode_for(mx, prop)
    target = target_mask(mx, prop)
    if prop.kind == "T":
        add = np.ones(mx.n_choices)
    else:
        try:
            add = mx.rewards[prop.reward]
        except KeyError:
            raise CheckError(f"unknown reward structure {prop.reward!r}") from None
        if np.any(add < 0):
            raise CheckError(
                "expected accumulation needs non-negative rewards "
                f"(structure {prop.reward!r} has negative entries)"
            )
    # the expectation is finite exactly where the target is reached almost
    # surely under the relevant mode (min for Tmax/Rmax, max for Tmin/Rmin)
    if mode == "dtmc":
        _, finite = prob01(mx, target, "dtmc")
        choice_ok = None
    elif mode == "max":
        _, finite = prob01(mx, target, "min")
        choice_ok = None
    else:
        _, finite = prob01(mx, target, "max")
        # only choices whose whole support keeps almost-sure reachability
        from .qualitative import _choice_all, _state_any

        choice_ok = _choice_all(finite[mx.succ], mx.choice_ptr)
        has_ok = _state_any(choice_ok, mx.row_ptr)
        if not bool(has_ok[finite & ~target].all()):
            raise CheckError(
                "internal: an almost-sure state lost all of its choices"
            )
    x = np.zeros(mx.n_states)
    order = np.flatnonzero(finite & ~target)
    iterations, resid = gauss_seidel(
        mx, x, order, mode, add=add, choice_ok=choice_ok, on_sweep=on_sweep
    )
    x[~finite] = math.inf
    x[target] = 0.0
    value = float(x[0])
    return CheckResult(
        value=value, prop=prop.text, states=mx.n_states,
        transitions=mx.n_transitions, iterations=iterations, residual=resid,
        per_state=x, check_time=time.perf_counter() - t0,
    )


def check_policy(model, policy, prop, limits=None, invalid_action="error",
                 permissive=None) -> CheckResult:
    """Build the policy-induced chain (or permissive sub-MDP) and check it."""
    from ..induced import build_induced_dtmc, build_induced_mdp

    if isinstance(prop, str):
        prop = parse_property(prop)
    t0 = time.perf_counter()
    if permissive is not None:
        induced = build_induced_mdp(model, permissive, limits=limits)
    else:
        induced = build_induced_dtmc(
            model, policy, limits=limits, invalid_action=invalid_action
        )
    build_time = time.perf_counter() - t0
    result = check(induced.model, prop)
    result.build_time = build_time
    result.fallback_count = induced.fallback_count
    return result


def extract_policy(mx, prop):
    """Optimizing policy from converged values: lowest action index among
    epsilon-optimal choices (epsilon = 1e-9)."""
    from ..policies import TabularPolicy

    if isinstance(prop, str):
        prop = parse_property(prop)
    if prop.bound is not None:
        raise CheckError("policy extraction needs an unbounded property")
    result = check(mx, prop)
    x = result.per_state
    finite = np.isfinite(x)
    choice_vals = np.add.reduceat(
        mx.prob * np.where(finite, x, 0.0)[mx.succ], mx.choice_ptr[:-1]
    )
    if prop.kind == "T":
        choice_vals += 1.0
    elif prop.kind == "R":
        choice_vals += mx.rewards[prop.reward]
    mapping = {}
    for s in range(mx.n_states):
        if mx.deadlock[s]:
            continue  # repaired states only carry the reserved self-loop
        lo, hi = mx.row_ptr[s], mx.row_ptr[s + 1]
        vals = choice_vals[lo:hi]
        best = np.max(vals) if prop.opt == "max" else np.min(vals)
        aids = sorted(
            int(mx.choice_action[c])
            for c in range(lo, hi)
            if abs(choice_vals[c] - best) <= 1e-9
        )
        mapping[mx.states[s]] = mx.action_names[aids[0]]
    alphabet = tuple(mx.action_names[:-1])  # strip reserved deadlock action
    return TabularPolicy(mapping, alphabet=alphabet, var_names=mx.var_names)
