import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from policymc.benchmarks import benchmark_source, load_benchmark
from policymc.errors import (
    EvalError, PrismNameError, PrismSyntaxError, PrismTypeError,
    UnresolvedConstantError,
)
from policymc.prism import (
    eval_expr, evaluate_reference, fold_constants, label_states, model_to_str,
    parse_expression_text, parse_model,
)
from policymc.prism.analysis import resolve_program, substitute
from policymc.prism.parser import parse_program
from policymc.prism.syntax import Binary, Call, IntLit, Ternary, Unary, VarRef, lit


MINI = "mdp const int N = 4; module m x:[0..N] init 0; [a] x<N -> 1: (x'=x+1); endmodule"


def test_minimal_grammar():
    m = parse_model(MINI)
    assert len(m.modules) == 1
    assert len(m.modules[0].commands) == 1
    x = m.variable("x")
    assert (x.low, x.high, x.init) == (0, 4, 0)
    assert m.constants == {"N": 4}


def test_lake_override_has_three_updates():
    m = load_benchmark("frozen_lake", {"slippery": 0.333})
    assert m.constants["slippery"] == 0.333
    left = [c for c in m.modules[0].commands if c.label == "left"]
    assert len(left) == 1 and len(left[0].updates) == 3


def test_taxi_alphabet():
    m = load_benchmark("taxi", {"MAX_FUEL": 10, "MAX_JOBS": 2})
    assert m.action_alphabet == ("drop", "east", "north", "pick_up", "south", "west")


def test_lex_error_reports_position():
    with pytest.raises(PrismSyntaxError) as err:
        parse_model("mdp\nmodule m x:[0..1] init 0; [a] x<1 -> 1: (x'=x+1); endmodule\n$")
    assert err.value.line == 3


def test_undeclared_identifier():
    with pytest.raises(PrismNameError):
        parse_model("mdp module m x:[0..1] init 0; [a] y<1 -> 1: (x'=1); endmodule")


def test_type_mismatch():
    with pytest.raises(PrismTypeError):
        parse_model("mdp module m x:[0..1] init 0; [a] x+1 -> 1: (x'=1); endmodule")
    with pytest.raises(PrismTypeError):
        parse_model("mdp module m b: bool init false; [a] b & 1 < 2 -> 1: (b'=1); endmodule")


def test_unresolved_constant():
    src = "mdp const int K; module m x:[0..K] init 0; [a] x<K -> 1: (x'=x+1); endmodule"
    with pytest.raises(UnresolvedConstantError):
        parse_model(src)
    m = parse_model(src, {"K": 3})
    assert m.variable("x").high == 3


def test_duplicate_variable():
    with pytest.raises(PrismNameError):
        parse_model(
            "mdp module m x:[0..1] init 0; [a] x<1 -> 1: (x'=1); endmodule "
            "module n x:[0..1] init 0; [b] x<1 -> 1: (x'=1); endmodule"
        )


def test_global_assignment_in_synchronized_command_rejected():
    src = ("mdp global g:[0..1] init 0; "
           "module m x:[0..1] init 0; [a] x<1 -> 1: (g'=1); endmodule")
    with pytest.raises(PrismNameError):
        parse_model(src)


def test_silent_actions_sort_after_user_labels():
    m = parse_model(
        "mdp module m x:[0..2] init 0; [z] x=0 -> 1: (x'=1); [] x=1 -> 1: (x'=2); endmodule"
    )
    assert m.action_alphabet[0] == "z"
    assert m.action_alphabet[1].startswith("τ#m#")
    assert list(m.action_alphabet) == sorted(m.action_alphabet)


# -- expression evaluation ---------------------------------------------------


def test_eval_examples():
    assert eval_expr(parse_expression_text("max(3-5, 5-3)"), {}) == 2
    assert eval_expr(parse_expression_text("x < 4"), {"x": 4}) is False
    e = parse_expression_text("21 + max(x-dx,dx-x) + max(y-dy,dy-y)")
    assert eval_expr(e, {"x": 0, "y": 0, "dx": 2, "dy": 1}) == 24


def test_eval_errors():
    with pytest.raises(EvalError):
        eval_expr(parse_expression_text("1 / x"), {"x": 0})
    with pytest.raises(EvalError):
        eval_expr(parse_expression_text("mod(5, x)"), {"x": 0})


def test_fraction_literals_become_doubles():
    m = parse_model(
        "mdp const double p = 1/3; module m x:[0..1] init 0; "
        "[a] x=0 -> p: (x'=1) + 1-p: (x'=0); endmodule"
    )
    assert m.constants["p"] == 1 / 3


# -- round trips and confluence ----------------------------------------------


@pytest.mark.parametrize("name", ["coin", "frozen_lake", "taxi", "collision_avoidance"])
def test_pretty_print_round_trip(name):
    m = parse_model(benchmark_source(name))
    again = parse_model(model_to_str(m))
    assert m == again


def test_fold_confluence_with_formula_inlining():
    source = benchmark_source("frozen_lake")
    prog_a = parse_program(source)
    prog_b = parse_program(source)
    # pre-fold every formula body; resolution folds again after inlining
    for f in prog_b.formulas:
        f.expr = fold_constants(f.expr)
    assert resolve_program(prog_a, {}) == resolve_program(prog_b, {})


# -- fuzzed compiled-vs-reference agreement ----------------------------------

_NUM_VARS = {"x": 3, "y": -2, "z": 7}
_BOOL_VARS = {"p": True, "q": False}
_ENV = {**_NUM_VARS, **_BOOL_VARS}


def _nums(depth):
    if depth == 0:
        return st.one_of(
            st.integers(-5, 5).map(lit),
            st.floats(-4, 4, allow_nan=False).map(lambda v: lit(float(v))),
            st.sampled_from(sorted(_NUM_VARS)).map(VarRef),
        )
    sub = _nums(depth - 1)
    binop = st.tuples(st.sampled_from("+-*"), sub, sub).map(lambda t: Binary(*t))
    call = st.tuples(st.sampled_from(["min", "max"]), st.tuples(sub, sub)).map(
        lambda t: Call(t[0], t[1])
    )
    tern = st.tuples(_bools(depth - 1), sub, sub).map(lambda t: Ternary(*t))
    neg = sub.map(lambda e: Unary("-", e))
    return st.one_of(sub, binop, call, tern, neg)


def _bools(depth):
    if depth == 0:
        return st.one_of(
            st.booleans().map(lit),
            st.sampled_from(sorted(_BOOL_VARS)).map(VarRef),
        )
    nsub = _nums(depth - 1)
    bsub = _bools(depth - 1)
    cmp_ = st.tuples(st.sampled_from(["<", "<=", ">", ">=", "=", "!="]), nsub, nsub).map(
        lambda t: Binary(*t)
    )
    logic = st.tuples(st.sampled_from(["&", "|", "=>"]), bsub, bsub).map(
        lambda t: Binary(*t)
    )
    return st.one_of(bsub, cmp_, logic, bsub.map(lambda e: Unary("!", e)))


@settings(max_examples=1000, deadline=None)
@given(st.one_of(_nums(3), _bools(3)))
def test_compiled_matches_reference_bit_for_bit(expr):
    ref = evaluate_reference(expr, _ENV)
    got = eval_expr(expr, _ENV)
    assert type(got) is type(ref)
    if isinstance(ref, float):
        assert math.isnan(got) == math.isnan(ref)
        if not math.isnan(ref):
            assert got == ref and math.copysign(1, got) == math.copysign(1, ref)
    else:
        assert got == ref


# -- labels -------------------------------------------------------------------


def test_label_states(lake_model):
    water = label_states(lake_model, "water")
    holes = {
        pos for pos in range(16)
        if evaluate_reference(water, {"pos": pos})
    }
    assert holes == {5, 7, 11, 12}
    frisbee = label_states(lake_model, "frisbee")
    assert [p for p in range(16) if evaluate_reference(frisbee, {"pos": p})] == [15]
    with pytest.raises(PrismNameError):
        label_states(lake_model, "foo")


def test_substitute_replaces_all_refs():
    e = parse_expression_text("a + a * b")
    out = substitute(e, {"a": IntLit(2)})
    assert evaluate_reference(out, {"b": 3}) == 8
