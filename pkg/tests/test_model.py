import numpy as np
import pytest

from policymc.benchmarks import load_benchmark
from policymc.engine import compiled
from policymc.errors import DisabledActionError, LimitExceeded, ModelError
from policymc.explicit import BuildLimits, build_mdp, export_model, import_model
from policymc.prism import parse_model
from policymc.simulate import Simulator, enabled_actions, reset, stream_rng

from oracles import naive_label_states, oracle_bfs


class FixedRng:
    """Feeds a scripted sequence of uniforms to the sampler."""

    def __init__(self, *values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def test_coin_counts(coin_mdp):
    assert coin_mdp.n_states == 2
    assert coin_mdp.n_transitions == 3
    assert coin_mdp.enabled(0) == [("flip", [(0, 0.5), (1, 0.5)])]


def test_reset_examples(coin_model, lake_model, taxi_model):
    assert reset(coin_model) == (0,)
    assert reset(lake_model) == (0,)
    taxi = compiled(taxi_model)
    v = reset(taxi_model)
    d = taxi.state_dict(v)
    assert d["fuel"] == 10 and d["jobs_done"] == 0


def test_enabled_actions_examples(coin_model, lake_model):
    assert enabled_actions(coin_model, (0,)) == ["flip"]
    assert enabled_actions(coin_model, (1,)) == ["done"]
    for pos in (0, 1, 4, 14):
        assert enabled_actions(lake_model, (pos,)) == ["down", "left", "right", "up"]
    assert enabled_actions(lake_model, (5,)) == []


def test_step_inverse_cdf(coin_model):
    sim = Simulator(coin_model, rng=FixedRng(0.3))
    step = sim.step("flip")
    assert step.state == (1,)  # first update consumes [0, 0.5]
    sim2 = Simulator(coin_model, rng=FixedRng(0.5))
    assert sim2.step("flip").state == (1,)  # boundary tie goes to the earlier update
    sim3 = Simulator(coin_model, rng=FixedRng(0.51))
    assert sim3.step("flip").state == (0,)


def test_step_lake_intended_branch(lake_model):
    sim = Simulator(lake_model, target_label="finished", rng=FixedRng(0.1))
    step = sim.step("right")  # intended branch holds the first third of mass
    assert step.state == (1,)
    assert not step.terminal


def test_step_taxi_pickup_penalty(taxi_model):
    cm = compiled(taxi_model)
    sim = Simulator(taxi_model, reward_structure="penalty_step",
                    target_label="finished", rng=FixedRng(0.0))
    # drive the taxi onto the first passenger cell (3, 0)
    sim.state = tuple(
        {"x": 3, "y": 0}.get(n, i) for n, i in zip(cm.var_names, cm.initial_state)
    )
    step = sim.step("pick_up")
    assert step.reward == -21.0
    assert cm.state_dict(step.state)["on_board"] is True


def test_sampled_steps_stay_in_support(lake_model, lake_mdp, rng):
    sim = Simulator(lake_model, target_label="finished", rng=rng)
    cm = sim.cm
    v = sim.reset()
    for _ in range(300):
        if sim.is_terminal(v):
            v = sim.reset()
            continue
        actions = sim.enabled_actions(v)
        a = actions[int(rng.integers(0, len(actions)))]
        support = set(cm.successors(v, cm.action_ids[a]))
        step = sim.step(a)
        assert step.state in support
        v = step.state


def test_invalid_action_handlers(taxi_model):
    sim = Simulator(taxi_model, reward_structure="penalty_step",
                    invalid_action="error", rng=FixedRng(0.0))
    with pytest.raises(DisabledActionError):
        sim.step("drop")  # nobody on board at the initial state
    sim2 = Simulator(taxi_model, reward_structure="penalty_step",
                     invalid_action="selfloop", rng=FixedRng(0.0))
    step = sim2.step("drop")
    assert step.state == sim2.cm.initial_state
    assert step.reward == -21.0  # misplaced drop pays the declared penalty
    assert not step.terminal


def test_every_state_has_an_action_after_repair(lake_mdp, taxi_mdp):
    for mx in (lake_mdp, taxi_mdp):
        assert np.all(np.diff(mx.row_ptr) >= 1)
        for s in np.flatnonzero(mx.deadlock):
            (name, dist), = mx.enabled(s)
            assert name == "τ#deadlock"
            assert dist == [(s, 1.0)]


def test_limit_exceeded_reports_partial_counts(lake_model):
    with pytest.raises(LimitExceeded) as err:
        build_mdp(lake_model, BuildLimits(max_states=4))
    assert err.value.states == 4


def test_dtmc_with_nondeterminism_rejected():
    src = """dtmc
module m
  x : [0..2] init 0;
  [a] x < 2 -> 1: (x'=x+1);
  [b] x = 0 -> 1: (x'=2);
endmodule
"""
    with pytest.raises(ModelError):
        build_mdp(parse_model(src))


def test_probability_sum_violation_names_command():
    src = """mdp
module m
  x : [0..1] init 0;
  [a] x = 0 -> 0.5: (x'=1) + 0.6: (x'=0);
endmodule
"""
    with pytest.raises(ModelError) as err:
        build_mdp(parse_model(src))
    assert "[a]" in str(err.value)


def test_zero_probability_update_rejected():
    src = """mdp
const double p = 0;
module m
  x : [0..1] init 0;
  [a] x = 0 -> p: (x'=1) + 1-p: (x'=0);
endmodule
"""
    with pytest.raises(ModelError):
        build_mdp(parse_model(src))


def test_out_of_bounds_assignment_rejected():
    src = """mdp
module m
  x : [0..1] init 0;
  [a] true -> 1: (x'=x+1);
endmodule
"""
    with pytest.raises(ModelError) as err:
        build_mdp(parse_model(src))
    assert "'x'" in str(err.value)


def test_overlapping_same_label_guards_rejected():
    src = """mdp
module m
  x : [0..1] init 0;
  [a] x = 0 -> 1: (x'=1);
  [a] x < 1 -> 1: (x'=0);
endmodule
"""
    with pytest.raises(ModelError):
        build_mdp(parse_model(src))


# -- oracle agreement ----------------------------------------------------------


@pytest.mark.parametrize("name,consts", [
    ("coin", None),
    ("frozen_lake", None),
    ("taxi", {"MAX_FUEL": 4, "MAX_JOBS": 1}),
])
def test_builder_matches_simulator_bfs_oracle(name, consts):
    model = load_benchmark(name, consts)
    mx = build_mdp(model)
    states, transitions, deadlocks = oracle_bfs(model)
    assert set(mx.states) == set(states)
    assert mx.states == states  # identical BFS discovery order
    got = {}
    for s in range(mx.n_states):
        for name_, dist in mx.enabled(s):
            if name_ == "τ#deadlock":
                assert mx.states[s] in deadlocks
                continue
            got[(mx.states[s], name_)] = {
                mx.states[j]: p for j, p in dist
            }
    want = {k: dict(v) for k, v in transitions.items()}
    assert got == want  # exact float equality, both paths

    for label in model.labels:
        assert {mx.states[i] for i in np.flatnonzero(mx.labels[label])} == \
            naive_label_states(model, label, states)


def test_build_determinism_byte_identical(tmp_path, lake_model):
    a = build_mdp(lake_model)
    b = build_mdp(load_benchmark("frozen_lake"))
    export_model(a, tmp_path / "a.bin")
    export_model(b, tmp_path / "b.bin")
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


def test_export_import_round_trip(tmp_path, taxi_mdp):
    path = tmp_path / "taxi.bin"
    export_model(taxi_mdp, path)
    back = import_model(path)
    assert back.n_states == taxi_mdp.n_states
    assert back.states == taxi_mdp.states
    assert np.array_equal(back.succ, taxi_mdp.succ)
    assert np.array_equal(back.prob, taxi_mdp.prob)
    assert np.array_equal(back.choice_action, taxi_mdp.choice_action)
    assert np.array_equal(back.row_ptr, taxi_mdp.row_ptr)
    for k in taxi_mdp.rewards:
        assert np.array_equal(back.rewards[k], taxi_mdp.rewards[k])
    for k in taxi_mdp.labels:
        assert np.array_equal(back.labels[k], taxi_mdp.labels[k])
    export_model(back, tmp_path / "again.bin")
    assert (tmp_path / "again.bin").read_bytes() == path.read_bytes()


def test_stream_rng_is_stable():
    a = stream_rng(128, "env").random()
    b = stream_rng(128, "env").random()
    c = stream_rng(128, "agent").random()
    assert a == b
    assert a != c
