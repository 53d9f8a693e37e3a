"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``. The numeric kernels are
JIT-compiled once up front so the stated runtime budgets measure the
algorithms, not compilation.
"""

import math
import os
import resource
import time
from contextlib import contextmanager

import numpy as np
import pytest

from policymc.benchmarks import load_benchmark
from policymc.checker import check, check_policy
from policymc.cli import main as cli_main
from policymc.engine import compiled
from policymc.explicit import build_mdp, export_model
from policymc.induced import build_induced_dtmc, build_induced_mdp
from policymc.policies import FallbackPolicy, TabularPolicy, mlp_backprop_check
from policymc.tracker import RunStore, dump_json17
from policymc.training import DeepQConfig, deep_q_train
from policymc.transforms import clamp_remap, permissive, remap, tail_lumping_partition

from oracles import naive_label_states, oracle_bfs, policy_iteration_reachability


@contextmanager
def criterion(num, name):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {num:>2} {name}: FAIL "
              f"({time.perf_counter() - t0:.1f}s)")
        raise
    print(f"ACCEPTANCE {num:>2} {name}: PASS ({time.perf_counter() - t0:.1f}s)")


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    mx = build_mdp(load_benchmark("coin"))
    check(mx, 'T=? [ F "done" ]')
    check(mx, 'P=? [ F<=2 "done" ]')
    lake = build_mdp(load_benchmark("frozen_lake"))
    check(lake, 'Pmax=? [ F "frisbee" ]')
    check(lake, 'Tmin=? [ F "finished" ]')


TRAIN7_ARGS = ["train", "--env", "frozen_lake", "--agent", "qlearning",
               "--episodes", "100000", "--seed", "128"]


@pytest.fixture(scope="module")
def train7(tmp_path_factory):
    """Criterion 7 training run, reused by criterion 10."""
    runs = str(tmp_path_factory.mktemp("runs7"))
    t0 = time.perf_counter()
    assert cli_main(TRAIN7_ARGS + ["--runs-dir", runs]) == 0
    train_seconds = time.perf_counter() - t0
    store = RunStore(runs)
    (manifest,) = store.list_runs()
    run_id = manifest["run_id"]
    assert cli_main(["verify", "--env", "frozen_lake", "--run", run_id,
                     "--prop", 'P=? [ F "frisbee" ]', "--runs-dir", runs]) == 0
    verify = [m for m in store.list_runs() if m["command"] == "verify"][0]
    value = float(verify["metrics"]["value"])
    policy_bytes = open(os.path.join(runs, run_id, "artifacts", "policy.json"), "rb").read()
    return {
        "runs": runs, "run_id": run_id, "train_seconds": train_seconds,
        "value": value, "metrics": manifest["metrics"], "policy_bytes": policy_bytes,
    }


def test_criterion_1_exact_chain_oracles():
    with criterion(1, "exact-chain oracle suite"):
        t0 = time.perf_counter()
        mx = build_mdp(load_benchmark("coin"))
        assert abs(check(mx, 'P=? [ F "done" ]').value - 1.0) <= 1e-9
        assert abs(check(mx, 'P=? [ F<=1 "done" ]').value - 0.5) <= 1e-9
        assert abs(check(mx, 'P=? [ F<=2 "done" ]').value - 0.75) <= 1e-9
        assert abs(check(mx, 'T=? [ F "done" ]').value - 2.0) <= 1e-9
        assert time.perf_counter() - t0 < 1.0


def _oracle_agreement(model):
    mx = build_mdp(model)
    states, transitions, deadlocks = oracle_bfs(model)
    assert mx.states == states
    got = {}
    for s in range(mx.n_states):
        for name, dist in mx.enabled(s):
            if name.startswith("τ#deadlock"):
                assert mx.states[s] in deadlocks
                continue
            got[(mx.states[s], name)] = {mx.states[j]: p for j, p in dist}
    assert got == transitions  # supports and probabilities, exactly
    for label in model.labels:
        assert {mx.states[i] for i in np.flatnonzero(mx.labels[label])} == \
            naive_label_states(model, label, states)
    return mx


def test_criterion_2_builder_vs_simulator_oracle():
    with criterion(2, "builder/simulator agreement"):
        t0 = time.perf_counter()
        _oracle_agreement(load_benchmark("frozen_lake"))
        _oracle_agreement(load_benchmark(
            "collision_avoidance", {"xMax": 3, "yMax": 3, "slickness": 0.1}))
        assert time.perf_counter() - t0 < 10.0


def test_criterion_3_vi_matches_policy_iteration():
    with criterion(3, "value iteration vs policy-iteration oracle"):
        t0 = time.perf_counter()
        mx = build_mdp(load_benchmark("frozen_lake"))
        oracle, _ = policy_iteration_reachability(
            mx, mx.labels["frisbee"], maximize=True)
        got = check(mx, 'Pmax=? [ F "frisbee" ]')
        assert abs(got.value - oracle[0]) < 1e-6
        assert np.max(np.abs(got.per_state - oracle)) < 1e-6
        assert time.perf_counter() - t0 < 5.0


def test_criterion_4_policy_sandwich():
    with criterion(4, "random-policy sandwich"):
        t0 = time.perf_counter()
        model = load_benchmark("frozen_lake")
        mx = build_mdp(model)
        cm = compiled(model)
        pmin = check(mx, 'Pmin=? [ F "frisbee" ]').value
        pmax = check(mx, 'Pmax=? [ F "frisbee" ]').value
        rng = np.random.default_rng(2024)
        for _ in range(50):
            mapping = {}
            for s in range(mx.n_states):
                v = mx.states[s]
                enabled = cm.enabled_actions(v)
                if enabled:
                    mapping[v] = enabled[int(rng.integers(0, len(enabled)))]
            pol = TabularPolicy(mapping, alphabet=cm.actions[:4],
                                var_names=cm.var_names)
            val = check_policy(model, pol, 'P=? [ F "frisbee" ]').value
            assert pmin - 1e-9 <= val <= pmax + 1e-9
        assert time.perf_counter() - t0 < 30.0


def test_criterion_5_permissive_bracketing(taxi_model, taxi_policy):
    with criterion(5, "permissive bracketing and monotonicity"):
        t0 = time.perf_counter()
        base = FallbackPolicy(taxi_policy, taxi_model)
        chain = check(build_induced_dtmc(taxi_model, base).model,
                      'P=? [ F "empty" ]').value
        intervals = []
        for start in range(10, 3, -1):
            tau = permissive(base, tail_lumping_partition(taxi_model, "fuel", start),
                             taxi_model)
            sub = build_induced_mdp(taxi_model, tau).model
            lo = check(sub, 'Pmin=? [ F "empty" ]').value
            hi = check(sub, 'Pmax=? [ F "empty" ]').value
            assert lo - 1e-9 <= chain <= hi + 1e-9
            intervals.append((start, lo, hi))
        for (s_prev, lo_prev, hi_prev), (s_cur, lo_cur, hi_cur) in zip(
                intervals, intervals[1:]):
            # coarser lumping (smaller start) never shrinks the interval
            assert lo_cur <= lo_prev + 1e-9
            assert hi_cur >= hi_prev - 1e-9
        assert time.perf_counter() - t0 < 120.0


def test_criterion_6_remap_identity_and_composition(
        coin_model, lake_model, lake_policy, taxi_model, taxi_policy):
    with criterion(6, "remap identity and clamp composition"):
        collision = load_benchmark("collision_avoidance",
                                   {"xMax": 3, "yMax": 3, "slickness": 0.1})
        cm_coll = compiled(collision)
        north = TabularPolicy({}, alphabet=cm_coll.actions[:4],
                              var_names=cm_coll.var_names)  # constant policy
        cases = [
            (coin_model, TabularPolicy(
                {(0,): "flip", (1,): "done"},
                alphabet=("done", "flip"), var_names=("s",)), "s", 'P=? [ F "done" ]'),
            (lake_model, FallbackPolicy(lake_policy, lake_model), "pos",
             'P=? [ F "frisbee" ]'),
            (taxi_model, FallbackPolicy(taxi_policy, taxi_model), "fuel",
             'P=? [ F "empty" ]'),
            (collision, FallbackPolicy(north, collision), "ax",
             'P=? [ F "collide" ]'),
        ]
        for model, pol, var, prop in cases:
            decl = model.variable(var)
            ident = remap(
                pol,
                clamp_remap(model, var, decl.high),
                model,
            )
            base_val = check(build_induced_dtmc(model, pol).model, prop).value
            ident_val = check(build_induced_dtmc(model, ident).model, prop).value
            assert abs(base_val - ident_val) <= 1e-12

        taxi_mx = build_mdp(taxi_model)
        base = FallbackPolicy(taxi_policy, taxi_model)
        once = remap(base, clamp_remap(taxi_model, "fuel", 4), taxi_model)
        twice = remap(remap(base, clamp_remap(taxi_model, "fuel", 6), taxi_model),
                      clamp_remap(taxi_model, "fuel", 4), taxi_model)
        for v in taxi_mx.states:
            assert once.act(v) == twice.act(v)


def test_criterion_7_training_reproduction(train7):
    with criterion(7, "tabular training reaches the frisbee"):
        assert train7["train_seconds"] < 300.0
        assert train7["value"] >= 0.7


def test_criterion_8_deepq_smoke_and_gradients():
    with criterion(8, "deep-Q pipeline smoke and gradient check"):
        t0 = time.perf_counter()
        lake = load_benchmark("frozen_lake")
        cfg = DeepQConfig(episodes=5000, seed=128, hidden=(32, 32))
        policy, metrics, _ = deep_q_train(lake, cfg, "finished", "goal")
        induced = build_induced_dtmc(lake, policy, invalid_action="fallback_first")
        value = check(induced.model, 'P=? [ F "frisbee" ]').value
        assert 0.0 <= value <= 1.0
        assert mlp_backprop_check(policy) < 1e-4
        assert time.perf_counter() - t0 < 180.0


def test_criterion_9_collision_scale_guard():
    with criterion(9, "collision-avoidance 6x6 scale guard"):
        t0 = time.perf_counter()
        model = load_benchmark("collision_avoidance",
                               {"xMax": 5, "yMax": 5, "slickness": 0.1})
        mx = build_mdp(model)
        result = check(mx, 'Tmax=? [ F "collide" ]')
        assert result.value > 0 and math.isfinite(result.value)
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0
        peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
        assert peak_mb < 2048


def test_criterion_10_determinism(tmp_path, train7):
    with criterion(10, "byte-identical reruns"):
        # criterion 2 models: identical exports across two builds
        for name, consts in (("frozen_lake", None),
                             ("collision_avoidance",
                              {"xMax": 3, "yMax": 3, "slickness": 0.1})):
            a = build_mdp(load_benchmark(name, consts))
            b = build_mdp(load_benchmark(name, consts))
            pa, pb = tmp_path / "a.bin", tmp_path / "b.bin"
            export_model(a, pa)
            export_model(b, pb)
            assert pa.read_bytes() == pb.read_bytes()
        # criterion 3 check: identical value bits and iteration counts
        mx = build_mdp(load_benchmark("frozen_lake"))
        r1 = check(mx, 'Pmax=? [ F "frisbee" ]')
        r2 = check(mx, 'Pmax=? [ F "frisbee" ]')
        assert r1.value == r2.value and r1.iterations == r2.iterations
        assert np.array_equal(r1.per_state, r2.per_state)
        # criterion 7 rerun: identical manifest metrics and policy artifact
        runs_b = str(tmp_path / "runsB")
        assert cli_main(TRAIN7_ARGS + ["--runs-dir", runs_b]) == 0
        store = RunStore(runs_b)
        (manifest,) = store.list_runs()
        assert manifest["run_id"] == train7["run_id"]
        assert dump_json17(manifest["metrics"]) == dump_json17(train7["metrics"])
        policy_b = open(os.path.join(runs_b, manifest["run_id"], "artifacts",
                                     "policy.json"), "rb").read()
        assert policy_b == train7["policy_bytes"]
