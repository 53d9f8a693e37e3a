"""Command-line front end: train, verify, sweep, and inspect runs.

Exit codes: 0 ok, 2 usage/parse error, 3 training error, 4 I/O error,
5 exploration limit exceeded, 6 disabled policy action. Every failure prints
one line ``error[<kind>]: message`` to stderr.
"""

import argparse
import json
import sys
import time

from .benchmarks import REGISTRY, benchmark_names, load_benchmark
from .checker import check, check_policy, extract_policy, format_value, parse_property
from .engine import compiled
from .errors import (
    CheckError, DisabledActionError, LimitExceeded, ModelError,
    PolicyFormatError, PrismError, PropertyError, TrackerError, TrainingError,
)
from .explicit import BuildLimits, build_mdp, export_model
from .induced import build_induced_dtmc, build_induced_mdp, export_induced
from .policies import FallbackPolicy, load_policy, save_policy
from .prism import parse_model
from .simulate import Simulator, stream_rng
from .tracker import RunStore, dump_json17
from .training import DeepQConfig, QLearnConfig, deep_q_train, q_learning_train
from .transforms import clamp_remap, load_transform_spec, permissive, remap, tail_lumping_partition


class CliError(Exception):
    def __init__(self, kind, code, message):
        self.kind = kind
        self.code = code
        super().__init__(message)


def _fail(kind, code, message):
    raise CliError(kind, code, message)


def parse_const_overrides(text):
    """'name=value,name=value' with int/float/bool literals."""
    out = {}
    if not text:
        return out
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            _fail("usage", 2, f"constant override {part!r} is not name=value")
        name, raw = part.split("=", 1)
        out[name.strip()] = _parse_literal(raw.strip())
    return out


def _parse_literal(raw):
    low = raw.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        _fail("usage", 2, f"cannot parse literal {raw!r}")


def _load_model(args):
    consts = parse_const_overrides(getattr(args, "const", None))
    if getattr(args, "env", None):
        if args.env not in REGISTRY:
            _fail("usage", 2,
                  f"unknown benchmark {args.env!r}; available: {', '.join(benchmark_names())}")
        merged = dict(REGISTRY[args.env].default_constants)
        merged.update(consts)
        return load_benchmark(args.env, merged), args.env, merged
    if getattr(args, "model", None):
        try:
            with open(args.model, "r", encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            _fail("io", 4, f"cannot read model file: {exc}")
        return parse_model(source, consts), args.model, consts
    _fail("usage", 2, "one of --env or --model is required")


def _limits(args):
    return BuildLimits(
        max_states=getattr(args, "max_states", None) or 5_000_000,
        max_transitions=getattr(args, "max_transitions", None) or 500_000_000,
    )


def _parse_transform_flag(text, expect):
    # fuel:tail=8 / fuel:clamp=6
    if ":" not in text or "=" not in text:
        _fail("usage", 2, f"transform spec {text!r} is not var:{expect}=N")
    var, rest = text.split(":", 1)
    kind, raw = rest.split("=", 1)
    if kind != expect:
        _fail("usage", 2, f"expected var:{expect}=N, got {text!r}")
    try:
        return var.strip(), int(raw)
    except ValueError:
        _fail("usage", 2, f"{raw!r} is not an integer in {text!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_info(args):
    model, name, consts = _load_model(args)
    cm = compiled(model)
    print(f"model: {name} ({model.kind})")
    if model.constants:
        pairs = ", ".join(f"{k}={v}" for k, v in sorted(model.constants.items()))
        print(f"constants: {pairs}")
    print(f"variables ({len(model.variables)}):")
    for v in model.variables:
        owner = v.module or "global"
        rng = "bool" if v.kind == "bool" else f"[{v.low}..{v.high}]"
        print(f"  {v.name} : {rng} init {v.init}  ({owner})")
    user = [a for a in model.action_alphabet if not a.startswith("τ#")]
    silent = [a for a in model.action_alphabet if a.startswith("τ#")]
    print(f"actions ({len(user)} user, {len(silent)} silent): {', '.join(user)}")
    if model.labels:
        print("labels: " + ", ".join(sorted(model.labels)))
    if model.rewards:
        print("reward structures: " + ", ".join(sorted(model.rewards)))
    if args.env and args.env in REGISTRY:
        props = _canonical_props(args.env)
        if props:
            print("canonical properties:")
            for p in props:
                print(f"  {p}")
    return 0


def _canonical_props(env):
    from .benchmarks import canonical_properties

    try:
        return canonical_properties(env)
    except Exception:
        return []


def cmd_build(args):
    model, name, consts = _load_model(args)
    t0 = time.perf_counter()
    mx = build_mdp(model, _limits(args))
    dt = time.perf_counter() - t0
    print(f"{name}: {mx.n_states} states, {mx.n_choices} choices, "
          f"{mx.n_transitions} transitions ({dt:.2f}s)")
    for label, mask in sorted(mx.labels.items()):
        print(f'  label "{label}": {int(mask.sum())} states')
    if args.export:
        export_model(mx, args.export)
        print(f"exported to {args.export}")
    return 0


def cmd_simulate(args):
    model, name, _ = _load_model(args)
    entry = REGISTRY.get(args.env) if args.env else None
    reward = args.reward or (entry.default_reward if entry else None)
    target = args.target_label or (entry.default_target if entry else None)
    sim = Simulator(model, reward_structure=reward, target_label=target,
                    invalid_action="selfloop", rng=stream_rng(args.seed, "env"))
    policy = load_policy(args.policy, model) if args.policy else None
    rng = stream_rng(args.seed, "agent")
    v = sim.reset()
    print(f"step 0: state={sim.cm.state_dict(v)}")
    total = 0.0
    for t in range(1, args.steps + 1):
        if sim.is_terminal(v):
            print(f"terminal after {t - 1} steps, return {total:g}")
            break
        if policy is not None:
            a = policy.act(v)
            enabled = sim.enabled_actions(v)
            if a not in enabled and enabled:
                a = enabled[0]
        else:
            enabled = sim.enabled_actions(v)
            a = enabled[int(rng.integers(0, len(enabled)))]
        step = sim.step(a)
        total += step.reward
        print(f"step {t}: action={a} reward={step.reward:g} "
              f"state={sim.cm.state_dict(step.state)}")
        v = step.state
    else:
        print(f"stopped after {args.steps} steps, return {total:g}")
    return 0


def cmd_train(args):
    model, name, consts = _load_model(args)
    entry = REGISTRY.get(args.env) if args.env else None
    reward = args.reward or (entry.default_reward if entry else None)
    target = args.target_label or (entry.default_target if entry else None)
    if reward is None and model.rewards:
        reward = next(iter(model.rewards))
    common = dict(
        episodes=args.episodes, max_steps_per_episode=args.max_steps,
        alpha=args.alpha, gamma=args.gamma, eps_start=args.epsilon_start,
        eps_decay=args.epsilon_decay, eps_min=args.epsilon_min, seed=args.seed,
    )
    try:
        if args.agent == "qlearning":
            cfg = QLearnConfig(**common)
            trainer = q_learning_train
        elif args.agent == "deepq":
            hidden = tuple(int(h) for h in args.hidden.split(",") if h)
            cfg = DeepQConfig(**common, hidden=hidden, lr=args.lr,
                              batch_size=args.batch_size,
                              replay_capacity=args.replay_capacity,
                              target_sync_interval=args.target_sync)
            trainer = deep_q_train
        else:
            _fail("usage", 2, f"unknown agent {args.agent!r} (qlearning or deepq)")
    except ValueError as exc:
        _fail("usage", 2, f"bad training configuration: {exc}")

    config = {
        "model": name, "constants": consts, "agent": args.agent,
        "seed": args.seed, "episodes": args.episodes,
        "reward_structure": reward, "target_label": target,
        "hyper": {k: v for k, v in common.items() if k not in ("episodes", "seed")},
    }
    if args.agent == "deepq":
        config["hyper"].update(hidden=list(cfg.hidden), lr=cfg.lr,
                               batch_size=cfg.batch_size,
                               replay_capacity=cfg.replay_capacity,
                               target_sync_interval=cfg.target_sync_interval)
    store = RunStore(args.runs_dir)
    manifest = store.begin("train", config)
    t0 = time.perf_counter()
    policy, metrics, trace = trainer(model, cfg, target, reward)
    manifest.timings["train_seconds"] = time.perf_counter() - t0
    manifest.metrics = metrics
    save_policy(policy, store.artifact_path(manifest, "policy.json"))
    with open(store.artifact_path(manifest, "trace.csv"), "w", encoding="utf-8") as fh:
        fh.write("episode,reward\n")
        for i, r in enumerate(trace):
            fh.write(f"{i},{r!r}\n")
    path = store.commit(manifest)
    print(f"run {manifest.run_id}: trained {args.agent} on {name} "
          f"({args.episodes} episodes, seed {args.seed})")
    print(f"  mean reward {metrics['mean_reward']:.4g}, "
          f"last-100 mean {metrics['last100_mean_reward']:.4g}")
    print(f"  manifest: {path}")
    return 0


def _resolve_policy(args, model, store):
    parent = None
    policy = None
    if getattr(args, "run", None):
        run = store.load(args.run)
        rel = run.get("artifacts", {}).get("policy.json")
        if rel is None:
            _fail("usage", 2, f"run {args.run} has no policy artifact")
        import os

        policy = load_policy(os.path.join(store._dir(args.run), rel), model)
        parent = args.run
    elif getattr(args, "policy", None):
        policy = load_policy(args.policy, model)
    return policy, parent


def cmd_verify(args):
    model, name, consts = _load_model(args)
    store = RunStore(args.runs_dir)
    policy, parent = _resolve_policy(args, model, store)
    prop = parse_property(args.prop)

    base_policy = policy
    if policy is not None and args.invalid_action == "fallback":
        # resolve fallbacks once at the policy layer so that a permissive
        # policy derived from the same base stays a superset of the chain
        base_policy = FallbackPolicy(policy, model)

    spec_desc = {}
    if args.remap_file or args.remap:
        # the remap applies first, so --permissive abstracts the remapped policy
        if args.remap_file:
            rspec = load_transform_spec(args.remap_file, model)
            spec_desc["remap_file"] = args.remap_file
        else:
            var, cap = _parse_transform_flag(args.remap, "clamp")
            rspec = clamp_remap(model, var, cap)
            spec_desc["remap"] = args.remap
        if base_policy is None:
            _fail("usage", 2, "--remap needs a policy (--run or --policy)")
        base_policy = remap(base_policy, rspec, model)
    tau = None
    if args.permissive_file or args.permissive:
        if base_policy is None:
            _fail("usage", 2, "--permissive needs a policy (--run or --policy)")
        if args.permissive_file:
            spec = load_transform_spec(args.permissive_file, model)
            spec_desc["permissive_file"] = args.permissive_file
        else:
            var, start = _parse_transform_flag(args.permissive, "tail")
            spec = tail_lumping_partition(model, var, start)
            spec_desc["permissive"] = args.permissive
        tau = permissive(base_policy, spec, model)
    spec_desc = spec_desc or None

    config = {
        "model": name, "constants": consts, "property": prop.text,
        "policy_run": parent, "policy_file": getattr(args, "policy", None),
        "invalid_action": args.invalid_action, "transform": spec_desc,
    }
    manifest = RunStore(args.runs_dir).begin("verify", config, parent_run_id=parent)

    limits = _limits(args)
    t0 = time.perf_counter()
    if tau is not None:
        induced = build_induced_mdp(model, tau, limits=limits,
                                    empty_intersection=args.empty_intersection)
        target_model = induced.model
        fallback_count = induced.fallback_count
    elif base_policy is not None:
        if prop.wants_optimum:
            _fail("usage", 2,
                  f"{prop.text!r} asks for an optimum; drop min/max when "
                  f"verifying a deterministic policy")
        invalid = "error" if args.invalid_action == "error" else "fallback_first"
        # fallback already resolved at the policy layer above
        invalid = "error" if args.invalid_action == "fallback" else invalid
        induced = build_induced_dtmc(model, base_policy, limits=limits,
                                     invalid_action=invalid)
        target_model = induced.model
        fallback_count = induced.fallback_count
        if isinstance(base_policy, FallbackPolicy):
            fallback_count = base_policy.fallbacks
    else:
        induced = None
        target_model = build_mdp(model, limits)
        fallback_count = 0
    build_time = time.perf_counter() - t0

    result = check(target_model, prop)
    result.build_time = build_time
    result.fallback_count = fallback_count

    if args.export:
        if induced is not None:
            export_induced(induced, args.export)
        else:
            export_model(target_model, args.export)
    if args.extract_policy:
        if not prop.wants_optimum:
            _fail("usage", 2, "--extract-policy needs a Pmin/Pmax/Tmin/Tmax/"
                              "Rmin/Rmax property")
        save_policy(extract_policy(target_model, prop), args.extract_policy)

    manifest.metrics = result.metrics()
    manifest.timings = {"build_seconds": result.build_time,
                        "check_seconds": result.check_time}
    path = store.commit(manifest)
    print(f"{prop.text} = {format_value(result.value)}")
    print(f"  model: {result.states} states, {result.transitions} transitions"
          + (f", {fallback_count} fallbacks" if fallback_count else ""))
    print(f"  build {result.build_time:.2f}s, check {result.check_time:.2f}s "
          f"({result.iterations} iterations, residual {result.residual:.1e})")
    print(f"  run {manifest.run_id}  manifest: {path}")
    if args.json:
        print(dump_json17(manifest.to_dict()))
    return 0


def _parse_axis(text):
    # const:NAME=a..b | remap:var=a..b | tail:var=a..b
    try:
        kind, rest = text.split(":", 1)
        name, span = rest.split("=", 1)
        lo, hi = span.split("..", 1)
        lo, hi = int(lo), int(hi)
    except ValueError:
        _fail("usage", 2, f"axis {text!r} is not kind:name=lo..hi")
    if kind not in ("const", "remap", "tail"):
        _fail("usage", 2, f"axis kind must be const/remap/tail, got {kind!r}")
    if hi < lo:
        _fail("usage", 2, f"empty axis range in {text!r}")
    return kind, name.strip(), list(range(lo, hi + 1))


def cmd_sweep(args):
    kind, name, values = _parse_axis(args.axis)
    props = [parse_property(p) for p in args.prop]
    if not props:
        _fail("usage", 2, "at least one --prop is required")
    model, model_name, consts = _load_model(args)
    store = RunStore(args.runs_dir)
    policy, parent = _resolve_policy(args, model, store)
    if kind in ("remap", "tail") and policy is None:
        _fail("usage", 2, f"a {kind} axis needs --run or --policy")

    config = {
        "model": model_name, "constants": consts, "axis": args.axis,
        "properties": [p.text for p in props], "policy_run": parent,
        "policy_file": getattr(args, "policy", None),
    }
    manifest = store.begin("sweep", config, parent_run_id=parent)
    limits = _limits(args)
    rows = []
    for value in values:
        cell_models = {}
        for prop in props:
            note = ""
            out = float("nan")
            try:
                out = _sweep_cell(kind, name, value, model, model_name, consts,
                                  policy, prop, limits, cell_models)
            except (PrismError, ModelError, CheckError, PropertyError,
                    DisabledActionError) as exc:
                note = f"{type(exc).__name__}: {exc}"
            rows.append((value, prop.text, out, note))
    csv_path = store.artifact_path(manifest, "sweep.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("axis,property,value,note\n")
        for value, prop_text, out, note in rows:
            quoted = prop_text.replace('"', '""')
            note_q = note.replace('"', '""')
            fh.write(f'{value},"{quoted}",{format_value(out, machine=True)},"{note_q}"\n')
    manifest.metrics = {
        "cells": len(rows),
        "values": {f"{v}|{p}": format_value(out, machine=True)
                   for v, p, out, _ in rows},
    }
    path = store.commit(manifest)
    for value, prop_text, out, note in rows:
        suffix = f"  ({note})" if note else ""
        print(f"{name}={value}  {prop_text} = {format_value(out)}{suffix}")
    print(f"run {manifest.run_id}  csv: {csv_path}  manifest: {path}")
    return 0


def _sweep_cell(kind, name, value, model, model_name, consts, policy, prop,
                limits, cell_models):
    if kind == "const":
        key = ("const", value)
        if key not in cell_models:
            merged = dict(consts)
            merged[name] = value
            if model_name in REGISTRY:
                cell_models[key] = load_benchmark(model_name, merged)
            else:
                with open(model_name, "r", encoding="utf-8") as fh:
                    cell_models[key] = parse_model(fh.read(), merged)
        cell_model = cell_models[key]
        if policy is None:
            mx = build_mdp(cell_model, limits)
            return check(mx, prop).value
        return check_policy(cell_model, policy, prop, limits=limits,
                            invalid_action="fallback_first").value
    if kind == "remap":
        spec = clamp_remap(model, name, value)
        mapped = remap(FallbackPolicy(policy, model), spec, model)
        return check_policy(model, mapped, prop, limits=limits,
                            invalid_action="fallback_first").value
    # tail: permissive bounds need a min/max property
    spec = tail_lumping_partition(model, name, value)
    tau = permissive(FallbackPolicy(policy, model), spec, model)
    return check_policy(model, None, prop, limits=limits, permissive=tau).value


def cmd_runs(args):
    store = RunStore(args.runs_dir)
    if args.action == "list":
        runs = store.list_runs()
        if not runs:
            print(f"no runs under {store.root}/")
            return 0
        for m in runs:
            parent = f" parent={m['parent_run_id']}" if m.get("parent_run_id") else ""
            extra = ""
            if m["command"] == "train":
                extra = f" agent={m['config'].get('agent')} model={m['config'].get('model')}"
            elif m["command"] in ("verify", "sweep"):
                extra = f" model={m['config'].get('model')}"
                if "property" in m["config"]:
                    extra += f" prop={m['config']['property']!r}"
            print(f"{m['run_id']}  {m['created_at']}  {m['command']}{extra}{parent}")
        return 0
    manifest = store.load(args.run_id)
    if args.json:
        print(dump_json17(manifest))
    else:
        for key in ("run_id", "parent_run_id", "command", "created_at"):
            print(f"{key}: {manifest.get(key)}")
        print("config: " + dump_json17(manifest.get("config", {})))
        print("metrics: " + dump_json17(manifest.get("metrics", {})))
        print("artifacts: " + dump_json17(manifest.get("artifacts", {})))
    return 0


# ---------------------------------------------------------------------------


def _add_model_args(p):
    p.add_argument("--env", help="benchmark name (" + ", ".join(benchmark_names()) + ")")
    p.add_argument("--model", help="path to a .prism file")
    p.add_argument("--const", help="constant overrides name=value,name=value")
    p.add_argument("--max-states", type=int, help="exploration state limit")
    p.add_argument("--max-transitions", type=int, help="exploration transition limit")
    p.add_argument("--runs-dir", default="runs", help="run tracker directory")
    p.add_argument("--config", help="JSON file of flag defaults (flags win)")


def build_arg_parser():
    ap = argparse.ArgumentParser(
        prog="policymc",
        description="Train RL policies on PRISM-subset MDPs and model-check "
                    "the induced Markov chains.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("info", help="show model statistics")
    _add_model_args(p)
    p.set_defaults(fn=cmd_info)

    p = sub.add_parser("build", help="build the explicit MDP")
    _add_model_args(p)
    p.add_argument("--export", help="write the explicit model to this path")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("simulate", help="run one episode and print it")
    _add_model_args(p)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", help="policy file (random walk otherwise)")
    p.add_argument("--reward", help="reward structure (benchmark default otherwise)")
    p.add_argument("--target-label", help="terminal label (benchmark default otherwise)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("train", help="train a policy against the simulator")
    _add_model_args(p)
    p.add_argument("--agent", required=True, help="qlearning or deepq")
    p.add_argument("--episodes", type=int, default=10000)
    p.add_argument("--seed", type=int, default=128)
    p.add_argument("--max-steps", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--epsilon-start", type=float, default=1.0)
    p.add_argument("--epsilon-decay", type=float, default=0.99999)
    p.add_argument("--epsilon-min", type=float, default=0.1)
    p.add_argument("--hidden", default="32,32", help="deepq hidden sizes, comma-separated")
    p.add_argument("--lr", type=float, default=1e-3, help="deepq SGD step size")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--replay-capacity", type=int, default=10000)
    p.add_argument("--target-sync", type=int, default=100,
                   help="target-network copy interval in learning steps")
    p.add_argument("--reward", help="reward structure (benchmark default otherwise)")
    p.add_argument("--target-label", help="terminal label (benchmark default otherwise)")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("verify", help="model-check a policy or the full MDP")
    _add_model_args(p)
    p.add_argument("--prop", required=True, help="property string")
    p.add_argument("--run", help="training run id providing the policy")
    p.add_argument("--policy", help="policy file")
    p.add_argument("--permissive", help="var:tail=N lumping partition")
    p.add_argument("--permissive-file", help="JSON transform spec file")
    p.add_argument("--remap", help="var:clamp=N value remap")
    p.add_argument("--remap-file", help="JSON transform spec file")
    p.add_argument("--invalid-action", choices=("error", "fallback"),
                   default="error", help="disabled policy action handling")
    p.add_argument("--empty-intersection", choices=("full_act", "error"),
                   default="full_act", help="permissive empty-intersection rule")
    p.add_argument("--export", help="export the checked model to this path")
    p.add_argument("--extract-policy", help="save the optimizing policy here")
    p.add_argument("--json", action="store_true", help="print the manifest as JSON")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sweep", help="verify over a parameter grid, write CSV")
    _add_model_args(p)
    p.add_argument("--axis", required=True, help="const:NAME=a..b | remap:var=a..b | tail:var=a..b")
    p.add_argument("--prop", action="append", default=[], help="property (repeatable)")
    p.add_argument("--run", help="training run id providing the policy")
    p.add_argument("--policy", help="policy file")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("runs", help="list runs or show one manifest")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("run_id", nargs="?", help="run id (for show)")
    p.add_argument("--json", action="store_true")
    p.add_argument("--runs-dir", default="runs")
    p.set_defaults(fn=cmd_runs)
    return ap


_ERROR_MAP = [
    (CliError, None, None),
    (LimitExceeded, "limit", 5),
    (DisabledActionError, "disabled-action", 6),
    (TrainingError, "training", 3),
    (PropertyError, "parse", 2),
    (PrismError, "parse", 2),
    (PolicyFormatError, "parse", 2),
    (CheckError, "check", 2),
    (ModelError, "model", 2),
    (TrackerError, "usage", 2),
    (OSError, "io", 4),
]


def _apply_config_file(argv):
    """Expand ``--config FILE`` into flags placed before the user's flags.

    Config keys are long flag names without the dashes ("episodes": 100);
    list values repeat the flag. Explicit command-line flags win.
    """
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        raise CliError("usage", 2, "--config needs a file path")
    path = argv[at + 1]
    rest = argv[:at] + argv[at + 2:]
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError("io", 4, f"cannot read config file {path}: {exc}")
    if not isinstance(config, dict):
        raise CliError("parse", 2, f"config file {path} must hold a JSON object")
    synth = []
    for key, value in config.items():
        flag = "--" + str(key).replace("_", "-")
        if flag in rest:
            continue  # flags win
        if isinstance(value, bool):
            if value:
                synth.append(flag)
        elif isinstance(value, list):
            for item in value:
                synth.extend([flag, str(item)])
        else:
            synth.extend([flag, str(value)])
    if not rest:
        return synth
    # insert right after the subcommand token
    return rest[:1] + synth + rest[1:]


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        argv = _apply_config_file(list(argv))
    except CliError as exc:
        print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
        return exc.code
    ap = build_arg_parser()
    args = ap.parse_args(argv)
    if args.cmd == "runs" and args.action == "show" and not args.run_id:
        print("error[usage]: runs show needs a run id", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # noqa: BLE001 - mapped to documented exit codes
        for cls, kind, code in _ERROR_MAP[1:]:
            if isinstance(exc, cls):
                print(f"error[{kind}]: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
