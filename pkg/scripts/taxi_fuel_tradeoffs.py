#!/usr/bin/env python3
"""Fuel-capacity trade-offs for a trained taxi policy.

Produces the three curve families as CSV: the policy on smaller physical
tanks (MAX_FUEL sweep), the policy behind an abstracted fuel sensor
(clamp-remap sweep on the original tank), and a fixed abstraction evaluated
at different physical capacities.
"""

import argparse
import csv

from policymc.benchmarks import load_benchmark
from policymc.checker import check_policy
from policymc.policies import FallbackPolicy
from policymc.training import QLearnConfig, q_learning_train
from policymc.transforms import clamp_remap, remap


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=128)
    ap.add_argument("--lo", type=int, default=4)
    ap.add_argument("--hi", type=int, default=10)
    ap.add_argument("--abstract-cap", type=int, default=6,
                    help="fixed remap cap for the third curve family")
    ap.add_argument("--out", default="taxi_fuel_tradeoffs.csv")
    args = ap.parse_args()

    base_model = load_benchmark("taxi")
    cfg = QLearnConfig(episodes=args.episodes, seed=args.seed,
                       max_steps_per_episode=60)
    policy, metrics, _ = q_learning_train(base_model, cfg, "finished", "penalty_step")
    print(f"trained {args.episodes} episodes, "
          f"last-100 mean reward {metrics['last100_mean_reward']:.1f}")

    props = ['P=? [ F "empty" ]', 'P=? [ F "finished" ]']
    rows = []
    for cap in range(args.lo, args.hi + 1):
        small = load_benchmark("taxi", {"MAX_FUEL": cap, "MAX_JOBS": 2})
        for prop in props:
            val = check_policy(small, policy, prop,
                               invalid_action="fallback_first").value
            rows.append(("physical_max_fuel", cap, prop, val))
    for cap in range(args.lo, args.hi + 1):
        mapped = remap(FallbackPolicy(policy, base_model),
                       clamp_remap(base_model, "fuel", cap), base_model)
        for prop in props:
            val = check_policy(base_model, mapped, prop).value
            rows.append(("abstracted_fuel_level", cap, prop, val))
    for cap in range(args.lo, args.hi + 1):
        small = load_benchmark("taxi", {"MAX_FUEL": cap, "MAX_JOBS": 2})
        eff = min(args.abstract_cap, cap)
        mapped = remap(policy, clamp_remap(small, "fuel", eff), small)
        for prop in props:
            val = check_policy(small, mapped, prop,
                               invalid_action="fallback_first").value
            rows.append((f"clamp{args.abstract_cap}_at_capacity", cap, prop, val))

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "cap", "property", "value"])
        w.writerows(rows)
    for family, cap, prop, val in rows:
        print(f"{family:>26}  cap={cap:>2}  {prop}  ->  {val:.4f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
