#!/usr/bin/env python3
"""Worst/best-case bounds for permissive taxi policies that lump the upper
fuel levels together: starting range 8 means fuel levels 8, 9, and 10 look
alike to the policy."""

import argparse
import csv

from policymc.benchmarks import load_benchmark
from policymc.checker import check
from policymc.induced import build_induced_dtmc, build_induced_mdp
from policymc.policies import FallbackPolicy
from policymc.training import QLearnConfig, q_learning_train
from policymc.transforms import permissive, tail_lumping_partition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=128)
    ap.add_argument("--lo", type=int, default=4, help="smallest starting range")
    ap.add_argument("--out", default="permissive_fuel_bounds.csv")
    args = ap.parse_args()

    model = load_benchmark("taxi")
    cfg = QLearnConfig(episodes=args.episodes, seed=args.seed,
                       max_steps_per_episode=60)
    trained, _, _ = q_learning_train(model, cfg, "finished", "penalty_step")
    base = FallbackPolicy(trained, model)

    chain = check(build_induced_dtmc(model, base).model, 'P=? [ F "empty" ]')
    print(f'deterministic policy: P(eventually empty) = {chain.value:.4f}')

    rows = []
    for start in range(10, args.lo - 1, -1):
        tau = permissive(base, tail_lumping_partition(model, "fuel", start), model)
        sub = build_induced_mdp(model, tau).model
        lo = check(sub, 'Pmin=? [ F "empty" ]').value
        hi = check(sub, 'Pmax=? [ F "empty" ]').value
        rows.append((start, lo, hi))
        print(f"starting range {start:>2}: [{lo:.4f}, {hi:.4f}]  "
              f"({sub.n_states} states, {sub.n_transitions} transitions)")

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tail_start", "pmin_empty", "pmax_empty"])
        w.writerows(rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
