#!/usr/bin/env python3
"""Train a tabular policy on the frozen lake and print, per grid cell, the
probability of still reaching the frisbee from there under that policy."""

import argparse

from policymc.benchmarks import load_benchmark
from policymc.checker import check
from policymc.induced import build_induced_dtmc
from policymc.policies import FallbackPolicy
from policymc.training import QLearnConfig, q_learning_train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=128)
    args = ap.parse_args()

    model = load_benchmark("frozen_lake")
    cfg = QLearnConfig(episodes=args.episodes, seed=args.seed)
    policy, metrics, _ = q_learning_train(model, cfg, "finished", "goal")
    print(f"trained {args.episodes} episodes, "
          f"last-100 mean reward {metrics['last100_mean_reward']:.3f}")

    induced = build_induced_dtmc(model, FallbackPolicy(policy, model))
    result = check(induced.model, 'P=? [ F "frisbee" ]')
    per_state = {
        induced.model.states[i][0]: result.per_state[i]
        for i in range(induced.model.n_states)
    }
    print(f'P(eventually frisbee) from the start: {result.value:.4f}')
    print("value per cell (. = unreachable under the policy, X = water, G = frisbee):")
    water = {5, 7, 11, 12}
    for row in range(4):
        cells = []
        for col in range(4):
            pos = 4 * row + col
            if pos == 15:
                cells.append("  G  ")
            elif pos in water:
                cells.append("  X  ")
            elif pos in per_state:
                cells.append(f"{per_state[pos]:.3f}"[:5])
            else:
                cells.append("  .  ")
        print("  " + "  ".join(cells))
    print("chosen actions:")
    for row in range(4):
        print("  " + "  ".join(
            f"{policy.act((4 * row + col,)):>6}" if 4 * row + col in
            {s[0] for s in induced.model.states} else "     -"
            for col in range(4)
        ))


if __name__ == "__main__":
    main()
