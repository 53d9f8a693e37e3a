"""Syntax-based simulator: steps states without building the full model."""

import hashlib
from dataclasses import dataclass

import numpy as np

from .engine import compiled
from .errors import DisabledActionError


def derive_seed(seed: int, stream_name: str) -> int:
    """Stable sub-stream seed: sha256 of (seed, name), platform-independent."""
    digest = hashlib.sha256(f"{seed}:{stream_name}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def stream_rng(seed: int, stream_name: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, stream_name))


@dataclass(frozen=True)
class SimStep:
    state: tuple
    reward: float
    terminal: bool  # target label hit or deadlock


class Simulator:
    """Gym-style reset/step interface over a compiled model.

    ``invalid_action`` controls what a disabled action does: 'error' raises
    (verification contexts), 'selfloop' stays put (training contexts). The
    self-loop pays the declared (state, action) reward so that pointless
    actions are not a free way to stall in penalty-style environments.
    """

    def __init__(self, model, reward_structure=None, target_label=None,
                 invalid_action="selfloop", rng=None, seed=0):
        self.cm = compiled(model)
        if reward_structure is None and self.cm.rewards:
            reward_structure = next(iter(self.cm.rewards))
        if reward_structure is not None and reward_structure not in self.cm.rewards:
            raise KeyError(f"unknown reward structure {reward_structure!r}")
        if target_label is not None and target_label not in self.cm.labels:
            from .errors import PrismNameError

            raise PrismNameError(f"unknown label {target_label!r}")
        self.reward_structure = reward_structure
        self.target_label = target_label
        if invalid_action not in ("error", "selfloop"):
            raise ValueError("invalid_action must be 'error' or 'selfloop'")
        self.invalid_action = invalid_action
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.state = self.cm.initial_state

    @property
    def actions(self):
        return self.cm.actions[: self.cm.n_model_actions]

    def reset(self) -> tuple:
        self.state = self.cm.initial_state
        return self.state

    def enabled_actions(self, v=None):
        return self.cm.enabled_actions(self.state if v is None else tuple(v))

    def is_terminal(self, v=None) -> bool:
        v = self.state if v is None else tuple(v)
        if self.target_label is not None and self.cm.eval_label(self.target_label, v):
            return True
        return not self.cm.enabled_action_ids(v)

    def _reward(self, v, aid) -> float:
        if self.reward_structure is None:
            return 0.0
        return self.cm.signed_reward(v, aid, self.reward_structure)

    def step(self, action) -> SimStep:
        v = self.state
        aid = self.cm.action_ids[action] if isinstance(action, str) else int(action)
        dist = self.cm.successors(v, aid)
        if dist is None:
            if self.invalid_action == "error":
                raise DisabledActionError(v, self.cm.actions[aid])
            return SimStep(v, self._reward(v, aid), False)
        # inverse CDF over updates in declaration order; boundary ties go to
        # the earlier entry (u <= cumulative)
        u = self.rng.random()
        cum = 0.0
        nxt = None
        for s, p in dist.items():
            cum += p
            if u <= cum:
                nxt = s
                break
        if nxt is None:  # cumulative fell short of 1 by rounding
            nxt = s
        self.state = nxt
        return SimStep(nxt, self._reward(v, aid), self.is_terminal(nxt))


def reset(model) -> tuple:
    """Initial valuation of the model."""
    return compiled(model).initial_state


def enabled_actions(model, v):
    """Actions whose guards hold in ``v`` (synchronized across modules)."""
    return compiled(model).enabled_actions(tuple(v))


def step(model, v, action, rng, reward_structure=None, target_label=None,
         invalid_action="selfloop") -> SimStep:
    """One-shot step; prefer a Simulator instance for episode loops."""
    sim = Simulator(model, reward_structure, target_label, invalid_action, rng=rng)
    sim.state = tuple(v)
    return sim.step(action)
