"""Explicit-state models: BFS construction, sparse storage, binary export.

State indices are assigned in BFS discovery order, so two explorations of the
same model are identical byte-for-byte after serialization. Transitions are
stored CSR-style: states -> choices -> (successor, probability) pairs sorted
by successor index.
"""

import json
import struct
from dataclasses import dataclass, field
from array import array

import numpy as np

from .engine import CompiledModel, compiled
from .errors import LimitExceeded, ModelError

_MAGIC = b"PMCEXP01"
_TRIPLE = struct.Struct("<IHId")
_TRIPLE_DT = np.dtype(
    [("src", "<u4"), ("act", "<u2"), ("dst", "<u4"), ("prob", "<f8")]
)


@dataclass
class BuildLimits:
    max_states: int = 5_000_000
    max_transitions: int = 500_000_000


@dataclass
class ExplicitModel:
    kind: str  # 'mdp' | 'dtmc'
    var_names: tuple
    var_kinds: tuple
    action_names: tuple  # model alphabet + reserved deadlock action
    states: list  # [tuple], index 0 = initial state
    row_ptr: np.ndarray  # (n_states+1,) into choices
    choice_action: np.ndarray  # (n_choices,) action ids
    choice_ptr: np.ndarray  # (n_choices+1,) into transitions
    succ: np.ndarray  # (n_transitions,) uint32
    prob: np.ndarray  # (n_transitions,) float64
    rewards: dict  # structure name -> (n_choices,) float64
    labels: dict  # label name -> (n_states,) bool
    deadlock: np.ndarray  # (n_states,) bool, true where a self-loop was added
    _index: dict = field(default=None, repr=False, compare=False)

    @property
    def n_states(self):
        return len(self.states)

    @property
    def n_choices(self):
        return len(self.choice_action)

    @property
    def n_transitions(self):
        return len(self.succ)

    def state_index(self, v):
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.states)}
        return self._index[tuple(v)]

    def choices_of(self, s):
        return range(self.row_ptr[s], self.row_ptr[s + 1])

    def distribution(self, c):
        lo, hi = self.choice_ptr[c], self.choice_ptr[c + 1]
        return list(zip(self.succ[lo:hi].tolist(), self.prob[lo:hi].tolist()))

    def enabled(self, s):
        """Sorted (action name, distribution) pairs of state ``s``."""
        out = []
        for c in self.choices_of(s):
            out.append((self.action_names[self.choice_action[c]], self.distribution(c)))
        return out


def build_mdp(model, limits: BuildLimits = None) -> ExplicitModel:
    """Forward BFS exploration of the full model."""
    cm = compiled(model)
    mx = _explore(cm, limits or BuildLimits(), selector=None)[0]
    if cm.kind == "dtmc":
        bad = np.flatnonzero(np.diff(mx.row_ptr) > 1)
        if bad.size:
            s = int(bad[0])
            raise ModelError(
                f"model is declared dtmc but state {cm.state_dict(mx.states[s])} "
                f"has {int(mx.row_ptr[s + 1] - mx.row_ptr[s])} enabled actions"
            )
    return mx


def _explore(cm: CompiledModel, limits: BuildLimits, selector):
    """Shared BFS core.

    ``selector(v, enabled_ids) -> list[int]`` restricts which enabled actions
    are expanded (None keeps all). Returns (ExplicitModel, chosen, fallbacks)
    where ``chosen`` lists the expanded action ids per state.
    """
    reward_names = list(cm.rewards)
    states = []
    index = {}
    row_ptr = [0]
    choice_action = array("i")
    choice_ptr = [0]
    succ = array("I")
    prob = array("d")
    choice_rewards = {name: array("d") for name in reward_names}
    deadlock_flags = array("b")
    chosen = []
    fallbacks = 0

    def intern(v):
        i = index.get(v)
        if i is None:
            i = len(states)
            if i >= limits.max_states:
                raise LimitExceeded(len(states), len(succ), limits)
            index[v] = i
            states.append(v)
        return i

    intern(cm.initial_state)
    i = 0
    while i < len(states):
        v = states[i]
        scratch = {}
        enabled = cm.enabled_action_ids(v, scratch)
        kept = enabled if selector is None else selector(v, enabled)
        if selector is not None and kept and not set(kept) <= set(enabled):
            raise ModelError("selector kept a disabled action")
        if kept:
            for aid in kept:
                dist = cm.successors(v, aid, scratch)
                entries = sorted((intern(s), p) for s, p in dist.items())
                if len(succ) + len(entries) > limits.max_transitions:
                    raise LimitExceeded(len(states), len(succ), limits)
                choice_action.append(aid)
                for j, p in entries:
                    succ.append(j)
                    prob.append(p)
                choice_ptr.append(len(succ))
                for name in reward_names:
                    choice_rewards[name].append(cm.reward(v, aid, name))
            deadlock_flags.append(0)
        else:
            # deadlock repair: a single reserved self-loop with reward 0
            choice_action.append(cm.deadlock_action_id)
            succ.append(i)
            prob.append(1.0)
            choice_ptr.append(len(succ))
            for name in reward_names:
                choice_rewards[name].append(0.0)
            deadlock_flags.append(1)
        row_ptr.append(len(choice_action))
        chosen.append(kept)
        i += 1

    labels = {}
    for name, fn in cm.labels.items():
        labels[name] = np.fromiter((bool(fn(v)) for v in states), dtype=bool, count=len(states))

    mx = ExplicitModel(
        kind=cm.kind,
        var_names=cm.var_names,
        var_kinds=cm.var_kinds,
        action_names=cm.actions,
        states=states,
        row_ptr=np.asarray(row_ptr, dtype=np.int64),
        choice_action=np.frombuffer(choice_action, dtype=np.int32).copy(),
        choice_ptr=np.asarray(choice_ptr, dtype=np.int64),
        succ=np.frombuffer(succ, dtype=np.uint32).copy(),
        prob=np.frombuffer(prob, dtype=np.float64).copy(),
        rewards={
            name: np.frombuffer(arr, dtype=np.float64).copy()
            for name, arr in choice_rewards.items()
        },
        labels=labels,
        deadlock=np.frombuffer(deadlock_flags, dtype=np.int8).astype(bool),
        _index=index,
    )
    return mx, chosen, fallbacks


# ---------------------------------------------------------------------------
# export / import: JSON header + little-endian (src:u32, act:u16, dst:u32,
# prob:f64) triple stream; bit-exact across platforms.


def _header_dict(mx: ExplicitModel, provenance=None):
    header = {
        "format": "policymc-explicit/1",
        "kind": mx.kind,
        "counts": {
            "states": mx.n_states,
            "choices": mx.n_choices,
            "transitions": mx.n_transitions,
        },
        "variables": list(mx.var_names),
        "variable_kinds": list(mx.var_kinds),
        "actions": list(mx.action_names),
        "states": [list(map(int, s)) for s in mx.states],
        "labels": {k: np.flatnonzero(v).tolist() for k, v in sorted(mx.labels.items())},
        "rewards": {k: v.tolist() for k, v in sorted(mx.rewards.items())},
        "deadlock": np.flatnonzero(mx.deadlock).tolist(),
    }
    if provenance is not None:
        header["provenance"] = provenance
    return header


def export_model(mx: ExplicitModel, path, provenance=None) -> None:
    if len(mx.action_names) > 0xFFFF:
        raise ModelError("cannot export: more than 65535 action identities")
    header = json.dumps(_header_dict(mx, provenance), sort_keys=True,
                        separators=(",", ":")).encode("utf-8")
    state_of_choice = np.repeat(
        np.arange(mx.n_states, dtype=np.uint32), np.diff(mx.row_ptr)
    )
    triples = np.empty(mx.n_transitions, dtype=_TRIPLE_DT)
    triples["src"] = np.repeat(state_of_choice, np.diff(mx.choice_ptr))
    triples["act"] = np.repeat(mx.choice_action.astype(np.uint16), np.diff(mx.choice_ptr))
    triples["dst"] = mx.succ
    triples["prob"] = mx.prob
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(triples.tobytes())


def import_model(path) -> ExplicitModel:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ModelError(f"{path}: not a policymc explicit-model file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        blob = fh.read()
    counts = header["counts"]
    n_trans = counts["transitions"]
    if len(blob) != n_trans * _TRIPLE.size:
        raise ModelError(f"{path}: truncated transition stream")
    triples = np.frombuffer(blob, dtype=_TRIPLE_DT)
    src = triples["src"]
    act = triples["act"].astype(np.int32)
    dst = triples["dst"].copy()
    pr = triples["prob"].copy()
    n_states = counts["states"]
    row_ptr = [0]
    choice_action = []
    choice_ptr = [0]
    cur_state = 0
    for t in range(n_trans):
        if t == 0 or src[t] != src[t - 1] or act[t] != act[t - 1]:
            while cur_state < src[t]:
                row_ptr.append(len(choice_action))
                cur_state += 1
            choice_action.append(int(act[t]))
            if t > 0:
                choice_ptr.append(t)
    choice_ptr.append(n_trans)
    while cur_state < n_states:
        row_ptr.append(len(choice_action))
        cur_state += 1
    labels = {}
    for name, ids in header["labels"].items():
        mask = np.zeros(n_states, dtype=bool)
        mask[ids] = True
        labels[name] = mask
    deadlock = np.zeros(n_states, dtype=bool)
    deadlock[header["deadlock"]] = True
    mx = ExplicitModel(
        kind=header["kind"],
        var_names=tuple(header["variables"]),
        var_kinds=tuple(header["variable_kinds"]),
        action_names=tuple(header["actions"]),
        states=[tuple(s) for s in header["states"]],
        row_ptr=np.asarray(row_ptr, dtype=np.int64),
        choice_action=np.asarray(choice_action, dtype=np.int32),
        choice_ptr=np.asarray(choice_ptr, dtype=np.int64),
        succ=dst,
        prob=pr,
        rewards={k: np.asarray(v, dtype=np.float64) for k, v in header["rewards"].items()},
        labels=labels,
        deadlock=deadlock,
    )
    return mx
