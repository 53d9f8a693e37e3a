"""On-the-fly construction of policy-induced models.

Only states the policy can actually reach are expanded: at every new state
the policy callback is queried once, and only the chosen action's successors
enter the frontier. A permissive policy keeps tau(s) ∩ Act(s) instead and
yields a sub-MDP.
"""

import json
from dataclasses import dataclass

import numpy as np

from .engine import compiled
from .errors import DisabledActionError
from .explicit import BuildLimits, ExplicitModel, _explore, export_model


@dataclass
class InducedDtmc:
    model: ExplicitModel  # kind 'dtmc': exactly one choice per state
    chosen_actions: np.ndarray  # action id expanded per state
    fallback_count: int


@dataclass
class InducedMdp:
    model: ExplicitModel  # kind 'mdp', restricted per state to tau(s) ∩ Act(s)
    fallback_count: int  # states where the empty-intersection rule engaged


def build_induced_dtmc(model, policy, limits=None, invalid_action="error") -> InducedDtmc:
    """BFS restricted to the policy's choice in every reachable state.

    ``invalid_action``: 'error' reports a disabled choice (verification
    honesty); 'fallback_first' silently switches to the lexicographically
    first enabled action and counts it.
    """
    if invalid_action not in ("error", "fallback_first"):
        raise ValueError("invalid_action must be 'error' or 'fallback_first'")
    cm = compiled(model)
    counters = {"fallbacks": 0}
    cache = {}

    def selector(v, enabled_ids):
        if not enabled_ids:
            return []  # deadlock state; repair adds the reserved self-loop
        aid = cache.get(v)
        if aid is None:
            name = policy.act(v)
            aid = cm.action_ids.get(name)
            if aid is None:
                raise DisabledActionError(v, name)
            cache[v] = aid
        if aid not in enabled_ids:
            if invalid_action == "error":
                raise DisabledActionError(v, cm.actions[aid])
            counters["fallbacks"] += 1
            aid = enabled_ids[0]
        return [aid]

    mx, chosen, _ = _explore(cm, limits or BuildLimits(), selector)
    mx.kind = "dtmc"
    chosen_ids = np.asarray(
        [kept[0] if kept else cm.deadlock_action_id for kept in chosen],
        dtype=np.int32,
    )
    return InducedDtmc(mx, chosen_ids, counters["fallbacks"])


def build_induced_mdp(model, tau, limits=None, empty_intersection="full_act") -> InducedMdp:
    """Per state keep tau(s) ∩ Act(s); expand only the kept actions.

    An empty intersection either falls back to the full enabled set (keeps
    the bounds conservative; counted) or raises, per ``empty_intersection``.
    """
    if empty_intersection not in ("full_act", "error"):
        raise ValueError("empty_intersection must be 'full_act' or 'error'")
    cm = compiled(model)
    counters = {"fallbacks": 0}

    def selector(v, enabled_ids):
        if not enabled_ids:
            return []
        allowed = tau.act_set(v)
        kept = [aid for aid in enabled_ids if cm.actions[aid] in allowed]
        if not kept:
            if empty_intersection == "error":
                raise DisabledActionError(v, "+".join(sorted(allowed)))
            counters["fallbacks"] += 1
            kept = list(enabled_ids)
        return kept

    mx, _, _ = _explore(cm, limits or BuildLimits(), selector)
    mx.kind = "mdp"
    return InducedMdp(mx, counters["fallbacks"])


def export_induced(induced, path) -> None:
    """Model export plus a provenance sidecar (<path>.provenance.json)."""
    if isinstance(induced, InducedDtmc):
        provenance = {
            "chosen_actions": [
                induced.model.action_names[a] for a in induced.chosen_actions
            ],
            "fallback_count": induced.fallback_count,
        }
    else:
        provenance = {"fallback_count": induced.fallback_count}
    export_model(induced.model, path)
    with open(str(path) + ".provenance.json", "w", encoding="utf-8") as fh:
        json.dump(provenance, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
