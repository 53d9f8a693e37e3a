"""Graph-only precomputation of the states with reachability value exactly 0
or exactly 1. All fixpoints are vectorized rounds over the CSR arrays; no
numerics are involved, so the results are exact.
"""

import numpy as np


def _choice_all(mask_over_trans, choice_ptr):
    return np.logical_and.reduceat(mask_over_trans, choice_ptr[:-1])


def _choice_any(mask_over_trans, choice_ptr):
    return np.logical_or.reduceat(mask_over_trans, choice_ptr[:-1])


def _state_all(mask_over_choices, row_ptr):
    return np.logical_and.reduceat(mask_over_choices, row_ptr[:-1])


def _state_any(mask_over_choices, row_ptr):
    return np.logical_or.reduceat(mask_over_choices, row_ptr[:-1])


def backward_reachable(mx, target, restrict=None):
    """States with a positive-probability path into ``target``.

    With ``restrict``, intermediate hops must stay inside the restricted set
    (the target itself always counts).
    """
    reached = target.copy()
    while True:
        hit = reached[mx.succ]
        state_any = _state_any(_choice_any(hit, mx.choice_ptr), mx.row_ptr)
        if restrict is not None:
            state_any &= restrict
        new = reached | state_any
        if np.array_equal(new, reached):
            return new
        reached = new


def _exists_closed_subset(mx, candidates):
    """Greatest U ⊆ candidates such that every state in U has some action
    whose entire support stays in U."""
    u = candidates.copy()
    while True:
        inside = u[mx.succ]
        keep = _state_any(_choice_all(inside, mx.choice_ptr), mx.row_ptr) & u
        if np.array_equal(keep, u):
            return u
        u = keep


def _all_actions_hit(mx, target):
    """Least F ⊇ target with: every action of s has support intersecting F."""
    f = target.copy()
    while True:
        hit = f[mx.succ]
        state_all = _state_all(_choice_any(hit, mx.choice_ptr), mx.row_ptr)
        new = f | state_all
        if np.array_equal(new, f):
            return f
        f = new


def _prob1_exists(mx, target):
    """States where some policy reaches ``target`` almost surely."""
    u = np.ones(mx.n_states, dtype=bool)
    while True:
        r = target.copy()
        while True:
            in_u = u[mx.succ]
            in_r = r[mx.succ]
            good_choice = _choice_all(in_u, mx.choice_ptr) & _choice_any(in_r, mx.choice_ptr)
            new_r = r | (_state_any(good_choice, mx.row_ptr) & u)
            if np.array_equal(new_r, r):
                break
            r = new_r
        if np.array_equal(r, u):
            return u
        u = r


def prob01(mx, target, mode):
    """(prob0, prob1) masks for 'dtmc', 'min', or 'max' reachability."""
    target = np.asarray(target, dtype=bool)
    if mode == "dtmc":
        prob0 = ~backward_reachable(mx, target)
        # value < 1 means escaping to prob0 along target-free states; a path
        # that crosses the target has already satisfied the reachability event
        prob1 = ~backward_reachable(mx, prob0, restrict=~target)
        return prob0, prob1
    if mode == "max":
        prob0 = ~backward_reachable(mx, target)
        prob1 = _prob1_exists(mx, target)
        return prob0, prob1
    if mode == "min":
        prob0 = ~_all_actions_hit(mx, target)
        # a policy can avoid the target iff it can reach, via target-free
        # states, a closed target-free sub-MDP
        stay = _exists_closed_subset(mx, ~target)
        prob1 = ~backward_reachable(mx, stay, restrict=~target)
        return prob0, prob1
    raise ValueError(f"mode must be dtmc/min/max, got {mode!r}")
