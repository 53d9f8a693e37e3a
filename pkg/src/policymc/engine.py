"""Compiled runtime semantics for a SymbolicModel.

Guards, probabilities, assignments, labels, and reward items are compiled to
Python lambdas over the state vector once; successor enumeration then runs on
plain tuples. This is the hot path of the state-space explorer, so the inner
loops trade a little clarity for speed.
"""

from .errors import ModelError
from .prism.eval import compile_expr
from .prism.syntax import DEADLOCK_ACTION, SymbolicModel

PROB_TOL = 1e-9


class CompiledCommand:
    __slots__ = ("action_id", "module", "line", "guard", "updates", "label")

    def __init__(self, action_id, module, line, guard, updates, label):
        self.action_id = action_id
        self.module = module
        self.line = line
        self.guard = guard
        self.updates = updates  # [(prob_fn|None, ((slot, fn, is_bool), ...)), ...]
        self.label = label


class CompiledModel:
    """Executable view of a SymbolicModel; immutable and shareable."""

    def __init__(self, model: SymbolicModel):
        self.symbolic = model
        self.kind = model.kind
        self.var_names = tuple(v.name for v in model.variables)
        self.var_kinds = tuple(v.kind for v in model.variables)
        self.lows = tuple(v.low for v in model.variables)
        self.highs = tuple(v.high for v in model.variables)
        self.initial_state = tuple(v.init for v in model.variables)
        self.slots = {n: i for i, n in enumerate(self.var_names)}
        # action table: model alphabet plus the reserved deadlock self-loop
        self.actions = tuple(model.action_alphabet) + (DEADLOCK_ACTION,)
        self.action_ids = {a: i for i, a in enumerate(self.actions)}
        self.deadlock_action_id = len(self.actions) - 1
        self.n_model_actions = len(model.action_alphabet)

        per_action_modules = {}
        for mi, mod in enumerate(model.modules):
            for cmd in mod.commands:
                cc = self._compile_command(cmd, mod.name)
                per_action_modules.setdefault(cc.action_id, {}).setdefault(mi, []).append(cc)
        # plan[aid]: tuple of command groups, one per participating module
        self._plan = {}
        for aid, by_module in per_action_modules.items():
            self._plan[aid] = tuple(by_module[mi] for mi in sorted(by_module))
        self._sorted_aids = sorted(self._plan)

        self.labels = {
            name: compile_expr(expr, self.slots) for name, expr in model.labels.items()
        }
        # rewards[name] = (state_items, by_action_items, silent_items)
        self.rewards = {}
        for name, items in model.rewards.items():
            state_items = []
            by_action = {}
            silent_items = []
            for it in items:
                compiled = (compile_expr(it.guard, self.slots), compile_expr(it.value, self.slots))
                if it.action is None:
                    state_items.append(compiled)
                elif it.action == "":
                    silent_items.append(compiled)
                else:
                    by_action.setdefault(self.action_ids[it.action], []).append(compiled)
            self.rewards[name] = (state_items, by_action, silent_items)

    def _compile_command(self, cmd, module_name):
        guard = compile_expr(cmd.guard, self.slots)
        updates = []
        for up in cmd.updates:
            prob_fn = compile_expr(up.prob, self.slots) if up.prob is not None else None
            assigns = tuple(
                (self.slots[name], compile_expr(e, self.slots), self.var_kinds[self.slots[name]] == "bool")
                for name, e in up.assigns
            )
            updates.append((prob_fn, assigns))
        return CompiledCommand(
            self.action_ids[cmd.action], module_name, cmd.line, guard, tuple(updates), cmd.action
        )

    # -- queries ------------------------------------------------------------
    #
    # ``cache`` is an optional per-state scratch dict shared between the
    # enabledness check and the successor expansion of one state: guards and
    # command outcomes are computed once per (state, command) even when
    # commands are shared across several synchronized action labels.

    def enabled_action_ids(self, v, cache=None):
        guard_of = self._guard_cached if cache is not None else None
        out = []
        for aid in self._sorted_aids:
            ok = True
            for group in self._plan[aid]:
                if guard_of is not None:
                    if not any(guard_of(cc, v, cache) for cc in group):
                        ok = False
                        break
                elif not any(cc.guard(v) for cc in group):
                    ok = False
                    break
            if ok:
                out.append(aid)
        return out

    def enabled_actions(self, v, cache=None):
        return [self.actions[aid] for aid in self.enabled_action_ids(v, cache)]

    @staticmethod
    def _guard_cached(cc, v, cache):
        key = id(cc)
        hit = cache.get(key)
        if hit is None:
            hit = cache[key] = (bool(cc.guard(v)), None)
        return hit[0]

    def _outcomes(self, cc, v, cache):
        """[(prob, ((slot, value), ...)), ...] of one enabled command."""
        if cache is not None:
            key = id(cc)
            hit = cache.get(key)
            if hit is not None and hit[1] is not None:
                return hit[1]
        outs = []
        for prob_fn, assigns in cc.updates:
            p = 1.0 if prob_fn is None else float(prob_fn(v))
            if not (0.0 < p <= 1.0 + PROB_TOL):
                raise ModelError(
                    f"update probability {p!r} outside (0,1] in command "
                    f"[{cc.label}] (module {cc.module}, line {cc.line}) "
                    f"at state {self.state_dict(v)}"
                )
            vals = []
            for slot, fn, is_bool in assigns:
                x = fn(v)
                x = int(x) if is_bool else x
                if x < self.lows[slot] or x > self.highs[slot]:
                    raise ModelError(
                        f"assignment drives {self.var_names[slot]!r} to {x} "
                        f"outside [{self.lows[slot]}..{self.highs[slot]}] in "
                        f"command [{cc.label}] (module {cc.module}, line "
                        f"{cc.line}) at state {self.state_dict(v)}"
                    )
                vals.append((slot, x))
            outs.append((p, tuple(vals)))
        if cache is not None:
            cache[key] = (True, outs)
        return outs

    def successors(self, v, aid, cache=None):
        """Distribution {successor: probability} for action ``aid`` in ``v``.

        Returns None when the action is disabled. Probabilities of equal
        successors are merged; the summed mass must be 1 within PROB_TOL.
        """
        plan = self._plan.get(aid)
        if plan is None:
            return None
        combos = None  # [(prob, merged assignment tuple)]
        for group in plan:
            outcomes = None
            for cc in group:
                if cache is not None:
                    if not self._guard_cached(cc, v, cache):
                        continue
                elif not cc.guard(v):
                    continue
                outs = self._outcomes(cc, v, cache)
                outcomes = outs if outcomes is None else outcomes + outs
            if outcomes is None:
                return None
            if combos is None:
                combos = outcomes
            else:
                combos = [
                    (p * q, vals1 + vals2)
                    for p, vals1 in combos
                    for q, vals2 in outcomes
                ]
        dist = {}
        get = dist.get
        for p, vals in combos:
            if vals:
                nv = list(v)
                for slot, x in vals:
                    nv[slot] = x
                key = tuple(nv)
            else:
                key = v
            dist[key] = get(key, 0.0) + p
        total = 0.0
        for p in dist.values():
            total += p
        if abs(total - 1.0) > PROB_TOL:
            label = self.actions[aid]
            raise ModelError(
                f"probabilities for action [{label}] sum to {total!r} (missing "
                f"{1.0 - total!r}) at state {self.state_dict(v)}"
            )
        return dist

    def reward(self, v, aid, structure):
        state_items, by_action, silent_items = self.rewards[structure]
        total = 0.0
        for guard, value in state_items:
            if guard(v):
                total += value(v)
        for guard, value in by_action.get(aid, ()):
            if guard(v):
                total += value(v)
        if silent_items and self.actions[aid].startswith("τ#"):
            for guard, value in silent_items:
                if guard(v):
                    total += value(v)
        return total

    def signed_reward(self, v, aid, structure):
        """Reward with the penalty convention: 'penalty_*' structures negate."""
        raw = self.reward(v, aid, structure)
        return -raw if structure.startswith("penalty_") else raw

    def eval_label(self, name, v) -> bool:
        return bool(self.labels[name](v))

    def state_dict(self, v):
        return {n: bool(x) if k == "bool" else x
                for n, k, x in zip(self.var_names, self.var_kinds, v)}

    def fingerprint(self) -> str:
        import hashlib

        text = "|".join(
            f"{n}:{k}:{lo}:{hi}"
            for n, k, lo, hi in zip(self.var_names, self.var_kinds, self.lows, self.highs)
        ) + "||" + ",".join(self.actions[: self.n_model_actions])
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def compiled(model) -> CompiledModel:
    """Accept either a SymbolicModel or an already-compiled model."""
    if isinstance(model, CompiledModel):
        return model
    return CompiledModel(model)
