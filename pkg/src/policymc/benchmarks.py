"""The paper-style environments as in-repo fixtures, plus structural validators.

Fixture geometry (grids, depots, obstacle starts) is fixed in the .prism files;
validate_fixture() re-derives rewards and dynamics from closed forms written
directly in Python and checks the fixture against them.
"""

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .engine import compiled
from .errors import PrismNameError
from .explicit import BuildLimits, build_mdp
from .prism import parse_model


@dataclass(frozen=True)
class BenchmarkEntry:
    name: str
    default_constants: dict
    labels: tuple
    default_reward: str
    default_target: str  # episode-terminating label for training


REGISTRY = {
    "coin": BenchmarkEntry(
        "coin", {}, ("done",), "heads", "done"),
    "frozen_lake": BenchmarkEntry(
        "frozen_lake", {}, ("frisbee", "water", "finished"), "goal", "finished"),
    "taxi": BenchmarkEntry(
        "taxi", {"MAX_FUEL": 10, "MAX_JOBS": 2}, ("empty", "finished"),
        "penalty_step", "finished"),
    "collision_avoidance": BenchmarkEntry(
        "collision_avoidance", {"xMax": 4, "yMax": 4, "slickness": 0.0},
        ("collide",), "survival", "collide"),
}


def benchmark_names():
    return sorted(REGISTRY)


def _fixture_text(name, suffix):
    ref = resources.files("policymc") / "fixtures" / f"{name}.{suffix}"
    return ref.read_text(encoding="utf-8")


def benchmark_source(name: str) -> str:
    if name not in REGISTRY:
        raise PrismNameError(
            f"unknown benchmark {name!r}; available: {', '.join(benchmark_names())}"
        )
    return _fixture_text(name, "prism")


def canonical_properties(name: str):
    if name not in REGISTRY:
        raise PrismNameError(f"unknown benchmark {name!r}")
    lines = _fixture_text(name, "props").splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("//")]


def load_benchmark(name: str, const_overrides=None):
    source = benchmark_source(name)
    return parse_model(source, const_overrides or {})


# ---------------------------------------------------------------------------
# validation against closed forms


@dataclass
class FixtureReport:
    name: str
    checks: list = field(default_factory=list)  # (description, ok, witness)

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)

    def add(self, description, ok, witness=""):
        self.checks.append((description, bool(ok), witness))

    def __str__(self):
        lines = [f"fixture {self.name}: {'OK' if self.ok else 'FAILED'}"]
        for desc, ok, witness in self.checks:
            mark = "pass" if ok else "FAIL"
            suffix = f"  [{witness}]" if witness and not ok else ""
            lines.append(f"  {mark}: {desc}{suffix}")
        return "\n".join(lines)


def _lake_move_targets(pos):
    col, row = pos % 4, pos // 4
    return {
        "left": pos - 1 if col > 0 else pos,
        "right": pos + 1 if col < 3 else pos,
        "up": pos - 4 if row > 0 else pos,
        "down": pos + 4 if row < 3 else pos,
    }


_LAKE_SLIPS = {
    "left": ("up", "down"), "right": ("up", "down"),
    "up": ("left", "right"), "down": ("left", "right"),
}
_LAKE_TERMINAL = frozenset({5, 7, 11, 12, 15})


def _lake_expected_goal_reward(pos, action, slippery):
    t = _lake_move_targets(pos)
    a, b = _LAKE_SLIPS[action]
    return ((1 - 2 * slippery) * (t[action] == 15)
            + slippery * (t[a] == 15) + slippery * (t[b] == 15))


def _sample_state_choices(mx, rng, count):
    total = mx.n_choices
    picks = sorted(set(int(x) for x in rng.integers(0, total, size=count)))
    state_of_choice = np.repeat(np.arange(mx.n_states), np.diff(mx.row_ptr))
    return [(int(state_of_choice[c]), c) for c in picks]


def validate_fixture(name: str, samples: int = 100) -> FixtureReport:
    entry = REGISTRY.get(name)
    if entry is None:
        raise PrismNameError(f"unknown benchmark {name!r}")
    model = load_benchmark(name)
    cm = compiled(model)
    mx = build_mdp(model, BuildLimits())
    report = FixtureReport(name)
    rng = np.random.default_rng(0)

    for label in entry.labels:
        nonempty = bool(mx.labels[label].any())
        report.add(f'label "{label}" marks at least one reachable state', nonempty)

    terminal_forms = {
        "coin": lambda v: False,
        "frozen_lake": lambda v: v[0] in _LAKE_TERMINAL,
        "taxi": lambda v: v[8] == model.constants["MAX_JOBS"] or v[6] == 0,
        "collision_avoidance": lambda v: (v[0], v[1]) in ((v[2], v[3]), (v[4], v[5])),
    }
    is_terminal = terminal_forms[name]
    deadlocked = np.flatnonzero(mx.deadlock)
    stray = [int(s) for s in deadlocked if not is_terminal(mx.states[s])]
    report.add(
        "deadlock repair only fires on declared terminal states",
        not stray,
        f"state {mx.states[stray[0]]}" if stray else "",
    )

    if name == "frozen_lake":
        slippery = model.constants["slippery"]
        bad = None
        for pos in range(16):
            v = (pos,)
            for action in ("down", "left", "right", "up"):
                got = cm.reward(v, cm.action_ids[action], "goal") if pos not in _LAKE_TERMINAL else 0.0
                want = 0.0 if pos in _LAKE_TERMINAL else _lake_expected_goal_reward(pos, action, slippery)
                if abs(got - want) > 1e-12:
                    bad = (pos, action, got, want)
                    break
        report.add(
            "goal reward equals the arrival probability of cell 15, all 16 cells",
            bad is None, str(bad) if bad else "",
        )
        bad = None
        for s, c in _sample_state_choices(mx, rng, samples):
            v = mx.states[s]
            if v[0] in _LAKE_TERMINAL:
                continue
            action = mx.action_names[mx.choice_action[c]]
            t = _lake_move_targets(v[0])
            a, b = _LAKE_SLIPS[action]
            want = {}
            for tgt, p in ((t[action], 1 - 2 * slippery), (t[a], slippery), (t[b], slippery)):
                want[tgt] = want.get(tgt, 0.0) + p
            got = {mx.states[j][0]: p for j, p in mx.distribution(c)}
            if set(got) != set(want) or any(abs(got[k] - want[k]) > 1e-9 for k in want):
                bad = (v[0], action, got, want)
                break
        report.add("movement distributions match the slip closed form", bad is None,
                   str(bad) if bad else "")

    if name == "taxi":
        bad = None
        for s, c in _sample_state_choices(mx, rng, samples):
            v = mx.states[s]
            x, y, plx, ply, pdx, pdy, fuel, on_board, jobs = v
            action = mx.action_names[mx.choice_action[c]]
            got = mx.rewards["penalty_step"][c]
            if action == "pick_up":
                want = 21
            elif action == "drop":
                want = 0 if (on_board and (x, y) == (pdx, pdy)) else 21
            elif action.startswith("τ#"):
                want = 0
            elif on_board:
                want = 21 + abs(x - pdx) + abs(y - pdy)
            else:
                want = 21 + abs(x - plx) + abs(y - ply)
            if got != want:
                bad = (v, action, got, want)
                break
        report.add("per-step penalties match the closed form on sampled states",
                   bad is None, str(bad) if bad else "")

    if name == "collision_avoidance":
        bad = None
        for s, c in _sample_state_choices(mx, rng, samples):
            v = mx.states[s]
            collided = is_terminal(v)
            got = mx.rewards["survival"][c]
            want = 0 if collided else 100
            if got != want:
                bad = (v, got, want)
                break
        report.add("survival reward is 100 off-collision and 0 on collision",
                   bad is None, str(bad) if bad else "")

    return report
