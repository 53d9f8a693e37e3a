"""Derive policies from a trained one: permissive (feature-abstracted) and
remapped (feature-value-mapped) policies over a single variable.

Multi-feature abstractions compose: a PermissivePolicy can wrap a
RemappedPolicy and vice versa.
"""

import json
from dataclasses import dataclass

from .engine import compiled
from .errors import PrismNameError
from .policies import RemappedPolicy


@dataclass(frozen=True)
class PartitionSpec:
    """Disjoint integer intervals covering a variable's declared domain."""

    var: str
    blocks: tuple  # ((lo, hi), ...) inclusive, sorted

    def __post_init__(self):
        blocks = tuple((int(a), int(b)) for a, b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        prev = None
        for lo, hi in blocks:
            if lo > hi:
                raise ValueError(f"empty block [{lo}..{hi}] in partition of {self.var!r}")
            if prev is not None and lo <= prev:
                raise ValueError(f"partition blocks of {self.var!r} overlap or are unsorted")
            prev = hi

    def block_index(self, value: int) -> int:
        for i, (lo, hi) in enumerate(self.blocks):
            if lo <= value <= hi:
                return i
        raise ValueError(f"{value} not covered by the partition of {self.var!r}")

    def validate_covering(self, low: int, high: int):
        cells = [x for lo, hi in self.blocks for x in range(lo, hi + 1)]
        if cells != list(range(low, high + 1)):
            raise ValueError(
                f"partition blocks of {self.var!r} do not cover [{low}..{high}] exactly"
            )


@dataclass(frozen=True)
class RemapSpec:
    """Explicit value table mu: domain -> domain for one variable."""

    var: str
    table: tuple  # ((i, mu_i), ...) sorted by i

    def __post_init__(self):
        object.__setattr__(
            self, "table", tuple(sorted((int(a), int(b)) for a, b in self.table))
        )

    def as_dict(self):
        return dict(self.table)


def tail_lumping_partition(model, var: str, start: int) -> PartitionSpec:
    """Singleton blocks below ``start``; one block [start..high] above."""
    decl = _int_variable(model, var)
    if not decl.low <= start <= decl.high:
        raise ValueError(
            f"tail start {start} outside the domain [{decl.low}..{decl.high}] of {var!r}"
        )
    blocks = [(v, v) for v in range(decl.low, start)] + [(start, decl.high)]
    return PartitionSpec(var, tuple(blocks))


def clamp_remap(model, var: str, cap: int) -> RemapSpec:
    """mu(i) = min(i, cap) over the variable's whole domain."""
    decl = _int_variable(model, var)
    if not decl.low <= cap <= decl.high:
        raise ValueError(
            f"clamp cap {cap} outside the domain [{decl.low}..{decl.high}] of {var!r}"
        )
    return RemapSpec(var, tuple((i, min(i, cap)) for i in range(decl.low, decl.high + 1)))


def _int_variable(model, var):
    cm = compiled(model)
    sym = cm.symbolic
    decl = sym.variable(var)
    if decl.kind != "int":
        raise PrismNameError(f"{var!r} is not an integer variable")
    return decl


class PermissivePolicy:
    """tau(s) = union of base actions over the block containing s's value.

    Only the partitioned coordinate is varied when querying the base policy;
    results are cached per (rest-of-state, block) because tau cannot depend
    on the exact in-block value.
    """

    def __init__(self, base, spec: PartitionSpec, model):
        decl = _int_variable(model, spec.var)
        spec.validate_covering(decl.low, decl.high)
        cm = compiled(model)
        self.base = base
        self.spec = spec
        self.slot = cm.slots[spec.var]
        self.var_names = cm.var_names
        self.alphabet = cm.actions[: cm.n_model_actions]
        self._cache = {}

    def act_set(self, v) -> frozenset:
        v = tuple(v)
        block = self.spec.block_index(v[self.slot])
        key = v[: self.slot] + (block,) + v[self.slot + 1:]
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        lo, hi = self.spec.blocks[block]
        w = list(v)
        actions = set()
        for k in range(lo, hi + 1):
            w[self.slot] = k
            actions.add(self.base.act(tuple(w)))
        result = frozenset(actions)
        self._cache[key] = result
        return result


def permissive(policy, spec: PartitionSpec, model) -> PermissivePolicy:
    return PermissivePolicy(policy, spec, model)


def remap(policy, spec: RemapSpec, model) -> RemappedPolicy:
    decl = _int_variable(model, spec.var)
    table = spec.as_dict()
    missing = [i for i in range(decl.low, decl.high + 1) if i not in table]
    if missing:
        raise ValueError(f"remap of {spec.var!r} misses domain values {missing}")
    bad = [i for i, y in table.items() if not decl.low <= y <= decl.high]
    if bad:
        raise ValueError(f"remap of {spec.var!r} maps outside the domain at {bad}")
    cm = compiled(model)
    return RemappedPolicy(policy, cm.slots[spec.var], table, name=spec.var)


# ---------------------------------------------------------------------------
# spec files: {"variable", "kind": "partition"|"remap", "blocks"|"pairs",
#              "helpers": {"tail_start": n} | {"clamp_cap": n}}


def transform_spec_to_dict(spec):
    if isinstance(spec, PartitionSpec):
        return {"variable": spec.var, "kind": "partition",
                "blocks": [list(b) for b in spec.blocks]}
    if isinstance(spec, RemapSpec):
        return {"variable": spec.var, "kind": "remap",
                "pairs": [list(p) for p in spec.table]}
    raise TypeError(f"not a transform spec: {spec!r}")


def transform_spec_from_dict(data, model=None):
    var = data["variable"]
    helpers = data.get("helpers") or {}
    if "tail_start" in helpers:
        return tail_lumping_partition(model, var, helpers["tail_start"])
    if "clamp_cap" in helpers:
        return clamp_remap(model, var, helpers["clamp_cap"])
    if data["kind"] == "partition":
        return PartitionSpec(var, tuple(tuple(b) for b in data["blocks"]))
    if data["kind"] == "remap":
        return RemapSpec(var, tuple(tuple(p) for p in data["pairs"]))
    raise ValueError(f"unknown transform kind {data.get('kind')!r}")


def save_transform_spec(spec, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(transform_spec_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_transform_spec(path, model=None):
    with open(path, "r", encoding="utf-8") as fh:
        return transform_spec_from_dict(json.load(fh), model=model)
