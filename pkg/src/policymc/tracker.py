"""File-based experiment tracker: runs/<run_id>/manifest.json + artifacts/.

run_id is a content hash of (command, config, seed, code version), so
re-running an identical configuration lands in the same directory and
produces identical metrics. Timestamps and wall times live outside the
hashed config and outside the ``metrics`` block.
"""

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

from . import __version__
from .errors import TrackerError


def dump_json17(obj, indent=0) -> str:
    """Deterministic JSON with every float at 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, float):
        if math.isinf(obj):
            return '"inf"' if obj > 0 else '"-inf"'
        if math.isnan(obj):
            return '"nan"'
        return f"{obj:.17g}"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dump_json17(x) for x in obj) + "]"
    if isinstance(obj, dict):
        items = ", ".join(
            f"{json.dumps(str(k))}: {dump_json17(v)}" for k, v in sorted(obj.items())
        )
        return "{" + items + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def run_id_for(command: str, config: dict) -> str:
    blob = dump_json17({"command": command, "config": config, "version": __version__})
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    run_id: str
    command: str
    config: dict
    metrics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)  # name -> relative path
    parent_run_id: str = None
    created_at: str = ""

    def to_dict(self):
        return {
            "run_id": self.run_id,
            "parent_run_id": self.parent_run_id,
            "command": self.command,
            "config": self.config,
            "metrics": self.metrics,
            "timings": self.timings,
            "artifacts": self.artifacts,
            "created_at": self.created_at,
            "version": __version__,
        }


class RunStore:
    def __init__(self, root="runs"):
        self.root = str(root)

    def _dir(self, run_id):
        return os.path.join(self.root, run_id)

    def manifest_path(self, run_id):
        return os.path.join(self._dir(run_id), "manifest.json")

    def artifact_dir(self, run_id):
        return os.path.join(self._dir(run_id), "artifacts")

    def begin(self, command: str, config: dict, parent_run_id=None) -> RunManifest:
        run_id = run_id_for(command, config)
        manifest = RunManifest(
            run_id=run_id, command=command, config=config,
            parent_run_id=parent_run_id,
            created_at=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        )
        os.makedirs(self.artifact_dir(run_id), exist_ok=True)
        return manifest

    def artifact_path(self, manifest: RunManifest, name: str) -> str:
        path = os.path.join(self.artifact_dir(manifest.run_id), name)
        manifest.artifacts[name] = os.path.join("artifacts", name)
        return path

    def commit(self, manifest: RunManifest) -> str:
        if manifest.parent_run_id is not None:
            self._check_parents(manifest.parent_run_id, manifest.run_id)
        path = self.manifest_path(manifest.run_id)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dump_json17(manifest.to_dict()))
            fh.write("\n")
        return path

    def _check_parents(self, parent_id, child_id):
        seen = {child_id}
        cur = parent_id
        while cur is not None:
            if cur in seen:
                raise TrackerError(f"parent links form a cycle at run {cur}")
            seen.add(cur)
            try:
                cur = self.load(cur)["parent_run_id"]
            except TrackerError:
                # parent manifests may legitimately live in another store
                return

    def load(self, run_id) -> dict:
        path = self.manifest_path(run_id)
        if not os.path.exists(path):
            raise TrackerError(f"no run {run_id!r} under {self.root}/")
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def list_runs(self):
        if not os.path.isdir(self.root):
            return []
        out = []
        for name in sorted(os.listdir(self.root)):
            path = self.manifest_path(name)
            if os.path.exists(path):
                out.append(self.load(name))
        out.sort(key=lambda m: (m.get("created_at", ""), m["run_id"]))
        return out
