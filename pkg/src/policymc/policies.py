"""Deterministic policies: lookup tables and small feedforward networks.

A policy is anything with ``act(state_tuple) -> action_name`` plus
``var_names``/``alphabet`` metadata; the induced-model builders and the
transforms only rely on that surface.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import PolicyFormatError

FORMAT_VERSION = 1


@dataclass
class TabularPolicy:
    """state -> action map; unseen states fall back to the lexicographically
    first action in the alphabet."""

    mapping: dict
    alphabet: tuple
    var_names: tuple
    model_fingerprint: str = ""

    def act(self, v) -> str:
        a = self.mapping.get(tuple(v))
        return a if a is not None else self.alphabet[0]

    def __contains__(self, v):
        return tuple(v) in self.mapping


class MlpPolicy:
    """ReLU network over min-max scaled state vectors; identity output layer.

    ``act`` is the argmax over output logits with ties broken by the lowest
    action index. Scaling bounds are frozen at construction (training) time,
    so the policy keeps its input encoding when evaluated on a model built
    with different constants.
    """

    def __init__(self, weights, biases, var_names, alphabet, lows, highs,
                 model_fingerprint=""):
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        self.var_names = tuple(var_names)
        self.alphabet = tuple(alphabet)
        self.lows = np.asarray(lows, dtype=np.float64)
        self.highs = np.asarray(highs, dtype=np.float64)
        self.model_fingerprint = model_fingerprint
        if self.weights[0].shape[1] != len(self.var_names):
            raise PolicyFormatError("first layer width must match the variable count")
        if self.weights[-1].shape[0] != len(self.alphabet):
            raise PolicyFormatError("output width must match the action alphabet")

    @classmethod
    def zeros(cls, hidden, model):
        """All-zero network for a compiled/symbolic model (testing aid)."""
        from .engine import compiled

        cm = compiled(model)
        sizes = [len(cm.var_names), *hidden, cm.n_model_actions]
        weights = [np.zeros((sizes[i + 1], sizes[i])) for i in range(len(sizes) - 1)]
        biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
        return cls(weights, biases, cm.var_names,
                   cm.actions[: cm.n_model_actions], cm.lows, cm.highs,
                   cm.fingerprint())

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def encode(self, v):
        x = np.asarray(v, dtype=np.float64)
        span = self.highs - self.lows
        span = np.where(span == 0, 1.0, span)
        return (x - self.lows) / span

    def encode_batch(self, states):
        x = np.asarray(states, dtype=np.float64)
        span = self.highs - self.lows
        span = np.where(span == 0, 1.0, span)
        return (x - self.lows) / span

    def logits(self, v):
        return forward(self.weights, self.biases, self.encode(v)[None, :])[-1][0]

    def act(self, v) -> str:
        return self.alphabet[int(np.argmax(self.logits(v)))]


class RemappedPolicy:
    """Answers act(q, i) as base.act(q, mu(i)); remapping happens on the raw
    integer value, before any encoding the base policy applies."""

    def __init__(self, base, slot, table, name=""):
        self.base = base
        self.slot = slot
        self.table = dict(table)
        self.var_names = base.var_names
        self.alphabet = base.alphabet
        self.name = name

    def act(self, v) -> str:
        v = tuple(v)
        w = list(v)
        w[self.slot] = self.table[v[self.slot]]
        return self.base.act(tuple(w))


class FallbackPolicy:
    """Resolves the base policy against a model: a disabled choice is replaced
    by the lexicographically first enabled action. ``fallbacks`` counts how
    often that happened (per distinct queried state)."""

    def __init__(self, base, model):
        from .engine import compiled

        self.base = base
        self.cm = compiled(model)
        self.var_names = base.var_names
        self.alphabet = base.alphabet
        self.fallbacks = 0
        self._cache = {}

    def act(self, v) -> str:
        v = tuple(v)
        hit = self._cache.get(v)
        if hit is not None:
            return hit
        a = self.base.act(v)
        enabled = self.cm.enabled_actions(v)
        if enabled and a not in enabled:
            a = enabled[0]
            self.fallbacks += 1
        self._cache[v] = a
        return a


# ---------------------------------------------------------------------------
# feedforward net plumbing (shared by MlpPolicy inference and deep-Q training)


def forward(weights, biases, X):
    """Returns the list of layer activations, input first, logits last."""
    acts = [X]
    h = X
    last = len(weights) - 1
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = h @ W.T + b
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return acts


def backward(weights, acts, dOut):
    """Gradients of a loss wrt weights/biases given dLoss/dLogits."""
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    delta = dOut
    for i in range(len(weights) - 1, -1, -1):
        grads_w[i] = delta.T @ acts[i]
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i]) * (acts[i] > 0.0)
    return grads_w, grads_b


def mse_loss_and_grads(weights, biases, X, action_idx, targets):
    """Mean-squared TD loss on the taken-action outputs only."""
    acts = forward(weights, biases, X)
    q = acts[-1]
    n = X.shape[0]
    taken = q[np.arange(n), action_idx]
    diff = taken - targets
    loss = float(np.mean(diff ** 2))
    dOut = np.zeros_like(q)
    dOut[np.arange(n), action_idx] = 2.0 * diff / n
    gw, gb = backward(weights, acts, dOut)
    return loss, gw, gb


def mlp_backprop_check(policy: MlpPolicy, n_inputs=4, seed=7,
                       h=1e-5, param_samples=200) -> float:
    """Max relative error between analytic gradients and central finite
    differences of the MSE loss on random inputs.

    Inputs are re-drawn if any pre-activation sits within 10*h of a ReLU kink
    (finite differences are meaningless across the kink).
    """
    rng = np.random.default_rng(seed)
    W = [w.copy() for w in policy.weights]
    B = [b.copy() for b in policy.biases]
    n_in = W[0].shape[1]
    n_out = W[-1].shape[0]
    def kink_free(X):
        h_act = X
        for i, (w, b) in enumerate(zip(W, B)):
            z = h_act @ w.T + b
            if i < len(W) - 1:
                if z.size and np.min(np.abs(z)) <= 10 * h:
                    return False
                h_act = np.maximum(z, 0.0)
        return True

    zero_net = not any(w.any() for w in W)
    for _ in range(50):
        X = rng.uniform(-1.0, 1.0, size=(n_inputs, n_in))
        if zero_net or kink_free(X):
            break
    action_idx = rng.integers(0, n_out, size=n_inputs)
    targets = rng.normal(size=n_inputs)
    _, gw, gb = mse_loss_and_grads(W, B, X, action_idx, targets)

    def loss_at():
        acts = forward(W, B, X)
        taken = acts[-1][np.arange(n_inputs), action_idx]
        return float(np.mean((taken - targets) ** 2))

    params = []
    for li, w in enumerate(W):
        for idx in np.ndindex(w.shape):
            params.append(("w", li, idx))
    for li, b in enumerate(B):
        for idx in np.ndindex(b.shape):
            params.append(("b", li, idx))
    if len(params) > param_samples:
        picks = rng.choice(len(params), size=param_samples, replace=False)
        params = [params[i] for i in sorted(picks)]

    worst = 0.0
    for kind, li, idx in params:
        arr = W[li] if kind == "w" else B[li]
        analytic = (gw if kind == "w" else gb)[li][idx]
        orig = arr[idx]
        arr[idx] = orig + h
        up = loss_at()
        arr[idx] = orig - h
        down = loss_at()
        arr[idx] = orig
        fd = (up - down) / (2 * h)
        denom = max(abs(analytic), abs(fd))
        err = 0.0 if denom < 1e-8 else abs(analytic - fd) / denom
        worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# serialization: JSON envelope with decimal doubles


def save_policy(policy, path) -> None:
    if isinstance(policy, TabularPolicy):
        payload = {
            "variables": list(policy.var_names),
            "alphabet": list(policy.alphabet),
            "entries": sorted(
                ([list(map(int, k)), a] for k, a in policy.mapping.items())
            ),
        }
        kind = "tabular"
        fingerprint = policy.model_fingerprint
    elif isinstance(policy, MlpPolicy):
        payload = {
            "variables": list(policy.var_names),
            "alphabet": list(policy.alphabet),
            "layer_sizes": policy.layer_sizes,
            "lows": policy.lows.tolist(),
            "highs": policy.highs.tolist(),
            "weights": [w.reshape(-1).tolist() for w in policy.weights],
            "biases": [b.tolist() for b in policy.biases],
        }
        kind = "mlp"
        fingerprint = policy.model_fingerprint
    else:
        raise PolicyFormatError(
            f"only tabular and mlp policies serialize, not {type(policy).__name__}"
        )
    envelope = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "model_fingerprint": fingerprint,
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(envelope, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_policy(path, model=None):
    """Load a policy file; with ``model`` given, validate compatibility."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            envelope = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PolicyFormatError(f"cannot read policy file {path}: {exc}") from exc
    if not isinstance(envelope, dict) or "format_version" not in envelope:
        raise PolicyFormatError(f"{path}: not a policy file")
    if envelope["format_version"] != FORMAT_VERSION:
        raise PolicyFormatError(
            f"{path}: format version {envelope['format_version']} "
            f"(this build reads version {FORMAT_VERSION})"
        )
    payload = envelope["payload"]
    kind = envelope["kind"]
    fingerprint = envelope.get("model_fingerprint", "")
    if kind == "tabular":
        alphabet = tuple(payload["alphabet"])
        stray = sorted({a for _, a in payload["entries"]} - set(alphabet))
        if stray:
            raise PolicyFormatError(
                f"{path}: stored actions {stray} are not in the alphabet"
            )
        policy = TabularPolicy(
            {tuple(k): a for k, a in payload["entries"]},
            alphabet=alphabet,
            var_names=tuple(payload["variables"]),
            model_fingerprint=fingerprint,
        )
    elif kind == "mlp":
        sizes = payload["layer_sizes"]
        weights = [
            np.asarray(flat, dtype=np.float64).reshape(sizes[i + 1], sizes[i])
            for i, flat in enumerate(payload["weights"])
        ]
        biases = [np.asarray(b, dtype=np.float64) for b in payload["biases"]]
        policy = MlpPolicy(
            weights, biases, payload["variables"], payload["alphabet"],
            payload["lows"], payload["highs"], model_fingerprint=fingerprint,
        )
    else:
        raise PolicyFormatError(f"{path}: unknown policy kind {kind!r}")
    if model is not None:
        _check_compat(policy, model, path)
    return policy


def _check_compat(policy, model, path):
    from .engine import compiled

    cm = compiled(model)
    if tuple(policy.var_names) != cm.var_names:
        raise PolicyFormatError(
            f"{path}: policy is over variables {policy.var_names}, the model "
            f"has {cm.var_names} (dimension/name mismatch)"
        )
    model_actions = cm.actions[: cm.n_model_actions]
    if tuple(policy.alphabet) != model_actions:
        raise PolicyFormatError(
            f"{path}: policy alphabet {policy.alphabet} does not match the "
            f"model's {model_actions}"
        )
