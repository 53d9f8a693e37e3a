"""Tabular Q-learning and deep Q-learning against the simulator.

Both trainers are single-threaded and fully reproducible from the config
seed: the environment, the agent's exploration, and replay sampling each get
their own derived RNG stream.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .engine import compiled
from .errors import TrainingError
from .policies import MlpPolicy, TabularPolicy, forward, mse_loss_and_grads
from .simulate import Simulator, stream_rng


@dataclass
class QLearnConfig:
    episodes: int = 10_000
    max_steps_per_episode: int = 100
    alpha: float = 0.05
    gamma: float = 0.99
    eps_start: float = 1.0
    eps_decay: float = 0.99999  # multiplicative, per environment step
    eps_min: float = 0.1
    seed: int = 128

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0,1], got {self.gamma}")
        if self.eps_min > self.eps_start:
            raise ValueError("eps_min must not exceed eps_start")
        if not 0.0 < self.eps_decay <= 1.0:
            raise ValueError("eps_decay must be in (0,1]")
        if self.episodes <= 0 or self.max_steps_per_episode <= 0:
            raise ValueError("episodes and max_steps_per_episode must be positive")


@dataclass
class DeepQConfig(QLearnConfig):
    hidden: tuple = (32, 32)
    lr: float = 1e-3  # plain SGD step size
    batch_size: int = 32
    replay_capacity: int = 10_000
    target_sync_interval: int = 100  # counted in learning steps

    def __post_init__(self):
        super().__post_init__()
        if self.batch_size <= 0 or self.replay_capacity < self.batch_size:
            raise ValueError("need replay_capacity >= batch_size > 0")
        if self.target_sync_interval <= 0:
            raise ValueError("target_sync_interval must be positive")
        if not all(h > 0 for h in self.hidden):
            raise ValueError("hidden layer sizes must be positive")


class ReplayBuffer:
    """FIFO experience store; oldest entries are evicted first."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._buf = deque(maxlen=capacity)

    def push(self, state, action_idx, reward, next_state, terminal):
        self._buf.append((state, action_idx, reward, next_state, terminal))

    def sample(self, batch_size, rng):
        idx = rng.integers(0, len(self._buf), size=batch_size)
        return [self._buf[int(i)] for i in idx]

    def __len__(self):
        return len(self._buf)


def _metrics(rewards, env_steps, learn_steps, epsilon):
    import hashlib

    trace = np.asarray(rewards)
    blob = ",".join(repr(float(r)) for r in rewards).encode()
    window = min(100, len(rewards))
    best100 = float(max(
        np.convolve(trace, np.ones(window) / window, mode="valid")
    )) if len(rewards) >= window else float(trace.mean())
    return {
        "episodes": len(rewards),
        "env_steps": env_steps,
        "learn_steps": learn_steps,
        "final_epsilon": epsilon,
        "mean_reward": float(trace.mean()),
        "last100_mean_reward": float(trace[-100:].mean()),
        "best100_mean_reward": best100,
        "reward_trace_sha256": hashlib.sha256(blob).hexdigest(),
    }


def _greedy_from_table(q, cm):
    """Greedy policy over the visited states.

    The argmax is restricted to the actions enabled in each state (the
    self-loop handler keeps disabled actions' Q values just below the state
    value, so an unrestricted argmax could store an unexecutable action).
    Ties break to the lowest action index.
    """
    alphabet = cm.actions[: cm.n_model_actions]
    mapping = {}
    for s, vals in q.items():
        enabled = [a for a in cm.enabled_action_ids(s) if a < len(alphabet)]
        candidates = enabled or range(len(alphabet))
        best = max(candidates, key=lambda a: (vals[a], -a))
        mapping[s] = alphabet[best]
    return TabularPolicy(mapping, alphabet=alphabet, var_names=cm.var_names,
                         model_fingerprint=cm.fingerprint())


def q_learning_train(model, cfg: QLearnConfig, target_label, reward_structure):
    """Epsilon-greedy tabular Q iteration; returns (policy, metrics, trace)."""
    cm = compiled(model)
    n_actions = cm.n_model_actions
    sim = Simulator(cm, reward_structure=reward_structure,
                    target_label=target_label, invalid_action="selfloop",
                    rng=stream_rng(cfg.seed, "env"))
    agent_rng = stream_rng(cfg.seed, "agent")
    q = {}
    eps = cfg.eps_start
    episode_rewards = []
    env_steps = 0
    for _ in range(cfg.episodes):
        v = sim.reset()
        total = 0.0
        for _ in range(cfg.max_steps_per_episode):
            if sim.is_terminal(v):
                break
            qv = q.get(v)
            if qv is None:
                qv = q[v] = np.zeros(n_actions)
            if agent_rng.random() < eps:
                a = int(agent_rng.integers(0, n_actions))
            else:
                a = int(np.argmax(qv))
            step = sim.step(a)
            env_steps += 1
            eps = max(cfg.eps_min, eps * cfg.eps_decay)
            total += step.reward
            nv = step.state
            if step.terminal:
                target = step.reward
            else:
                nq = q.get(nv)
                bootstrap = 0.0 if nq is None else float(np.max(nq))
                target = step.reward + cfg.gamma * bootstrap
            qv[a] += cfg.alpha * (target - qv[a])
            v = nv
            if step.terminal:
                break
        episode_rewards.append(total)
    policy = _greedy_from_table(q, cm)
    return policy, _metrics(episode_rewards, env_steps, env_steps, eps), episode_rewards


def deep_q_train(model, cfg: DeepQConfig, target_label, reward_structure):
    """Replay-buffer minibatch TD learning with a periodically synced target
    network; returns (policy, metrics, trace)."""
    cm = compiled(model)
    n_actions = cm.n_model_actions
    n_in = len(cm.var_names)
    sim = Simulator(cm, reward_structure=reward_structure,
                    target_label=target_label, invalid_action="selfloop",
                    rng=stream_rng(cfg.seed, "env"))
    agent_rng = stream_rng(cfg.seed, "agent")
    replay_rng = stream_rng(cfg.seed, "replay")
    init_rng = stream_rng(cfg.seed, "init")

    sizes = [n_in, *cfg.hidden, n_actions]
    weights, biases = [], []
    for i in range(len(sizes) - 1):
        scale = np.sqrt(2.0 / sizes[i])
        weights.append(init_rng.normal(0.0, scale, size=(sizes[i + 1], sizes[i])))
        biases.append(np.zeros(sizes[i + 1]))
    t_weights = [w.copy() for w in weights]
    t_biases = [b.copy() for b in biases]

    policy = MlpPolicy(weights, biases, cm.var_names,
                       cm.actions[:n_actions], cm.lows, cm.highs,
                       model_fingerprint=cm.fingerprint())
    buffer = ReplayBuffer(cfg.replay_capacity)
    eps = cfg.eps_start
    episode_rewards = []
    env_steps = 0
    learn_steps = 0
    for _ in range(cfg.episodes):
        v = sim.reset()
        total = 0.0
        for _ in range(cfg.max_steps_per_episode):
            if sim.is_terminal(v):
                break
            if agent_rng.random() < eps:
                a = int(agent_rng.integers(0, n_actions))
            else:
                a = int(np.argmax(policy.logits(v)))
            step = sim.step(a)
            env_steps += 1
            eps = max(cfg.eps_min, eps * cfg.eps_decay)
            total += step.reward
            buffer.push(v, a, step.reward, step.state, step.terminal)
            v = step.state
            if len(buffer) >= cfg.batch_size:
                batch = buffer.sample(cfg.batch_size, replay_rng)
                states = policy.encode_batch([b[0] for b in batch])
                actions = np.asarray([b[1] for b in batch])
                rewards = np.asarray([b[2] for b in batch])
                next_states = policy.encode_batch([b[3] for b in batch])
                terminal = np.asarray([b[4] for b in batch])
                next_q = forward(t_weights, t_biases, next_states)[-1]
                targets = rewards + np.where(
                    terminal, 0.0, cfg.gamma * next_q.max(axis=1)
                )
                loss, gw, gb = mse_loss_and_grads(
                    weights, biases, states, actions, targets
                )
                if not np.isfinite(loss):
                    raise TrainingError(
                        f"NaN/inf loss at learn step {learn_steps} "
                        f"(epsilon={eps:.4f}, env_steps={env_steps}); "
                        f"lower the step size"
                    )
                for i in range(len(weights)):
                    weights[i] -= cfg.lr * gw[i]
                    biases[i] -= cfg.lr * gb[i]
                learn_steps += 1
                if learn_steps % cfg.target_sync_interval == 0:
                    t_weights = [w.copy() for w in weights]
                    t_biases = [b.copy() for b in biases]
            if step.terminal:
                break
        episode_rewards.append(total)
    for w in weights + biases:
        if not np.all(np.isfinite(w)):
            raise TrainingError("non-finite weights after training")
    return policy, _metrics(episode_rewards, env_steps, learn_steps, eps), episode_rewards
