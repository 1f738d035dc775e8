"""Q-learners over tabular and neural backends.

Covers the Boltzmann policy and its temperature schedule, the replay
buffer, the mean-field value operator, the per-algorithm belief plumbing
(independent, frequentist mean-action, Dirichlet mean-action, Dirichlet
plus visibility rate), and the per-episode loop that ties them to an
environment. One backend is shared per group; belief state is per agent.
"""

from dataclasses import dataclass, field

import numpy as np

from .approx import Adam, Mlp, loss_and_grads, soft_update
from .belief import (MeanActionBelief, VisibilityBelief, sample_mean_actions,
                     sample_rates)

ALGORITHMS = ("il", "mfq", "pomfq_for", "pomfq_pdo")


def boltzmann_probs(qvalues: np.ndarray, temperature: float) -> np.ndarray:
    """Softmax of q / temperature, stabilized by max subtraction."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    q = np.asarray(qvalues, dtype=float)
    z = q / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def pomf_value(qvalues: np.ndarray, temperature: float) -> float:
    """Policy-weighted value sum(pi(a) * Q(a)) under the Boltzmann policy."""
    q = np.asarray(qvalues, dtype=float)
    return float(boltzmann_probs(q, temperature) @ q)


@dataclass(frozen=True)
class TemperatureSchedule:
    """Linear decay from initial to final over a horizon of episodes."""

    initial: float = 1.0
    final: float = 0.01
    horizon: int = 1

    def __post_init__(self):
        if self.initial <= 0 or self.final <= 0:
            raise ValueError("temperatures must be positive")
        if self.final > self.initial:
            raise ValueError("schedule must be nonincreasing")

    def at(self, episode: int) -> float:
        if self.horizon <= 1:
            return self.final if episode > 0 else self.initial
        frac = min(1.0, max(0, episode) / (self.horizon - 1))
        return self.initial + (self.final - self.initial) * frac


@dataclass
class Experience:
    """Replay tuple; mean_action/lambda_bar are the estimates at storage time."""

    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    mean_action: np.ndarray | None
    lambda_bar: float | None
    done: bool


class ReplayBuffer:
    """Fixed-capacity ring with oldest-first eviction."""

    def __init__(self, capacity: int = 1024):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Experience] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, exp: Experience) -> None:
        if len(self._items) < self.capacity:
            self._items.append(exp)
        else:
            self._items[self._cursor] = exp
            self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, k: int, rng: np.random.Generator) -> list[Experience]:
        """Uniform sample with replacement."""
        if not self._items:
            raise RuntimeError("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._items), size=k)
        return [self._items[i] for i in idx]

    def state_dict(self) -> dict:
        return {"capacity": self.capacity, "items": list(self._items),
                "cursor": self._cursor}

    @classmethod
    def from_state_dict(cls, state: dict) -> "ReplayBuffer":
        buf = cls(state["capacity"])
        buf._items = list(state["items"])
        buf._cursor = state["cursor"]
        return buf


MEAN_ACTION_BINS = 32
LAMBDA_BINS = 16
_LAMBDA_EDGES = 4.0 * 0.5 ** np.arange(LAMBDA_BINS - 1, 0, -1)  # log-spaced over (0, 4]


def bin_mean_action(mean_action: np.ndarray, n_bins: int = MEAN_ACTION_BINS) -> tuple:
    idx = np.minimum((np.asarray(mean_action) * n_bins).astype(int), n_bins - 1)
    return tuple(int(i) for i in idx)


def bin_lambda(lambda_bar: float) -> int:
    return int(np.searchsorted(_LAMBDA_EDGES, lambda_bar, side="left"))


class TabularQ:
    """Action-value table with zero defaults for unseen keys."""

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.table: dict = {}

    def qvalues(self, key) -> np.ndarray:
        row = self.table.get(key)
        return row.copy() if row is not None else np.zeros(self.n_actions)

    def td_update(self, key, action: int, reward: float, v_next: float,
                  alpha: float, gamma: float) -> None:
        """Q <- (1-alpha) Q + alpha (r + gamma v_next)."""
        if not 0.0 <= alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if not 0.0 <= gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        row = self.table.get(key)
        if row is None:
            row = np.zeros(self.n_actions)
            self.table[key] = row
        row[action] = (1.0 - alpha) * row[action] + alpha * (reward + gamma * v_next)


class NeuralQ:
    """Online/target network pair sharing one optimizer."""

    def __init__(self, input_dim: int, n_actions: int, hidden=(64, 64),
                 lr: float = 1e-4, rng: np.random.Generator | None = None):
        sizes = (input_dim, *hidden, n_actions)
        self.online = Mlp(sizes, rng)
        self.target = self.online.copy()
        self.optimizer = Adam(self.online, lr=lr)

    def qvalues(self, X: np.ndarray, use_target: bool = False) -> np.ndarray:
        net = self.target if use_target else self.online
        return net.forward_batch(X)

    def train_step(self, X, actions, targets) -> float:
        loss, grads = loss_and_grads(self.online, X, actions, targets)
        self.optimizer.step(self.online, grads)
        return loss

    def sync_target(self, tau: float) -> None:
        soft_update(self.target, self.online, tau)


@dataclass
class AgentMind:
    """Per-agent belief state carried across an entire training run."""

    mean_action: np.ndarray | None = None
    belief: MeanActionBelief | None = None
    visibility: VisibilityBelief | None = None
    lambda_bar: float | None = None


@dataclass
class LearnerConfig:
    algo: str
    n_actions: int
    obs_dim: int
    hidden: tuple = (64, 64)
    learning_rate: float = 1e-4
    gamma: float = 0.95
    tau: float = 0.01
    buffer_capacity: int = 1024
    batch_size: int = 64
    sample_count: int = 100
    belief_decay: float = 1.0
    updates_per_episode: int = 1

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}")


class GroupLearner:
    """Shared Q-network for one group plus the group's replay buffer."""

    def __init__(self, cfg: LearnerConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.backend = NeuralQ(self.input_dim, cfg.n_actions, cfg.hidden,
                               cfg.learning_rate, rng)
        self.buffer = ReplayBuffer(cfg.buffer_capacity)

    @property
    def uses_mean_action(self) -> bool:
        return self.cfg.algo != "il"

    @property
    def uses_lambda(self) -> bool:
        return self.cfg.algo == "pomfq_pdo"

    @property
    def input_dim(self) -> int:
        dim = self.cfg.obs_dim
        if self.uses_mean_action:
            dim += self.cfg.n_actions
        if self.uses_lambda:
            dim += 1
        return dim

    def new_mind(self) -> AgentMind:
        mind = AgentMind()
        L = self.cfg.n_actions
        if self.uses_mean_action:
            mind.mean_action = np.full(L, 1.0 / L)
        if self.cfg.algo in ("pomfq_for", "pomfq_pdo"):
            mind.belief = MeanActionBelief.uniform_prior(L)
        if self.uses_lambda:
            mind.visibility = VisibilityBelief()
            mind.lambda_bar = mind.visibility.lambda_bar
        return mind

    def compose(self, obs: np.ndarray, mean_action, lambda_bar) -> np.ndarray:
        parts = [obs]
        if self.uses_mean_action:
            parts.append(mean_action)
        if self.uses_lambda:
            parts.append([lambda_bar])
        return np.concatenate(parts) if len(parts) > 1 else obs

    def compose_batch(self, obs_matrix: np.ndarray, minds) -> np.ndarray:
        if not self.uses_mean_action:
            return obs_matrix
        parts = [obs_matrix, np.stack([m.mean_action for m in minds])]
        if self.uses_lambda:
            parts.append(np.array([[m.lambda_bar] for m in minds]))
        return np.hstack(parts)

    def act(self, X: np.ndarray, temperature: float,
            rng: np.random.Generator) -> np.ndarray:
        """Sample one action per row from the Boltzmann policy."""
        probs = boltzmann_probs(self.backend.qvalues(X), temperature)
        cum = probs.cumsum(axis=1)
        cum[:, -1] = 1.0
        u = rng.random((X.shape[0], 1))
        return (cum < u).sum(axis=1)

    def refresh_minds(self, minds, observations, rng: np.random.Generator) -> None:
        """Belief updates from one step's observations, then re-estimation.

        Frequentist groups average the visible one-hot actions (keeping the
        previous estimate when nothing is visible); Bayesian groups add the
        visible action counts to their Dirichlet and redraw the mean-action
        estimate; visibility-tracking groups also fold each sighting
        distance into the Gamma belief and redraw the rate estimate.
        """
        algo = self.cfg.algo
        if algo == "il" or not minds:
            return
        L = self.cfg.n_actions
        if algo == "mfq":
            for mind, ob in zip(minds, observations):
                visible = [a for a in ob.last_actions if a is not None]
                if visible:
                    mind.mean_action = np.bincount(visible, minlength=L) / len(visible)
            return
        for mind, ob in zip(minds, observations):
            visible = [a for a in ob.last_actions if a is not None]
            counts = np.bincount(visible, minlength=L) if visible else np.zeros(L)
            mind.belief = mind.belief.updated(counts, self.cfg.belief_decay)
        conc = np.stack([m.belief.concentration for m in minds])
        means = sample_mean_actions(conc, self.cfg.sample_count, rng)
        for mind, mean in zip(minds, means):
            mind.mean_action = mean
        if algo == "pomfq_pdo":
            for mind, ob in zip(minds, observations):
                for d in ob.distances:
                    mind.visibility = mind.visibility.updated(float(d))
            shapes = np.array([m.visibility.shape for m in minds])
            rates = np.array([m.visibility.rate for m in minds])
            lams = sample_rates(shapes, rates, self.cfg.sample_count, rng)
            for mind, lam in zip(minds, lams):
                mind.lambda_bar = float(lam)
                mind.visibility.lambda_bar = float(lam)

    def store(self, exp: Experience) -> None:
        self.buffer.push(exp)

    def train_minibatch(self, temperature: float,
                        rng: np.random.Generator) -> float | None:
        """One optimizer step on a sampled minibatch; None if buffer empty.

        Targets bootstrap through the target network at the stored
        mean-action (and rate) estimates, never recomputed ones.
        """
        if len(self.buffer) == 0:
            return None
        batch = self.buffer.sample(self.cfg.batch_size, rng)
        X = np.stack([self.compose(e.obs, e.mean_action, e.lambda_bar)
                      for e in batch])
        X_next = np.stack([self.compose(e.next_obs, e.mean_action, e.lambda_bar)
                           for e in batch])
        q_next = self.backend.qvalues(X_next, use_target=True)
        values = (boltzmann_probs(q_next, temperature) * q_next).sum(axis=1)
        rewards = np.array([e.reward for e in batch])
        live = np.array([0.0 if e.done else 1.0 for e in batch])
        targets = rewards + self.cfg.gamma * values * live
        actions = np.array([e.action for e in batch])
        return self.backend.train_step(X, actions, targets)

    def sync_target(self) -> None:
        self.backend.sync_target(self.cfg.tau)

    def state_dict(self) -> dict:
        return {
            "cfg": self.cfg,
            "online": ([w.copy() for w in self.backend.online.weights],
                       [b.copy() for b in self.backend.online.biases]),
            "target": ([w.copy() for w in self.backend.target.weights],
                       [b.copy() for b in self.backend.target.biases]),
            "optimizer": self.backend.optimizer.state_dict(),
            "buffer": self.buffer.state_dict(),
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "GroupLearner":
        learner = cls(state["cfg"], rng=None)
        ws, bs = state["online"]
        learner.backend.online.weights = [w.copy() for w in ws]
        learner.backend.online.biases = [b.copy() for b in bs]
        ws, bs = state["target"]
        learner.backend.target.weights = [w.copy() for w in ws]
        learner.backend.target.biases = [b.copy() for b in bs]
        learner.backend.optimizer = Adam.from_state_dict(
            learner.backend.online, state["optimizer"])
        learner.buffer = ReplayBuffer.from_state_dict(state["buffer"])
        return learner


@dataclass
class EpisodeMetrics:
    steps: int = 0
    reward_sum: dict = field(default_factory=dict)
    kills: dict = field(default_factory=dict)
    alive: dict = field(default_factory=dict)
    losses: dict = field(default_factory=dict)


def run_episode(state, model, groups: dict, minds: dict, temperature: float,
                rng: np.random.Generator, train: bool = True) -> EpisodeMetrics:
    """Play one episode and (optionally) train each group afterwards.

    Per step: every live agent picks an action from its group's policy at
    the current estimates, beliefs are refreshed from what the step's
    observation showed, the joint action executes, and the transition is
    stored with the refreshed estimates. After the step loop each group
    runs its minibatch updates and one soft target blend.
    """
    from .arena import observe_all  # local import to avoid a module cycle

    metrics = EpisodeMetrics()
    for gid in groups:
        metrics.reward_sum[gid] = 0.0
        metrics.kills[gid] = 0
        metrics.alive[gid] = 0

    group_of = {e.id: e.group for e in state.entities}
    obs = observe_all(state, model, rng)

    while state.step_count < state.max_steps and obs:
        actions: dict[int, int] = {}
        ids_by_group = {}
        for gid, learner in groups.items():
            ids = sorted(j for j in obs if group_of[j] == gid)
            ids_by_group[gid] = ids
            if not ids:
                continue
            feats = np.stack([obs[j].features for j in ids])
            X = learner.compose_batch(feats, [minds[j] for j in ids])
            chosen = learner.act(X, temperature, rng)
            actions.update(zip(ids, (int(a) for a in chosen)))

        for gid, learner in groups.items():
            ids = ids_by_group[gid]
            if ids:
                learner.refresh_minds([minds[j] for j in ids],
                                      [obs[j] for j in ids], rng)

        result = state.step(actions)
        next_obs = observe_all(state, model, rng)

        for j, a in actions.items():
            gid = group_of[j]
            learner = groups[gid]
            reward = result.rewards.get(j, 0.0)
            metrics.reward_sum[gid] += reward
            dead_now = j not in next_obs
            nxt = (next_obs[j].features if not dead_now
                   else np.zeros_like(obs[j].features))
            mind = minds[j]
            mean = mind.mean_action.copy() if mind.mean_action is not None else None
            learner.store(Experience(obs[j].features, a, reward, nxt, mean,
                                     mind.lambda_bar, result.done or dead_now))
        for victim, killers in result.deaths:
            victim_group = group_of[victim]
            killer_groups = {group_of[k] for k in killers}
            for gid in killer_groups:
                if gid != victim_group:
                    metrics.kills[gid] += 1

        obs = next_obs
        metrics.steps += 1
        if result.done:
            break

    for j in state.alive_ids():
        metrics.alive[group_of[j]] += 1

    if train:
        for gid, learner in groups.items():
            losses = []
            for _ in range(learner.cfg.updates_per_episode):
                loss = learner.train_minibatch(temperature, rng)
                if loss is not None:
                    losses.append(loss)
            if losses:
                learner.sync_target()
            metrics.losses[gid] = float(np.mean(losses)) if losses else None
    return metrics
