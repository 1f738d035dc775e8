"""Stateless lattice stage game with an exact equilibrium reference.

100 agents sit on a 10x10 torus and simultaneously pick one of two spins;
each earns -2 + (number of its 4 neighbours spinning the same way). The
aligned profile is an equilibrium, verified by a best-response audit, and
the per-action stage values under that profile anchor the error metric.
A tabular Dirichlet-mean-action learner runs on the stage game while the
error-to-equilibrium trajectory and the value-gap bound are recorded.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .belief import CONCENTRATION_FLOOR, sample_mean_actions
from .learner import TabularQ, bin_mean_action, boltzmann_probs

SIDE = 10
N_AGENTS = SIDE * SIDE
N_SPINS = 2


@dataclass
class IsingState:
    spins: np.ndarray
    temperature: float = 0.8

    def __post_init__(self):
        self.spins = np.asarray(self.spins, dtype=np.int8)
        if self.spins.shape != (N_AGENTS,):
            raise ValueError(f"expected {N_AGENTS} spins")


def neighbor_table() -> np.ndarray:
    """(N_AGENTS, 4) indices of each site's torus neighbours."""
    idx = np.arange(N_AGENTS).reshape(SIDE, SIDE)
    return np.stack([
        np.roll(idx, 1, axis=0), np.roll(idx, -1, axis=0),
        np.roll(idx, 1, axis=1), np.roll(idx, -1, axis=1),
    ], axis=-1).reshape(N_AGENTS, 4)


_NEIGHBORS = neighbor_table()


def ising_reward(same_direction_neighbors: int) -> float:
    """Stage reward -2 + (neighbours matching own spin), for counts 0..4."""
    if not 0 <= same_direction_neighbors <= 4:
        raise ValueError("neighbour count must be in 0..4")
    return -2.0 + float(same_direction_neighbors)


def stage_rewards(joint: np.ndarray) -> np.ndarray:
    joint = np.asarray(joint, dtype=np.int8)
    same = (joint[_NEIGHBORS] == joint[:, None]).sum(axis=1)
    return same.astype(float) - 2.0


def ising_step(state: IsingState, joint: np.ndarray) -> np.ndarray:
    """Replace the lattice spins with the joint action; return per-agent rewards."""
    joint = np.asarray(joint, dtype=np.int8)
    if joint.shape != state.spins.shape:
        raise ValueError("one spin per site required")
    rewards = stage_rewards(joint)
    state.spins = joint.copy()
    return rewards


@dataclass(frozen=True)
class NashReference:
    """Per-action stage values under the aligned equilibrium profile."""

    aligned_value: float
    deviating_value: float

    def values_for(self, aligned_action: int) -> np.ndarray:
        out = np.full(N_SPINS, self.deviating_value)
        out[aligned_action] = self.aligned_value
        return out


def nash_q_reference() -> NashReference:
    """Audit the aligned profile: enumerate one agent's replies against it.

    All four neighbours share one spin; replying with that spin scores
    ising_reward(4), replying with the other scores ising_reward(0). The
    audit asserts no unilateral deviation improves the stage reward.
    """
    aligned_value = ising_reward(4)
    deviating_value = ising_reward(0)
    if deviating_value > aligned_value:
        raise AssertionError("aligned profile is not an equilibrium")
    return NashReference(aligned_value, deviating_value)


@dataclass
class BoundReport:
    """Value-gap bound pieces and the per-episode error trajectory."""

    z: float
    k_estimate: float
    d: float
    mse: list = field(default_factory=list)
    d_trajectory: list = field(default_factory=list)


def estimate_bound_D(q_tables, n: int, delta: float, n_actions: int = N_SPINS,
                     lipschitz_m: float = 1.0) -> BoundReport:
    """Z from the sampling bound plus the largest observed action gap.

    Z uses an unmeasurable mean-action Lipschitz constant set to 1; with
    n = 10000 samples it is ~0 either way. The action-gap term is the max
    over visited keys of |Q(a1) - Q(a2)|, i.e. K * sqrt(2) for one-hot
    actions, so D = Z + K * sqrt(2).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    z = lipschitz_m * n_actions * math.log(2.0 / delta) / (2.0 * n)
    max_gap = 0.0
    for table in q_tables:
        for row in table.table.values():
            gap = float(row.max() - row.min())
            if gap > max_gap:
                max_gap = gap
    return BoundReport(z=z, k_estimate=max_gap / math.sqrt(2.0), d=z + max_gap)


@dataclass(frozen=True)
class IsingRunConfig:
    episodes: int = 2000
    sample_count: int = 10000     # Dirichlet draws per estimate refresh
    alpha: float = 0.1            # tabular step size
    temperature: float = 0.8
    belief_decay: float = 1.0
    delta: float = 0.95
    mean_action_bins: int = 32


def run_ising_pomfq(episodes: int, config: IsingRunConfig,
                    rng: np.random.Generator) -> BoundReport:
    """Tabular Dirichlet-mean-action learning on the stage game.

    One joint stage play per episode: actions come from each agent's
    Boltzmann policy at its current mean-action key, the Dirichlet over
    each agent's 4 neighbours is updated from their previous spins, the
    mean action is redrawn, and the stage reward is written back with a
    terminal tabular update at the refreshed key. The error row for an
    episode is measured before that episode's update, so episode 0
    reflects the zero-initialized tables.
    """
    reference = nash_q_reference()
    tables = [TabularQ(N_SPINS) for _ in range(N_AGENTS)]
    concentration = np.ones((N_AGENTS, N_SPINS))
    mean_actions = np.full((N_AGENTS, N_SPINS), 0.5)
    spins = rng.integers(0, N_SPINS, size=N_AGENTS).astype(np.int8)
    state = IsingState(spins, temperature=config.temperature)
    previous_joint: np.ndarray | None = None

    mse_trajectory: list[float] = []
    d_trajectory: list[float] = []

    for _ in range(episodes):
        keys = [bin_mean_action(mean_actions[j], config.mean_action_bins)
                for j in range(N_AGENTS)]
        if previous_joint is None:
            aligned = np.zeros(N_AGENTS, dtype=int)
        else:
            nb = previous_joint[_NEIGHBORS]
            aligned = (nb.sum(axis=1) * 2 > 4).astype(int)  # majority spin, ties up
        err = 0.0
        for j in range(N_AGENTS):
            q = tables[j].qvalues(keys[j])
            ref = reference.values_for(aligned[j])
            err += float(((q - ref) ** 2).mean())
        mse_trajectory.append(err / N_AGENTS)
        d_trajectory.append(
            estimate_bound_D(tables, config.sample_count, config.delta).d)

        joint = np.empty(N_AGENTS, dtype=np.int8)
        for j in range(N_AGENTS):
            probs = boltzmann_probs(tables[j].qvalues(keys[j]), config.temperature)
            joint[j] = rng.choice(N_SPINS, p=probs)

        if previous_joint is not None:
            nb = previous_joint[_NEIGHBORS]
            zeros = (nb == 0).sum(axis=1)
            counts = np.stack([zeros, 4 - zeros], axis=1)
            concentration = np.maximum(
                config.belief_decay * concentration + counts, CONCENTRATION_FLOOR)
        mean_actions = sample_mean_actions(concentration, config.sample_count, rng)

        rewards = ising_step(state, joint)
        for j in range(N_AGENTS):
            key = bin_mean_action(mean_actions[j], config.mean_action_bins)
            tables[j].td_update(key, int(joint[j]), float(rewards[j]),
                                v_next=0.0, alpha=config.alpha, gamma=0.95)
        previous_joint = joint

    final = estimate_bound_D(tables, config.sample_count, config.delta)
    final.mse = mse_trajectory
    final.d_trajectory = d_trajectory
    return final


def smooth(series, window: int = 50) -> np.ndarray:
    """Trailing moving average with a warm-up of growing windows."""
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        return arr
    out = np.empty_like(arr)
    cumsum = np.concatenate([[0.0], np.cumsum(arr)])
    for i in range(arr.size):
        lo = max(0, i + 1 - window)
        out[i] = (cumsum[i + 1] - cumsum[lo]) / (i + 1 - lo)
    return out
