"""Training, faceoff, ablation, and bound-check orchestration.

Every run derives its randomness from (master seed, replica, episode,
purpose), so resuming from a checkpoint at an episode boundary replays
the exact byte stream an uninterrupted run would have produced. Metrics
go to fixed-schema CSV files; wall time is recorded only when a timer is
supplied (the CLI's --timing flag), because timed rows are inherently
non-reproducible.
"""

import os
from dataclasses import dataclass, replace

import numpy as np

from . import arena
from .belief import hoeffding_bound
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, config_hash, dump_config, parse_config_text
from .ising import IsingRunConfig, run_ising_pomfq
from .learner import GroupLearner, LearnerConfig, TemperatureSchedule, run_episode
from .rng import derive_seed, make_rng
from .stats import fisher_exact

TRAIN_HEADER = "episode,replica,group,reward_sum,kills,alive,wall_ms"
FACEOFF_HEADER = "pairing,wins_a,wins_b,draws,fisher_p"
ISING_HEADER = "episode,mse,d_bound"
ABLATE_HEADER = "radius," + TRAIN_HEADER
BOUNDS_HEADER = "n,delta,bound,coverage,trials"


def observation_model(cfg: RunConfig):
    if cfg.mode == "for":
        return arena.ForModel(cfg.view_radius)
    return arena.PdoModel(cfg.visibility_lambda)


def group_counts(cfg: RunConfig) -> tuple[int, int]:
    if cfg.game == "predator_prey":
        return cfg.agents_per_group, 2 * cfg.agents_per_group
    return cfg.agents_per_group, cfg.agents_per_group


def build_learners(cfg: RunConfig, rng) -> tuple[dict, dict]:
    """Fresh per-group learners and per-agent belief state for one replica."""
    dim = arena.obs_dim(cfg.game)
    groups = {}
    for gid, algo in ((0, cfg.algo_a), (1, cfg.algo_b)):
        lcfg = LearnerConfig(
            algo=algo, n_actions=arena.N_ACTIONS, obs_dim=dim,
            learning_rate=cfg.learning_rate, gamma=cfg.gamma, tau=cfg.tau,
            buffer_capacity=cfg.replay_capacity, batch_size=cfg.batch_size,
            sample_count=cfg.sample_count, belief_decay=cfg.belief_decay,
            updates_per_episode=cfg.updates_per_episode)
        groups[gid] = GroupLearner(lcfg, rng)
    n0, n1 = group_counts(cfg)
    minds = {j: groups[0 if j < n0 else 1].new_mind() for j in range(n0 + n1)}
    return groups, minds


def _new_env(cfg: RunConfig, seed: int, record_events: bool = False):
    return arena.make_game(cfg.game, cfg.agents_per_group, cfg.map_width,
                           cfg.map_height, seed=seed, max_steps=cfg.max_steps,
                           food_count=cfg.food_count,
                           record_events=record_events)


def run_training(cfg: RunConfig, out_dir, resume=None, timer=None) -> dict:
    """Train both groups against each other; write train.csv and a checkpoint.

    With resume pointing at a checkpoint from the same config (episode
    budget aside), training continues at the stored episode and the new
    CSV rows are appended, reproducing the uninterrupted run byte for
    byte.
    """
    cfg = cfg.resolved()
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "train.csv")
    ckpt_path = os.path.join(out_dir, "checkpoint.bin")

    restored = {}
    if resume is not None:
        payload = load_checkpoint(resume)
        if payload.get("kind") != "train":
            raise ConfigError("checkpoint is not a training checkpoint")
        if payload.get("config_hash") != config_hash(cfg):
            raise ConfigError("checkpoint config does not match this run")
        restored = payload["replicas"]

    append = resume is not None and os.path.exists(csv_path)
    out = open(csv_path, "a" if append else "w", encoding="utf-8", newline="")
    with out:
        if not append:
            out.write(TRAIN_HEADER + "\n")
        schedule = TemperatureSchedule(cfg.temperature_initial,
                                       cfg.temperature_final,
                                       cfg.temperature_horizon)
        model = observation_model(cfg)
        replicas_payload = {}
        for replica in range(cfg.replicas):
            if replica in restored:
                snap = restored[replica]
                start = snap["episode"]
                groups = {gid: GroupLearner.from_state_dict(state)
                          for gid, state in snap["groups"].items()}
                minds = snap["minds"]
            else:
                start = 0
                groups, minds = build_learners(
                    cfg, make_rng(cfg.master_seed, replica, "init"))
            if start > cfg.episodes:
                raise ConfigError("checkpoint is ahead of the requested episodes")

            for episode in range(start, cfg.episodes):
                env = _new_env(cfg, derive_seed(cfg.master_seed, replica,
                                                episode, "env"))
                rng = make_rng(cfg.master_seed, replica, episode, "loop")
                t0 = timer() if timer is not None else None
                metrics = run_episode(env, model, groups, minds,
                                      schedule.at(episode), rng, train=True)
                wall_ms = round((timer() - t0) * 1000.0) if timer is not None else 0
                for gid in sorted(groups):
                    out.write(f"{episode},{replica},{gid},"
                              f"{metrics.reward_sum[gid]!r},{metrics.kills[gid]},"
                              f"{metrics.alive[gid]},{wall_ms}\n")
            replicas_payload[replica] = {
                "episode": cfg.episodes,
                "groups": {gid: learner.state_dict()
                           for gid, learner in groups.items()},
                "minds": minds,
            }

    save_checkpoint(ckpt_path, {
        "kind": "train",
        "config_text": dump_config(cfg),
        "config_hash": config_hash(cfg),
        "replicas": replicas_payload,
    })
    return {"csv": csv_path, "checkpoint": ckpt_path}


_ENV_FIELDS = ("game", "mode", "view_radius", "visibility_lambda", "max_steps",
               "agents_per_group", "map_width", "map_height", "food_count")


@dataclass
class FaceoffResult:
    pairing: str
    wins_a: int
    wins_b: int
    draws: int
    fisher_p: float

    @property
    def games(self) -> int:
        return self.wins_a + self.wins_b + self.draws


def _winner(metrics, game: str) -> int | None:
    """0/1 for the winning env group, None for a draw."""
    alive0, alive1 = metrics.alive[0], metrics.alive[1]
    if alive0 != alive1:
        return 0 if alive0 > alive1 else 1
    if game == "predator_prey":
        return None
    r0, r1 = metrics.reward_sum[0], metrics.reward_sum[1]
    if r0 == r1:
        return None
    return 0 if r0 > r1 else 1


def run_faceoff(ckpt_a, ckpt_b, games: int, seed: int,
                out_dir=None, replica: int = 0) -> FaceoffResult:
    """Greedy tournament between two trained checkpoints.

    The first half pairs A's group 0 against B's group 1, the second half
    swaps which checkpoint controls each side. Policies run at the
    temperature floor with no learning; beliefs restart fresh each game.
    """
    pa = load_checkpoint(ckpt_a)
    pb = load_checkpoint(ckpt_b)
    for name, payload in (("A", pa), ("B", pb)):
        if payload.get("kind") != "train":
            raise ConfigError(f"checkpoint {name} is not a training checkpoint")
    cfg_a = parse_config_text(pa["config_text"]).resolved()
    cfg_b = parse_config_text(pb["config_text"]).resolved()
    for field_name in _ENV_FIELDS:
        va, vb = getattr(cfg_a, field_name), getattr(cfg_b, field_name)
        if va != vb:
            raise ConfigError(
                f"checkpoints disagree on {field_name}: {va!r} vs {vb!r}")
    for name, payload in (("A", pa), ("B", pb)):
        if replica not in payload["replicas"]:
            raise ConfigError(f"checkpoint {name} has no replica {replica}")

    side_a = {gid: GroupLearner.from_state_dict(state)
              for gid, state in pa["replicas"][replica]["groups"].items()}
    side_b = {gid: GroupLearner.from_state_dict(state)
              for gid, state in pb["replicas"][replica]["groups"].items()}
    model = observation_model(cfg_a)
    temperature = cfg_a.temperature_final
    n0, _ = group_counts(cfg_a)

    wins_a = wins_b = draws = 0
    first_half = (games + 1) // 2
    for game_idx in range(games):
        orientation = 0 if game_idx < first_half else 1
        if orientation == 0:
            groups = {0: side_a[0], 1: side_b[1]}
            a_group = 0
        else:
            groups = {0: side_b[0], 1: side_a[1]}
            a_group = 1
        env = _new_env(cfg_a, derive_seed(seed, "faceoff", game_idx, "env"))
        rng = make_rng(seed, "faceoff", game_idx, "loop")
        minds = {j: groups[0 if j < n0 else 1].new_mind()
                 for j in range(len(env.entities))}
        metrics = run_episode(env, model, groups, minds, temperature, rng,
                              train=False)
        winner = _winner(metrics, cfg_a.game)
        if winner is None:
            draws += 1
        elif winner == a_group:
            wins_a += 1
        else:
            wins_b += 1

    decisive = wins_a + wins_b
    p = fisher_exact(wins_a, wins_b, (decisive + 1) // 2, decisive // 2)
    result = FaceoffResult(f"{cfg_a.algo_a}_vs_{cfg_b.algo_a}",
                           wins_a, wins_b, draws, p)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "faceoff.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(FACEOFF_HEADER + "\n")
            fh.write(f"{result.pairing},{result.wins_a},{result.wins_b},"
                     f"{result.draws},{result.fisher_p!r}\n")
    return result


def run_ablation(cfg: RunConfig, out_dir, radii=(2, 4, 6, 8, 10),
                 timer=None) -> str:
    """One training run per view radius, merged into a radius-keyed CSV."""
    cfg = cfg.resolved()
    if cfg.mode != "for":
        raise ConfigError("observation_mode: ablation requires mode 'for'")
    os.makedirs(out_dir, exist_ok=True)
    merged = os.path.join(out_dir, "ablate.csv")
    with open(merged, "w", encoding="utf-8", newline="") as fh:
        fh.write(ABLATE_HEADER + "\n")
        for radius in radii:
            sub_cfg = replace(cfg, view_radius=float(radius))
            sub_dir = os.path.join(out_dir, f"radius_{radius}")
            paths = run_training(sub_cfg, sub_dir, timer=timer)
            with open(paths["csv"], "r", encoding="utf-8") as sub:
                next(sub)  # header
                for line in sub:
                    fh.write(f"{radius},{line}")
    return merged


def run_bounds(ns, delta: float, trials: int, seed: int, out_dir=None,
               concentration=(1.0, 1.0, 1.0)) -> list[dict]:
    """Monte Carlo coverage of the mean-action deviation bound.

    For each n, draws `trials` empirical means of n posterior samples and
    measures how often every deviation from the posterior mean stays
    inside hoeffding_bound(n, delta), per component; reports the worst
    component's coverage.
    """
    conc = np.asarray(concentration, dtype=float)
    p = conc / conc.sum()
    length = conc.size
    rng = make_rng(seed, "bounds")
    rows = []
    for n in ns:
        bound = hoeffding_bound(n, delta)
        within = np.zeros(length)
        done = 0
        chunk = max(1, min(trials, 4_000_000 // (n * length)))
        while done < trials:
            c = min(chunk, trials - done)
            g = rng.standard_gamma(conc, size=(c, n, length))
            draws = g / g.sum(axis=2, keepdims=True)
            means = draws.mean(axis=1)
            within += (np.abs(means - p) <= bound).sum(axis=0)
            done += c
        coverage = float((within / trials).min())
        rows.append({"n": n, "delta": delta, "bound": bound,
                     "coverage": coverage, "trials": trials})
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "bounds.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(BOUNDS_HEADER + "\n")
            for row in rows:
                fh.write(f"{row['n']},{row['delta']!r},{row['bound']!r},"
                         f"{row['coverage']!r},{row['trials']}\n")
    return rows


def run_ising(episodes: int, seed: int, out_dir=None,
              config: IsingRunConfig | None = None):
    """Run the lattice benchmark and emit the error/bound trajectory CSV."""
    config = config or IsingRunConfig(episodes=episodes)
    rng = make_rng(seed, "ising")
    report = run_ising_pomfq(episodes, config, rng)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "ising.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(ISING_HEADER + "\n")
            for ep, (mse, d) in enumerate(zip(report.mse, report.d_trajectory)):
                fh.write(f"{ep},{mse!r},{d!r}\n")
    return report
