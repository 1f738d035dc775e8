"""Run configuration: flat key/value files with strict key checking."""

import hashlib
from dataclasses import dataclass, fields, replace


class ConfigError(Exception):
    """Invalid configuration; maps to CLI exit code 2."""


MODES = ("for", "pdo")
ALGORITHM_IDS = ("il", "mfq", "pomfq_for", "pomfq_pdo")
BACKENDS = ("neural", "tabular")
_ARENA_GAMES = ("multibattle", "gathering", "predator_prey")

# paper-scale episode budgets per (game, mode); every count is overridable
_EPISODE_DEFAULTS = {
    ("multibattle", "for"): 3000,
    ("multibattle", "pdo"): 2000,
    ("gathering", "for"): 2000,
    ("gathering", "pdo"): 2000,
    ("predator_prey", "for"): 2000,
    ("predator_prey", "pdo"): 2000,
}
_AGENT_DEFAULTS = {"multibattle": 25, "gathering": 25, "predator_prey": 20}
_MAP_DEFAULTS = {"multibattle": (40, 40), "gathering": (40, 40),
                 "predator_prey": (45, 45)}
_FOOD_DEFAULTS = {"multibattle": 0, "gathering": 100, "predator_prey": 0}


@dataclass(frozen=True)
class RunConfig:
    game: str = "multibattle"
    mode: str = "for"
    view_radius: float | None = None      # None: per-entity game default
    visibility_lambda: float = 1.0
    algo_a: str = "pomfq_for"
    algo_b: str = "pomfq_for"
    backend: str = "neural"
    episodes: int | None = None
    max_steps: int = 500
    agents_per_group: int | None = None
    map_width: int | None = None
    map_height: int | None = None
    food_count: int | None = None
    learning_rate: float = 1e-4
    gamma: float = 0.95
    replay_capacity: int = 1024
    batch_size: int = 64
    sample_count: int = 100               # Dirichlet and Gamma draws per refresh
    temperature_initial: float = 1.0
    temperature_final: float = 0.01
    temperature_horizon: int = 0          # 0: use the episode budget
    tau: float = 0.01
    belief_decay: float = 1.0
    updates_per_episode: int = 0          # 0: one minibatch per group agent
    master_seed: int = 1
    replicas: int = 1

    def resolved(self) -> "RunConfig":
        """Fill derived defaults and validate; returns a concrete config."""
        cfg = self
        if cfg.agents_per_group is None:
            cfg = replace(cfg, agents_per_group=_AGENT_DEFAULTS.get(cfg.game))
        if cfg.episodes is None:
            cfg = replace(cfg, episodes=_EPISODE_DEFAULTS.get((cfg.game, cfg.mode)))
        if cfg.map_width is None or cfg.map_height is None:
            w, h = _MAP_DEFAULTS.get(cfg.game, (None, None))
            cfg = replace(cfg,
                          map_width=cfg.map_width if cfg.map_width is not None else w,
                          map_height=cfg.map_height if cfg.map_height is not None else h)
        if cfg.food_count is None:
            cfg = replace(cfg, food_count=_FOOD_DEFAULTS.get(cfg.game))
        if cfg.temperature_horizon == 0:
            cfg = replace(cfg, temperature_horizon=cfg.episodes or 1)
        if cfg.updates_per_episode == 0:
            cfg = replace(cfg, updates_per_episode=cfg.agents_per_group or 1)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.game not in _ARENA_GAMES:
            raise ConfigError(f"game: unknown game {self.game!r}")
        if self.mode not in MODES:
            raise ConfigError(f"observation_mode: must be one of {MODES}")
        for name, algo in (("algorithm_group_a", self.algo_a),
                           ("algorithm_group_b", self.algo_b)):
            if algo not in ALGORITHM_IDS:
                raise ConfigError(f"{name}: unknown algorithm {algo!r}")
            if algo == "pomfq_pdo" and self.mode != "pdo":
                raise ConfigError(f"{name}: pomfq_pdo requires observation_mode=pdo")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend: must be one of {BACKENDS}")
        if self.backend == "tabular":
            raise ConfigError(
                "backend: tabular is only supported by the ising subcommand")
        positive = [
            ("episodes", self.episodes), ("max_steps", self.max_steps),
            ("agents_per_group", self.agents_per_group),
            ("map_width_cells", self.map_width),
            ("map_height_cells", self.map_height),
            ("replay_capacity", self.replay_capacity),
            ("batch_size", self.batch_size), ("sample_count", self.sample_count),
            ("temperature_horizon_episodes", self.temperature_horizon),
            ("updates_per_episode", self.updates_per_episode),
            ("replicas", self.replicas),
        ]
        for name, value in positive:
            if value is None or value < 0 or (value == 0 and name not in
                                              ("episodes", "max_steps")):
                raise ConfigError(f"{name}: must be a positive count")
        if self.view_radius is not None and self.view_radius <= 0:
            raise ConfigError("view_radius_cells: must be positive")
        if not 0.0 < self.visibility_lambda <= 1.0:
            raise ConfigError("visibility_lambda: must be in (0, 1]")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate: must be positive")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("discount_gamma: must be in [0, 1)")
        if self.temperature_initial <= 0 or self.temperature_final <= 0:
            raise ConfigError("temperature: must be positive")
        if self.temperature_final > self.temperature_initial:
            raise ConfigError("temperature_final: must not exceed temperature_initial")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError("soft_update_tau: must be in [0, 1]")
        if not 0.0 < self.belief_decay <= 1.0:
            raise ConfigError("belief_decay: must be in (0, 1]")
        if self.food_count is not None and self.food_count < 0:
            raise ConfigError("food_count: must be nonnegative")
        if self.master_seed < 0:
            raise ConfigError("master_seed: must be nonnegative")


def _parse_optional_float(text: str):
    return None if text.lower() == "none" else float(text)


def _parse_optional_int(text: str):
    return None if text.lower() == "none" else int(text)


# config-file key -> (dataclass field, parser); key names carry units
_KEYS = {
    "game": ("game", str),
    "observation_mode": ("mode", str),
    "view_radius_cells": ("view_radius", _parse_optional_float),
    "visibility_lambda": ("visibility_lambda", float),
    "algorithm_group_a": ("algo_a", str),
    "algorithm_group_b": ("algo_b", str),
    "backend": ("backend", str),
    "episodes": ("episodes", _parse_optional_int),
    "max_steps": ("max_steps", int),
    "agents_per_group": ("agents_per_group", _parse_optional_int),
    "map_width_cells": ("map_width", _parse_optional_int),
    "map_height_cells": ("map_height", _parse_optional_int),
    "food_count": ("food_count", _parse_optional_int),
    "learning_rate": ("learning_rate", float),
    "discount_gamma": ("gamma", float),
    "replay_capacity": ("replay_capacity", int),
    "batch_size": ("batch_size", int),
    "sample_count": ("sample_count", int),
    "temperature_initial": ("temperature_initial", float),
    "temperature_final": ("temperature_final", float),
    "temperature_horizon_episodes": ("temperature_horizon", int),
    "soft_update_tau": ("tau", float),
    "belief_decay": ("belief_decay", float),
    "updates_per_episode": ("updates_per_episode", int),
    "master_seed": ("master_seed", int),
    "replicas": ("replicas", int),
}
_FIELD_TO_KEY = {field_name: key for key, (field_name, _) in _KEYS.items()}


def parse_config_text(text: str) -> RunConfig:
    """Parse 'key = value' lines; unknown keys are hard errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field_name, parser = _KEYS[key]
        if field_name in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[field_name] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def dump_config(cfg: RunConfig) -> str:
    """Canonical key/value text for a config (stable key order)."""
    lines = []
    for f in fields(cfg):
        key = _FIELD_TO_KEY[f.name]
        value = getattr(cfg, f.name)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig, ignore=("episodes",)) -> str:
    """Identity hash used for checkpoint compatibility checks.

    The episode budget is a runtime quantity, not part of the identity, so
    a checkpoint taken after 50 episodes can resume toward 100.
    """
    parts = []
    for f in fields(cfg):
        if f.name in ignore:
            continue
        parts.append(f"{f.name}={getattr(cfg, f.name)}")
    digest = hashlib.blake2b("\n".join(parts).encode("utf-8"), digest_size=16)
    return digest.hexdigest()
