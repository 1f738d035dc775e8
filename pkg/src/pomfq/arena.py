"""Desk-scale grid-battle environments.

Three games share one engine: two-group melee (multibattle), the same
melee with food pickups (gathering), and an asymmetric predator/prey
chase. Agents occupy square footprints on a bounded grid, move within a
speed-scaled 13-cell disc, and attack one of the 8 cells adjacent to
their footprint. Observations are flat feature vectors over the nearest
visible agents, where visibility is either a hard radius or an
independent distance-decayed coin flip per agent.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import ConfigError

N_MOVE_ACTIONS = 13
N_ATTACK_ACTIONS = 8
N_ACTIONS = N_MOVE_ACTIONS + N_ATTACK_ACTIONS

MAX_VISIBLE = 20
FOOD_SLOTS = 8
ATTACK_DAMAGE = 2.0

# clockwise from north
ATTACK_DIRS = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))

# the 13 integer cells inside a disc of radius 2, reading order
_MOVE_TEMPLATE = tuple(
    (dx, dy)
    for dy in range(-2, 3)
    for dx in range(-2, 3)
    if dx * dx + dy * dy <= 4
)


def move_offsets(speed: float) -> np.ndarray:
    """13 move offsets for a given speed: the radius-2 template rescaled."""
    scale = speed / 2.0
    offs = []
    for dx, dy in _MOVE_TEMPLATE:
        sx, sy = dx * scale, dy * scale
        offs.append((int(math.copysign(math.floor(abs(sx) + 0.5), sx)),
                     int(math.copysign(math.floor(abs(sy) + 0.5), sy))))
    return np.array(offs, dtype=int)


@dataclass(frozen=True)
class GroupRewards:
    step: float = 0.0
    attack_miss: float = 0.0
    attack_hit: float = 0.0
    kill: float = 0.0
    food: float = 0.0
    attacked: float = 0.0
    death: float = 0.0


_MULTIBATTLE_REWARDS = GroupRewards(step=-0.005, attack_miss=-0.1,
                                    attack_hit=0.2, kill=200.0)
_GATHERING_REWARDS = GroupRewards(step=-0.005, attack_miss=-0.1,
                                  attack_hit=0.2, kill=5.0, food=80.0)
_PREDATOR_REWARDS = GroupRewards(attack_miss=-0.3, attack_hit=1.0, kill=100.0)
_PREY_REWARDS = GroupRewards(attacked=-1.0, death=-0.5)

GAME_IDS = ("multibattle", "gathering", "predator_prey")


def reward_table(game: str) -> dict[int, GroupRewards]:
    """Constant per-group reward scalars for one game."""
    if game in ("multibattle", "gathering"):
        row = _MULTIBATTLE_REWARDS if game == "multibattle" else _GATHERING_REWARDS
        return {0: row, 1: row}
    if game == "predator_prey":
        return {0: _PREDATOR_REWARDS, 1: _PREY_REWARDS}
    raise ValueError(f"unknown game {game!r}")


@dataclass(frozen=True)
class GameSpec:
    width: int
    height: int
    per_group: tuple[int, int]
    size: tuple[int, int]
    speed: tuple[float, float]
    view_range: tuple[float, float]
    health: tuple[float, float]
    food_count: int


GAME_SPECS = {
    "multibattle": GameSpec(40, 40, (25, 25), (1, 1), (2.0, 2.0), (6.0, 6.0),
                            (10.0, 10.0), 0),
    "gathering": GameSpec(40, 40, (25, 25), (1, 1), (2.0, 2.0), (6.0, 6.0),
                          (10.0, 10.0), 100),
    "predator_prey": GameSpec(45, 45, (20, 40), (2, 1), (2.0, 2.5), (7.0, 6.0),
                              (10.0, 2.0), 0),
}


@dataclass(frozen=True)
class ForModel:
    """Hard-radius visibility; radius=None uses each entity's view range."""

    radius: float | None = None

    def __post_init__(self):
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class PdoModel:
    """Independent visibility coin flips with probability lam * exp(-d * lam)."""

    lam: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lambda must be in (0, 1]")


@dataclass
class Entity:
    id: int
    group: int
    x: int
    y: int
    size: int
    speed: float
    view_range: float
    health: float
    max_health: float
    alive: bool = True
    last_action: int | None = None

    @property
    def center(self) -> tuple[float, float]:
        half = (self.size - 1) / 2.0
        return (self.x + half, self.y + half)

    def cells(self, x: int | None = None, y: int | None = None):
        x = self.x if x is None else x
        y = self.y if y is None else y
        return [(x + i, y + j) for j in range(self.size) for i in range(self.size)]


@dataclass
class Observation:
    """Flat features plus the side data belief updates need."""

    features: np.ndarray
    agent_ids: list[int]
    last_actions: list[int | None]
    distances: np.ndarray


@dataclass
class StepResult:
    rewards: dict[int, float]
    done: bool
    deaths: list[tuple[int, tuple[int, ...]]]


_SLOT_WIDTH = 4 + N_ACTIONS
_SELF_WIDTH = 5


def obs_dim(game: str) -> int:
    base = _SELF_WIDTH + MAX_VISIBLE * _SLOT_WIDTH
    return base + 2 * FOOD_SLOTS if game == "gathering" else base


class ArenaState:
    """Mutable world state for one game instance.

    step() mutates in place and returns the step outcome; the internal
    generator only drives move ordering, so everything else is a pure
    function of (state, actions).
    """

    def __init__(self, game: str, width: int, height: int, entities,
                 food, max_steps: int, rng: np.random.Generator,
                 record_events: bool = False):
        self.game = game
        self.width = width
        self.height = height
        self.entities = list(entities)
        self.food = set(food)
        self.max_steps = max_steps
        self.step_count = 0
        self.rng = rng
        self.rewards_cfg = reward_table(game)
        self.record_events = record_events
        self.events: list[tuple[int, int, str, float]] = []
        self.occupancy = np.full((height, width), -1, dtype=np.int32)
        for e in self.entities:
            if e.alive:
                for cx, cy in e.cells():
                    if self.occupancy[cy, cx] != -1:
                        raise ConfigError("overlapping initial placement")
                    self.occupancy[cy, cx] = e.id
        self._move_tables = {e.id: move_offsets(e.speed) for e in self.entities}

    def alive_ids(self) -> list[int]:
        return [e.id for e in self.entities if e.alive]

    def group_alive_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for e in self.entities:
            counts.setdefault(e.group, 0)
            if e.alive:
                counts[e.group] += 1
        return counts

    def _in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def _can_place(self, ent: Entity, x: int, y: int) -> bool:
        if x < 0 or y < 0 or x + ent.size > self.width or y + ent.size > self.height:
            return False
        for cx, cy in ent.cells(x, y):
            occ = self.occupancy[cy, cx]
            if occ != -1 and occ != ent.id:
                return False
        return True

    def _attack_cell(self, ent: Entity, direction) -> tuple[int, int]:
        # nearest cell outside the footprint along the direction
        cx, cy = ent.center
        reach = (ent.size + 1) / 2.0
        return (math.floor(cx + direction[0] * reach),
                math.floor(cy + direction[1] * reach))

    def step(self, actions: dict[int, int]) -> StepResult:
        """Resolve one simultaneous step.

        Order: attacks against pre-step occupancy, then deaths and kill
        credit, then moves in a seeded-random order (blocked moves are
        no-ops), then food pickups on entry, then per-step rewards.
        """
        alive = set(self.alive_ids())
        for j, a in actions.items():
            if j not in alive:
                raise ValueError(f"agent {j} is not alive")
            if not 0 <= a < N_ACTIONS:
                raise ValueError(f"invalid action {a} for agent {j}")

        events: list[tuple[int, str, float]] = []
        damage: dict[int, float] = {}
        hitters: dict[int, list[int]] = {}

        for j in sorted(actions):
            a = actions[j]
            ent = self.entities[j]
            ent.last_action = a
            if a < N_MOVE_ACTIONS:
                continue
            tx, ty = self._attack_cell(ent, ATTACK_DIRS[a - N_MOVE_ACTIONS])
            occ = self.occupancy[ty, tx] if self._in_bounds(tx, ty) else -1
            if occ == -1:
                events.append((j, "attack_miss",
                               self.rewards_cfg[ent.group].attack_miss))
                continue
            victim = self.entities[occ]
            damage[victim.id] = damage.get(victim.id, 0.0) + ATTACK_DAMAGE
            hitters.setdefault(victim.id, []).append(j)
            if victim.group != ent.group:
                events.append((j, "attack_hit",
                               self.rewards_cfg[ent.group].attack_hit))
                events.append((victim.id, "attacked",
                               self.rewards_cfg[victim.group].attacked))

        deaths: list[tuple[int, tuple[int, ...]]] = []
        for vid in sorted(damage):
            victim = self.entities[vid]
            victim.health -= damage[vid]
            if victim.health > 0:
                continue
            victim.health = 0.0
            victim.alive = False
            for cx, cy in victim.cells():
                self.occupancy[cy, cx] = -1
            events.append((vid, "death", self.rewards_cfg[victim.group].death))
            enemy_killers = tuple(k for k in hitters[vid]
                                  if self.entities[k].group != victim.group)
            deaths.append((vid, enemy_killers))
            if enemy_killers:
                for k in enemy_killers:
                    share = self.rewards_cfg[self.entities[k].group].kill
                    events.append((k, "kill", share / len(enemy_killers)))

        movers = [j for j in sorted(actions)
                  if actions[j] < N_MOVE_ACTIONS and self.entities[j].alive]
        if movers:
            order = self.rng.permutation(len(movers))
            for idx in order:
                j = movers[idx]
                ent = self.entities[j]
                dx, dy = self._move_tables[j][actions[j]]
                if dx == 0 and dy == 0:
                    continue
                nx, ny = ent.x + int(dx), ent.y + int(dy)
                if not self._can_place(ent, nx, ny):
                    continue
                for cx, cy in ent.cells():
                    self.occupancy[cy, cx] = -1
                ent.x, ent.y = nx, ny
                for cx, cy in ent.cells():
                    self.occupancy[cy, cx] = ent.id
                if self.food:
                    for cell in ent.cells():
                        if cell in self.food:
                            self.food.discard(cell)
                            events.append((j, "food",
                                           self.rewards_cfg[ent.group].food))

        for j in sorted(actions):
            penalty = self.rewards_cfg[self.entities[j].group].step
            if penalty != 0.0:
                events.append((j, "step", penalty))

        rewards: dict[int, float] = {j: 0.0 for j in actions}
        for agent, _, value in events:
            if value != 0.0:
                rewards[agent] = rewards.get(agent, 0.0) + value
        if self.record_events:
            self.events.extend((self.step_count, agent, kind, value)
                               for agent, kind, value in events)

        self.step_count += 1
        counts = self.group_alive_counts()
        done = any(c == 0 for c in counts.values()) or self.step_count >= self.max_steps
        return StepResult(rewards, done, deaths)

    def check_invariants(self) -> None:
        """Exhaustive occupancy and health audit; raises on violation."""
        rebuilt = np.full((self.height, self.width), -1, dtype=np.int32)
        for e in self.entities:
            if not 0.0 <= e.health <= e.max_health:
                raise AssertionError(f"agent {e.id} health out of range")
            if not e.alive:
                continue
            for cx, cy in e.cells():
                if not self._in_bounds(cx, cy):
                    raise AssertionError(f"agent {e.id} out of bounds")
                if rebuilt[cy, cx] != -1:
                    raise AssertionError(f"overlap at {(cx, cy)}")
                rebuilt[cy, cx] = e.id
        if not np.array_equal(rebuilt, self.occupancy):
            raise AssertionError("occupancy map out of sync")


def make_game(game: str, agents_per_group: int | None = None,
              width: int | None = None, height: int | None = None,
              seed: int = 0, max_steps: int = 500,
              food_count: int | None = None,
              record_events: bool = False) -> ArenaState:
    """Build a fresh game with seeded random placement.

    Groups spawn uniformly at random in disjoint map halves; group 0 on
    the left, group 1 on the right. The predator/prey game keeps its 1:2
    population ratio when agents_per_group overrides the default.
    """
    if game not in GAME_SPECS:
        raise ConfigError(f"unknown game {game!r}")
    spec = GAME_SPECS[game]
    width = spec.width if width is None else width
    height = spec.height if height is None else height
    if agents_per_group is None:
        counts = spec.per_group
    elif game == "predator_prey":
        counts = (agents_per_group, 2 * agents_per_group)
    else:
        counts = (agents_per_group, agents_per_group)
    food_count = spec.food_count if food_count is None else food_count

    rng = np.random.Generator(np.random.PCG64(seed))
    entities = []
    occupied: set[tuple[int, int]] = set()
    half = width // 2
    next_id = 0
    for group in (0, 1):
        size = spec.size[group]
        x_lo, x_hi = (0, half - size) if group == 0 else (half, width - size)
        if x_hi < x_lo or height - size < 0:
            raise ConfigError("map too small for entity placement")
        for _ in range(counts[group]):
            placed = False
            for _ in range(10000):
                x = int(rng.integers(x_lo, x_hi + 1))
                y = int(rng.integers(0, height - size + 1))
                cells = [(x + i, y + j) for j in range(size) for i in range(size)]
                if all(c not in occupied for c in cells):
                    occupied.update(cells)
                    placed = True
                    break
            if not placed:
                raise ConfigError("could not place agents without overlap")
            entities.append(Entity(next_id, group, x, y, size, spec.speed[group],
                                   spec.view_range[group], spec.health[group],
                                   spec.health[group]))
            next_id += 1

    food: set[tuple[int, int]] = set()
    attempts = 0
    while len(food) < food_count:
        attempts += 1
        if attempts > 100 * food_count + 1000:
            raise ConfigError("could not scatter food on free cells")
        cell = (int(rng.integers(0, width)), int(rng.integers(0, height)))
        if cell not in occupied and cell not in food:
            food.add(cell)

    return ArenaState(game, width, height, entities, food, max_steps, rng,
                      record_events)


def _assemble(state: ArenaState, me: Entity, visible: list[Entity],
              dists: np.ndarray) -> Observation:
    """Feature layout shared by the single-agent and batched paths.

    Self block, then up to 20 agent slots of (dx, dy, health fraction,
    same-group flag, last-action one-hot), then for the gathering game
    the offsets of the 8 nearest food items; everything else zero.
    """
    w, h = float(state.width), float(state.height)
    mx, my = me.center
    features = np.zeros(obs_dim(state.game))
    features[0] = mx / w
    features[1] = my / h
    features[2] = me.size / w
    features[3] = me.health / me.max_health
    features[4] = float(me.group)

    k = len(visible)
    if k:
        slots = features[_SELF_WIDTH:_SELF_WIDTH + MAX_VISIBLE * _SLOT_WIDTH]
        slots = slots.reshape(MAX_VISIBLE, _SLOT_WIDTH)
        centers = np.array([e.center for e in visible])
        slots[:k, 0] = (centers[:, 0] - mx) / w
        slots[:k, 1] = (centers[:, 1] - my) / h
        slots[:k, 2] = [e.health / e.max_health for e in visible]
        slots[:k, 3] = [1.0 if e.group == me.group else 0.0 for e in visible]
        for slot, e in enumerate(visible):
            if e.last_action is not None:
                slots[slot, 4 + e.last_action] = 1.0

    if state.game == "gathering" and state.food:
        base = _SELF_WIDTH + MAX_VISIBLE * _SLOT_WIDTH
        food = sorted(state.food,
                      key=lambda c: (math.hypot(c[0] - mx, c[1] - my), c))
        for slot, (fx, fy) in enumerate(food[:FOOD_SLOTS]):
            features[base + 2 * slot] = (fx - mx) / w
            features[base + 2 * slot + 1] = (fy - my) / h

    return Observation(features, [e.id for e in visible],
                       [e.last_action for e in visible], dists)


def observe(state: ArenaState, agent_id: int, model,
            rng: np.random.Generator) -> Observation:
    """One agent's view of the world under the given visibility model.

    At most the 20 nearest qualifying agents fill the slots, sorted by
    distance (ties by id).
    """
    me = state.entities[agent_id]
    if not me.alive:
        raise RuntimeError(f"agent {agent_id} is dead")
    mx, my = me.center

    others = [e for e in state.entities if e.alive and e.id != agent_id]
    dists = np.array([math.hypot(e.center[0] - mx, e.center[1] - my)
                      for e in others])
    if isinstance(model, ForModel):
        radius = model.radius if model.radius is not None else me.view_range
        mask = dists <= radius
    elif isinstance(model, PdoModel):
        probs = model.lam * np.exp(-dists * model.lam)
        mask = rng.random(len(others)) < probs if others else np.zeros(0, bool)
    else:
        raise TypeError(f"unknown observation model {model!r}")

    visible = [(dists[i], others[i].id, others[i]) for i in np.nonzero(mask)[0]]
    visible.sort(key=lambda item: (item[0], item[1]))
    visible = visible[:MAX_VISIBLE]
    return _assemble(state, me, [v[2] for v in visible],
                     np.array([v[0] for v in visible]))


def observe_all(state: ArenaState, model,
                rng: np.random.Generator) -> dict[int, Observation]:
    """Observations for every live agent with one shared distance pass.

    Matches observe() slot for slot; the stochastic visibility model draws
    one uniform matrix per step (agents in id order) instead of one vector
    per agent.
    """
    ids = state.alive_ids()
    if not ids:
        return {}
    ents = [state.entities[j] for j in ids]
    centers = np.array([e.center for e in ents])
    diff = centers[None, :, :] - centers[:, None, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    if isinstance(model, ForModel):
        if model.radius is not None:
            radii = np.full(len(ids), model.radius)
        else:
            radii = np.array([e.view_range for e in ents])
        mask = dist <= radii[:, None]
    elif isinstance(model, PdoModel):
        probs = model.lam * np.exp(-dist * model.lam)
        mask = rng.random(dist.shape) < probs
    else:
        raise TypeError(f"unknown observation model {model!r}")
    np.fill_diagonal(mask, False)

    out = {}
    for i, agent_id in enumerate(ids):
        vis = np.nonzero(mask[i])[0]
        d = dist[i, vis]
        order = np.lexsort((vis, d))[:MAX_VISIBLE]
        sel = vis[order]
        out[agent_id] = _assemble(state, ents[i], [ents[s] for s in sel],
                                  d[order])
    return out


def write_event_log(events, path) -> None:
    """Line-delimited event records: step, agent, kind, value."""
    with open(path, "w", encoding="utf-8") as fh:
        for step, agent, kind, value in events:
            fh.write(f"{step}\t{agent}\t{kind}\t{value!r}\n")
