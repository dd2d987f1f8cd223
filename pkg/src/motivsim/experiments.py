"""The twelve experiment configurations and the train / test protocol."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernel
from .env import (
    DEFAULT_LAYOUT, METABOLISMS, N_ACTIONS, RECHARGE_SCHEMES, AgentState, ConfigError,
    GridConfig, Layout, MetabolismProfile, reset, station_distance, step,
)
from .features import encode, feature_size, position_table, x_offset, y_offset
from .learner import DivergenceError, Hyperparameters, choose, epsilon_at, init_weights, td_update
from .motivation import NeedConfig, RewardModel, drive, reward

log = logging.getLogger(__name__)

# id -> (reward model, metabolism, recharge scheme)
EXPERIMENTS: dict[str, tuple[RewardModel, str, str]] = {}
for _i, (_model, _scheme, _met) in enumerate(
    (m, s, met)
    for m in (RewardModel.M1, RewardModel.M2)
    for s in RECHARGE_SCHEMES
    for met in ("slow", "regular", "fast")
):
    EXPERIMENTS[f"EXP{_i + 1:02d}"] = (_model, _met, _scheme)

_METABOLISM_KEYS = {"slow": 0, "regular": 1, "fast": 2}


@dataclass(frozen=True)
class ExperimentConfig:
    id: str
    reward_model: RewardModel
    metabolism: str
    recharge_scheme: str
    training_episodes: int = 25_000
    max_train_steps: int = 5_000
    test_episodes: int = 50
    max_test_steps: int = 8_000
    seed: int = 0
    # Shared by every experiment so test starts match across the grid.
    suite_seed: int = 0
    alpha: float = 1e-4
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    epsilon_decay_horizon: Optional[int] = None  # None: decay over all training episodes
    homeostasis_level: float = 30.0
    overshoot_gain: float = 0.5
    signed_drive: bool = False
    layout: Layout = field(default=DEFAULT_LAYOUT, compare=False)

    def __post_init__(self):
        expected = EXPERIMENTS.get(self.id)
        if expected is None:
            raise ConfigError(f"unknown experiment id {self.id!r}")
        object.__setattr__(self, "reward_model", RewardModel(self.reward_model))
        if (self.reward_model, self.metabolism, self.recharge_scheme) != expected:
            raise ConfigError(f"{self.id} must be {expected}")
        for name in ("training_episodes", "max_train_steps", "test_episodes", "max_test_steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        self.hyperparameters  # validates
        self.need

    @property
    def hyperparameters(self) -> Hyperparameters:
        return Hyperparameters(
            alpha=self.alpha, gamma=self.gamma,
            epsilon_start=self.epsilon_start, epsilon_end=self.epsilon_end,
            epsilon_decay_horizon=self.epsilon_decay_horizon or self.training_episodes,
        )

    @property
    def need(self) -> NeedConfig:
        return NeedConfig(self.homeostasis_level, self.overshoot_gain)

    @property
    def profile(self) -> MetabolismProfile:
        return METABOLISMS[self.metabolism]

    @property
    def grid(self) -> GridConfig:
        return self.layout.grid(self.recharge_scheme)


OVERRIDABLE = tuple(
    f.name for f in dataclasses.fields(ExperimentConfig)
    if f.name not in ("id", "reward_model", "metabolism", "recharge_scheme", "seed", "layout")
)


def build_config(exp_id: str, seed: int = 0, layout: Layout = DEFAULT_LAYOUT,
                 **overrides) -> ExperimentConfig:
    if exp_id not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment id {exp_id!r}")
    bad = set(overrides) - set(OVERRIDABLE)
    if bad:
        raise ConfigError(f"unknown overrides: {sorted(bad)}")
    model, met, scheme = EXPERIMENTS[exp_id]
    return ExperimentConfig(exp_id, model, met, scheme, seed=seed, layout=layout, **overrides)


@dataclass
class EpisodeLog:
    """One episode.  Per-step arrays are kept for test episodes only.

    ``station_steps`` counts steps ending on each station, off-station last.
    """

    episode: int
    reward: float
    steps: int
    died: bool
    station_steps: np.ndarray
    drives: Optional[np.ndarray] = None
    xs: Optional[np.ndarray] = None
    ys: Optional[np.ndarray] = None
    contacts: Optional[np.ndarray] = None  # station index per step, -1 off-station
    visits: Optional[np.ndarray] = None

    @property
    def mean_drive(self) -> float:
        if self.drives is None or len(self.drives) == 0:
            raise ValueError("episode has no per-step drive record")
        return float(np.mean(self.drives))


@dataclass
class TrainingResult:
    config: ExperimentConfig
    weights: np.ndarray
    logs: list[EpisodeLog]
    visits: np.ndarray  # (height, width), summed over all training steps

    def __iter__(self):
        # allows ``weights, logs = run_training(cfg)``
        return iter((self.weights, self.logs))


@dataclass(frozen=True)
class TestInit:
    x: int
    y: int
    energy: float = 30.0


def seed_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators per consumer, so one never perturbs another."""
    names = ("weights", "resets", "exploration")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: np.random.default_rng(c) for n, c in zip(names, children)}


class _Arena:
    """Arrays the compiled kernel needs for one grid configuration."""

    def __init__(self, config: ExperimentConfig):
        grid = config.grid
        self.grid = grid
        self.n_stations = len(grid.stations)
        self.table = position_table(grid)
        self.contact = grid.contact_grid()
        self.recharge = np.array([s.recharge_rate for s in grid.stations])
        self.pleasure = np.array([s.hedonic_value for s in grid.stations])
        self.use_pleasure = config.reward_model is RewardModel.M2
        self.y_off = y_offset(grid)
        self.x_off = x_offset(grid)

    def run(self, w, config, state, epsilon, u, r, max_steps, learn, visits, record=False):
        station_steps = np.zeros(self.n_stations + 1, dtype=np.int64)
        n = max_steps if record else 1
        drives = np.zeros(n)
        xs = np.zeros(n, dtype=np.int64)
        ys = np.zeros(n, dtype=np.int64)
        contacts = np.zeros(n, dtype=np.int64)
        hp = config.hyperparameters
        steps, total, died = _kernel.run_episode(
            w, self.table, self.contact, self.recharge, self.pleasure, self.use_pleasure,
            state.x, state.y, float(state.energy), config.profile.decay,
            float(self.grid.battery_max), config.homeostasis_level, config.overshoot_gain,
            config.signed_drive, learn, hp.alpha, hp.gamma, float(epsilon), u, r, max_steps,
            self.y_off, self.x_off, visits, station_steps, record, drives, xs, ys, contacts,
        )
        return steps, total, died, station_steps, (drives, xs, ys, contacts)


def _python_episode(w, config, grid, state, epsilon, u, r, max_steps, learn, visits, record):
    """Reference episode built from the public env / learner functions."""
    hp = config.hyperparameters
    need = config.need
    ids = grid.station_ids
    station_steps = np.zeros(len(ids) + 1, dtype=np.int64)
    drives, xs, ys, contacts = [], [], [], []
    f = encode(state, drive(state.energy, need), grid, config.signed_drive)
    total, died, steps = 0.0, False, 0
    for t in range(max_steps):
        a = choose(w, f, epsilon, u[t], r[t])
        out = step(state, a, config.profile, grid)
        d = drive(out.next_state.energy, need)
        rew = reward(config.reward_model, d, out.station_contact, grid.stations, need)
        f_next = encode(out.next_state, d, grid, config.signed_drive)
        if learn:
            w[:] = td_update(w, f, a, rew, f_next, out.terminated, hp)
        k = ids.index(out.station_contact) if out.station_contact else -1
        visits[out.next_state.y, out.next_state.x] += 1
        station_steps[k] += 1  # k == -1 is the off-station slot
        if record:
            drives.append(d)
            xs.append(out.next_state.x)
            ys.append(out.next_state.y)
            contacts.append(k)
        total += rew
        steps = t + 1
        state, f, died = out.next_state, f_next, out.terminated
        if died:
            break
    rec = (np.array(drives), np.array(xs, dtype=np.int64),
           np.array(ys, dtype=np.int64), np.array(contacts, dtype=np.int64))
    return steps, total, died, station_steps, rec


def run_training(config: ExperimentConfig, backend: str = "compiled",
                 log_every: int = 1000) -> TrainingResult:
    """Train from scratch; deterministic given ``config``.

    ``backend="python"`` runs the slow reference path; both backends consume
    the same random streams.
    """
    if backend not in ("compiled", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    grid = config.grid
    hp = config.hyperparameters
    rngs = seed_streams(config.seed)
    w = init_weights(rngs["weights"], feature_size(grid), hp)
    arena = _Arena(config) if backend == "compiled" else None
    visits = np.zeros((grid.height, grid.width), dtype=np.int64)
    logs: list[EpisodeLog] = []
    max_steps = config.max_train_steps

    for ep in range(config.training_episodes):
        state = reset(rngs["resets"], grid)
        eps = epsilon_at(ep, hp)
        u = rngs["exploration"].random(max_steps)
        r = rngs["exploration"].integers(0, N_ACTIONS, max_steps)
        if arena is not None:
            steps, total, died, st, _ = arena.run(w, config, state, eps, u, r, max_steps, True, visits)
        else:
            steps, total, died, st, _ = _python_episode(
                w, config, grid, state, eps, u, r, max_steps, True, visits, False)
        if not np.all(np.isfinite(w)):
            raise DivergenceError(f"{config.id} seed {config.seed}: weights diverged in episode {ep}")
        logs.append(EpisodeLog(ep, float(total), int(steps), bool(died), st))
        if log_every and (ep + 1) % log_every == 0:
            recent = logs[-log_every:]
            log.info("%s seed=%d episode %d eps=%.3f mean steps %.1f mean reward %.1f",
                     config.id, config.seed, ep + 1, eps,
                     np.mean([e.steps for e in recent]), np.mean([e.reward for e in recent]))
    return TrainingResult(config, w, logs, visits)


def qualifying_cells(config: ExperimentConfig, grid: GridConfig) -> list[tuple[int, int]]:
    """Cells from which a homeostatic agent can reach a station before running dry."""
    decay = config.profile.decay
    cells = []
    for y in range(grid.height):
        for x in range(grid.width):
            d = min(station_distance(x, y, s)[0] for s in grid.stations)
            if math.ceil(d) * decay < config.homeostasis_level:
                cells.append((x, y))
    return cells


def reachable_starts(config: ExperimentConfig, grid: Optional[GridConfig] = None,
                     count: Optional[int] = None) -> list[TestInit]:
    grid = grid or config.grid
    count = config.test_episodes if count is None else count
    cells = qualifying_cells(config, grid)
    if count > len(cells):
        raise ConfigError(f"only {len(cells)} qualifying start cells, {count} requested")
    rng = np.random.default_rng([config.suite_seed, _METABOLISM_KEYS[config.metabolism]])
    picks = rng.choice(len(cells), size=count, replace=False)
    return [TestInit(*cells[i], energy=config.homeostasis_level) for i in picks]


def run_test(config: ExperimentConfig, weights: np.ndarray, inits: list[TestInit],
             backend: str = "compiled") -> list[EpisodeLog]:
    """Greedy rollouts with frozen weights, one per start."""
    if not inits:
        raise ValueError("no test starts given")
    grid = config.grid
    if weights.shape != (N_ACTIONS, feature_size(grid)):
        raise ValueError(f"weights {weights.shape} do not fit this grid")
    max_steps = config.max_test_steps
    u = np.ones(max_steps)  # never below epsilon = 0
    r = np.zeros(max_steps, dtype=np.int64)
    arena = _Arena(config) if backend == "compiled" else None
    logs = []
    for i, init in enumerate(inits):
        state = AgentState(init.x, init.y, init.energy)
        state.check(grid)
        w = weights.copy()
        visits = np.zeros((grid.height, grid.width), dtype=np.int64)
        if arena is not None:
            steps, total, died, st, rec = arena.run(w, config, state, 0.0, u, r, max_steps,
                                                    False, visits, record=True)
        else:
            steps, total, died, st, rec = _python_episode(
                w, config, grid, state, 0.0, u, r, max_steps, False, visits, True)
        drives, xs, ys, contacts = (a[:steps] for a in rec)
        logs.append(EpisodeLog(i, float(total), int(steps), bool(died), st,
                               drives=drives, xs=xs, ys=ys, contacts=contacts, visits=visits))
    return logs
