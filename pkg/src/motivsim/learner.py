"""Semi-gradient Q-learning on a linear action-value model.

A weight table is a plain ``(n_actions, n_features)`` float array; row ``a``
holds the weights of ``q(s, a) = w[a] . f(s)``.  These functions are the
reference implementation; :mod:`motivsim._kernel` runs the same arithmetic
compiled for the long training loops.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .env import Action, ConfigError, N_ACTIONS

ACTION_NAMES = ("Stop", "Up", "Down", "Left", "Right")


class DivergenceError(RuntimeError):
    """Weights or TD targets stopped being finite."""


@dataclass(frozen=True)
class Hyperparameters:
    alpha: float = 1e-4
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    epsilon_decay_horizon: int = 25_000
    init_low: float = 0.001
    init_high: float = 0.009

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha must be > 0")
        if not 0 <= self.gamma <= 1:
            raise ConfigError("gamma must lie in [0, 1]")
        if not 0 <= self.epsilon_end <= self.epsilon_start <= 1:
            raise ConfigError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if self.epsilon_decay_horizon < 1:
            raise ConfigError("epsilon_decay_horizon must be >= 1")


def init_weights(rng: np.random.Generator, n_features: int = 50,
                 hp: Hyperparameters = Hyperparameters()) -> np.ndarray:
    return rng.uniform(hp.init_low, hp.init_high, size=(N_ACTIONS, n_features))


def _check_dims(w: np.ndarray, f: np.ndarray) -> None:
    if w.ndim != 2 or f.ndim != 1 or w.shape[1] != f.shape[0]:
        raise ValueError(f"weight table {w.shape} does not match features {f.shape}")


def q_value(w: np.ndarray, f: np.ndarray, a: Action) -> float:
    _check_dims(w, f)
    return float(w[int(a)] @ f)


def q_values(w: np.ndarray, f: np.ndarray) -> np.ndarray:
    _check_dims(w, f)
    return w @ f


def greedy(w: np.ndarray, f: np.ndarray) -> Action:
    # np.argmax returns the first maximiser, i.e. the canonical tie-break.
    return Action(int(np.argmax(q_values(w, f))))


def choose(w: np.ndarray, f: np.ndarray, epsilon: float, u: float, r: int) -> Action:
    """Epsilon-greedy decision from pre-drawn randomness.

    ``u`` is uniform on [0, 1) and ``r`` uniform over action indices; the
    random action is taken iff ``u < epsilon``.
    """
    if u < epsilon:
        return Action(int(r))
    return greedy(w, f)


def select_action(w: np.ndarray, f: np.ndarray, epsilon: float,
                  rng: np.random.Generator) -> Action:
    u = rng.random()
    r = rng.integers(N_ACTIONS)
    return choose(w, f, epsilon, u, r)


def td_target(w: np.ndarray, reward: float, f_next: np.ndarray, terminated: bool,
              hp: Hyperparameters) -> float:
    if terminated:
        return reward
    return reward + hp.gamma * float(np.max(q_values(w, f_next)))


def td_update(w: np.ndarray, f: np.ndarray, a: Action, reward: float, f_next: np.ndarray,
              terminated: bool, hp: Hyperparameters) -> np.ndarray:
    """One semi-gradient step; returns a new table, ``w`` is left untouched.

    The gradient of a linear ``q`` with respect to ``w[a]`` is ``f``, so
    only row ``a`` moves.
    """
    _check_dims(w, f_next)
    target = td_target(w, reward, f_next, terminated, hp)
    if not np.isfinite(target):
        raise DivergenceError(f"non-finite TD target {target}")
    delta = target - q_value(w, f, a)
    out = w.copy()
    out[int(a)] += hp.alpha * delta * f
    if not np.all(np.isfinite(out[int(a)])):
        raise DivergenceError("non-finite weights after TD update")
    return out


def epsilon_at(episode: int, hp: Hyperparameters) -> float:
    if episode < 0:
        raise ValueError("episode must be >= 0")
    frac = min(episode / hp.epsilon_decay_horizon, 1.0)
    return hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * frac


# --- CSV round trip --------------------------------------------------------

WEIGHTS_HEADER = ("action", "feature_index", "weight")


def weights_to_csv(w: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(WEIGHTS_HEADER)
    for a in range(w.shape[0]):
        for i in range(w.shape[1]):
            # repr keeps the float exactly round-trippable
            writer.writerow((ACTION_NAMES[a], i, repr(float(w[a, i]))))
    return buf.getvalue()


def weights_from_csv(text: str) -> np.ndarray:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != WEIGHTS_HEADER:
        raise ConfigError(f"bad weights header {header}")
    try:
        rows = [(ACTION_NAMES.index(a), int(i), float(v)) for a, i, v in reader]
    except ValueError as exc:
        raise ConfigError(f"malformed weights row: {exc}") from exc
    if not rows:
        raise ConfigError("weights file holds no rows")
    n_features = max(i for _, i, _ in rows) + 1
    w = np.full((N_ACTIONS, n_features), np.nan)
    for a, i, v in rows:
        w[a, i] = v
    if not np.all(np.isfinite(w)):
        raise ConfigError("weights file is incomplete or holds non-finite values")
    return w


def save_weights(w: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(weights_to_csv(w))


def load_weights(path: str | Path) -> np.ndarray:
    return weights_from_csv(Path(path).read_text())
