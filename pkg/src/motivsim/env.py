"""Deterministic grid world with recharge stations and a metabolising agent.

Coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row; row 0 is
the top edge, so ``Up`` decrements ``y``.  Stations are axis-aligned
rectangles given by inclusive corners.

Within one step the agent moves, pays its metabolic cost, then collects the
recharge of the station it landed on (if any); the result is clamped to
``[0, battery_max]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

# Residues below this are float noise from repeated 0.1 decrements.
ENERGY_EPS = 1e-9


class ConfigError(ValueError):
    """Invalid grid, station or experiment configuration."""


class InvalidStateError(ValueError):
    """An agent state outside the grid or the battery range."""


class Action(IntEnum):
    # Order doubles as the greedy tie-break order.
    STOP = 0
    UP = 1
    DOWN = 2
    LEFT = 3
    RIGHT = 4


N_ACTIONS = len(Action)

# (dx, dy) per action, indexed by Action value.
MOVES = np.array([(0, 0), (0, -1), (0, 1), (-1, 0), (1, 0)], dtype=np.int64)


@dataclass(frozen=True)
class StationSpec:
    """A rectangular recharge area ``[x0, x1] x [y0, y1]`` (inclusive)."""

    id: str
    x0: int
    y0: int
    x1: int
    y1: int
    recharge_rate: float
    hedonic_value: float = 0.0

    def __post_init__(self):
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ConfigError(f"station {self.id}: empty region")
        if not self.recharge_rate > 0:
            raise ConfigError(f"station {self.id}: recharge_rate must be > 0")
        if self.hedonic_value < 0:
            raise ConfigError(f"station {self.id}: hedonic_value must be >= 0")

    def contains(self, x: int, y: int) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def cells(self) -> list[tuple[int, int]]:
        return [(x, y) for y in range(self.y0, self.y1 + 1) for x in range(self.x0, self.x1 + 1)]


@dataclass(frozen=True)
class GridConfig:
    width: int = 20
    height: int = 20
    stations: tuple[StationSpec, ...] = ()
    detection_range: float = 6.0
    battery_max: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        if self.width < 2 or self.height < 2:
            raise ConfigError("grid must be at least 2x2")
        if not self.stations:
            raise ConfigError("at least one station is required")
        if not self.detection_range > 0:
            raise ConfigError("detection_range must be > 0")
        if not self.battery_max > 0:
            raise ConfigError("battery_max must be > 0")
        ids = [s.id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate station ids: {ids}")
        if ids != sorted(ids):
            raise ConfigError(f"stations must be listed in id order, got {ids}")
        seen: set[tuple[int, int]] = set()
        for s in self.stations:
            if s.x0 < 0 or s.y0 < 0 or s.x1 >= self.width or s.y1 >= self.height:
                raise ConfigError(f"station {s.id} leaves the grid")
            cells = set(s.cells())
            if cells & seen:
                raise ConfigError(f"station {s.id} overlaps another station")
            seen |= cells

    @property
    def station_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.stations)

    def station(self, station_id: str) -> StationSpec:
        for s in self.stations:
            if s.id == station_id:
                return s
        raise ConfigError(f"unknown station id {station_id!r}")

    def station_at(self, x: int, y: int) -> Optional[StationSpec]:
        for s in self.stations:
            if s.contains(x, y):
                return s
        return None

    def contact_grid(self) -> np.ndarray:
        """``(height, width)`` array of station indices, -1 off-station."""
        grid = np.full((self.height, self.width), -1, dtype=np.int64)
        for k, s in enumerate(self.stations):
            grid[s.y0:s.y1 + 1, s.x0:s.x1 + 1] = k
        return grid


@dataclass(frozen=True)
class MetabolismProfile:
    name: str
    decay: float

    def __post_init__(self):
        if not self.decay > 0:
            raise ConfigError("metabolic decay must be > 0")


METABOLISMS = {
    "slow": MetabolismProfile("slow", 0.1),
    "regular": MetabolismProfile("regular", 1.0),
    "fast": MetabolismProfile("fast", 3.0),
}


@dataclass(frozen=True)
class AgentState:
    x: int
    y: int
    energy: float

    def check(self, config: GridConfig) -> None:
        if not (0 <= self.x < config.width and 0 <= self.y < config.height):
            raise InvalidStateError(f"position ({self.x}, {self.y}) outside the grid")
        if not (0.0 <= self.energy <= config.battery_max):
            raise InvalidStateError(f"energy {self.energy} outside [0, {config.battery_max}]")


@dataclass(frozen=True)
class StepOutcome:
    next_state: AgentState
    station_contact: Optional[str]
    terminated: bool


def clamp_energy(energy: float, battery_max: float) -> float:
    if energy < ENERGY_EPS:
        return 0.0
    return min(energy, battery_max)


def step(state: AgentState, action: Action, metabolism: MetabolismProfile,
         config: GridConfig) -> StepOutcome:
    state.check(config)
    dx, dy = MOVES[int(action)]
    x = min(max(state.x + int(dx), 0), config.width - 1)
    y = min(max(state.y + int(dy), 0), config.height - 1)
    station = config.station_at(x, y)
    energy = state.energy - metabolism.decay
    if station is not None:
        energy += station.recharge_rate
    energy = clamp_energy(energy, config.battery_max)
    return StepOutcome(
        next_state=AgentState(x, y, energy),
        station_contact=station.id if station is not None else None,
        terminated=energy <= 0.0,
    )


def reset(rng: np.random.Generator, config: GridConfig) -> AgentState:
    """Uniform start energy in ``[0, battery_max]`` and a uniform cell."""
    energy = float(rng.uniform(0.0, config.battery_max))
    x = int(rng.integers(0, config.width))
    y = int(rng.integers(0, config.height))
    return AgentState(x, y, energy)


def station_distance(x: int, y: int, station: StationSpec) -> tuple[float, tuple[int, int]]:
    """Euclidean distance to the closest cell of ``station`` and that cell."""
    cx = min(max(x, station.x0), station.x1)
    cy = min(max(y, station.y0), station.y1)
    return math.hypot(cx - x, cy - y), (cx, cy)


def nearest_station(state: AgentState, config: GridConfig) -> tuple[str, float]:
    """Closest station and its distance; ties go to the earlier id."""
    best_id, best = config.stations[0].id, math.inf
    for s in config.stations:
        d, _ = station_distance(state.x, state.y, s)
        if d < best:
            best_id, best = s.id, d
    return best_id, best


# --- layouts --------------------------------------------------------------

RECHARGE_SCHEMES = ("same", "different")


@dataclass(frozen=True)
class StationLayout:
    id: str
    x0: int
    y0: int
    x1: int
    y1: int
    recharge_same: float
    recharge_diff: float
    pleasure: float


@dataclass(frozen=True)
class Layout:
    """A station layout carrying both recharge schemes; see :meth:`grid`."""

    width: int = 20
    height: int = 20
    detection_range: float = 6.0
    battery_max: float = 50.0
    stations: tuple[StationLayout, ...] = field(default_factory=tuple)

    def grid(self, scheme: str) -> GridConfig:
        if scheme not in RECHARGE_SCHEMES:
            raise ConfigError(f"unknown recharge scheme {scheme!r}")
        specs = [
            StationSpec(
                id=s.id, x0=s.x0, y0=s.y0, x1=s.x1, y1=s.y1,
                recharge_rate=s.recharge_same if scheme == "same" else s.recharge_diff,
                hedonic_value=s.pleasure,
            )
            for s in self.stations
        ]
        return GridConfig(self.width, self.height, tuple(specs),
                          self.detection_range, self.battery_max)

    def validate(self) -> None:
        for scheme in RECHARGE_SCHEMES:
            self.grid(scheme)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "detection_range": self.detection_range,
            "battery_max": self.battery_max,
            "stations": [vars(s).copy() for s in self.stations],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Layout":
        if not isinstance(doc, dict):
            raise ConfigError("layout document must be a JSON object")
        try:
            stations = tuple(
                StationLayout(
                    id=str(s["id"]),
                    x0=int(s["x0"]), y0=int(s["y0"]), x1=int(s["x1"]), y1=int(s["y1"]),
                    recharge_same=float(s["recharge_same"]),
                    recharge_diff=float(s["recharge_diff"]),
                    pleasure=float(s["pleasure"]),
                )
                for s in doc["stations"]
            )
            layout = cls(
                width=int(doc.get("width", 20)),
                height=int(doc.get("height", 20)),
                detection_range=float(doc.get("detection_range", 6.0)),
                battery_max=float(doc.get("battery_max", 50.0)),
                stations=stations,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed layout: {exc!r}") from exc
        layout.validate()
        return layout


def load_layout(path: str | Path) -> Layout:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read layout {path}: {exc}") from exc
    return Layout.from_dict(doc)


def _default_stations() -> Iterable[StationLayout]:
    # Four 2x2 blocks near the corners; override with a layout JSON.
    rows = [
        ("A", 2, 15, 3, 16, 3.0, 1.0, 3.0),
        ("B", 16, 15, 17, 16, 3.0, 4.0, 2.0),
        ("C", 2, 3, 3, 4, 3.0, 3.0, 4.0),
        ("D", 16, 3, 17, 4, 3.0, 2.0, 1.0),
    ]
    return (StationLayout(*r) for r in rows)


DEFAULT_LAYOUT = Layout(stations=tuple(_default_stations()))
