"""Survival drive and the two reward signals.

``reward_m1`` rewards staying at the energy setpoint and punishes deviation,
undershoot at full weight and overshoot at ``overshoot_gain``.  ``reward_m2``
adds the fixed pleasure of the station the agent is standing on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .env import ConfigError, StationSpec


class RewardModel(str, Enum):
    M1 = "M1"  # drive reduction only
    M2 = "M2"  # drive reduction plus station pleasure


@dataclass(frozen=True)
class NeedConfig:
    homeostasis_level: float = 30.0
    overshoot_gain: float = 0.5

    def __post_init__(self):
        if not self.homeostasis_level > 0:
            raise ConfigError("homeostasis_level must be > 0")
        if not 0 < self.overshoot_gain <= 1:
            raise ConfigError("overshoot_gain must lie in (0, 1]")


def drive(energy: float, need: NeedConfig = NeedConfig()) -> float:
    """Signed deviation from the setpoint; negative means hungry."""
    return energy - need.homeostasis_level


def reward_m1(d: float, need: NeedConfig = NeedConfig()) -> float:
    # The bonus band |d| < 1 wins over the d < 0 branch.
    if math.trunc(d) == 0:
        return 1.0
    if d < 0:
        return d
    return -need.overshoot_gain * d


def reward_m2(d: float, station_contact: Optional[str], stations: Sequence[StationSpec],
              need: NeedConfig = NeedConfig()) -> float:
    r = reward_m1(d, need)
    if station_contact is None:
        return r
    for s in stations:
        if s.id == station_contact:
            return r + s.hedonic_value
    raise ConfigError(f"unknown station id {station_contact!r}")


def reward(model: RewardModel, d: float, station_contact: Optional[str],
           stations: Sequence[StationSpec], need: NeedConfig = NeedConfig()) -> float:
    if RewardModel(model) is RewardModel.M1:
        return reward_m1(d, need)
    return reward_m2(d, station_contact, stations, need)
