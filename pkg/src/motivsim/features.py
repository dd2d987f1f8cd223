"""Linear state encoding.

Layout of the vector, for ``n`` stations on a ``width x height`` grid::

    [ |drive|, min_dist, up, down, left, right,
      see_1 .. see_n, y_0 .. y_{height-1}, x_0 .. x_{width-1} ]

which is 50 entries for the default 20x20 grid with four stations.
Direction bits point at the closest cell of the nearest station; a bit
pair is all-zero when the agent is aligned with that cell on the axis.
"""

from __future__ import annotations

import numpy as np

from .env import AgentState, GridConfig, station_distance

# Index of the first entry in each block.
DRIVE, MIN_DIST, UP, DOWN, LEFT, RIGHT, SEE = range(7)


def feature_size(config: GridConfig) -> int:
    return SEE + len(config.stations) + config.height + config.width


def y_offset(config: GridConfig) -> int:
    return SEE + len(config.stations)


def x_offset(config: GridConfig) -> int:
    return y_offset(config) + config.height


def encode(state: AgentState, drive: float, config: GridConfig,
           signed_drive: bool = False) -> np.ndarray:
    f = np.zeros(feature_size(config))
    f[DRIVE] = drive if signed_drive else abs(drive)

    best, cell = np.inf, (state.x, state.y)
    for k, s in enumerate(config.stations):
        d, c = station_distance(state.x, state.y, s)
        if d <= config.detection_range:
            f[SEE + k] = 1.0
        if d < best:
            best, cell = d, c
    f[MIN_DIST] = best

    cx, cy = cell
    f[UP] = cy < state.y
    f[DOWN] = cy > state.y
    f[LEFT] = cx < state.x
    f[RIGHT] = cx > state.x

    f[y_offset(config) + state.y] = 1.0
    f[x_offset(config) + state.x] = 1.0
    return f


def position_table(config: GridConfig) -> np.ndarray:
    """Energy-independent entries ``f[1:SEE+n]`` for every cell.

    Shape ``(height, width, SEE - 1 + n)``; the drive entry and the one-hot
    blocks are cheap enough to fill in per step.
    """
    n = SEE - 1 + len(config.stations)
    table = np.empty((config.height, config.width, n))
    for y in range(config.height):
        for x in range(config.width):
            table[y, x] = encode(AgentState(x, y, 0.0), 0.0, config)[1:SEE + len(config.stations)]
    return table
