"""Compiled single-episode loop used by training and testing.

Mirrors ``env.step`` + ``features.encode`` + ``learner.choose`` +
``learner.td_update`` step for step.  Randomness arrives pre-drawn (``u`` and
``r``, one entry per step) so the compiled and reference paths consume the
same stream.  Features are never materialised: the energy-independent part
comes from ``features.position_table`` and the one-hot blocks are indexed
directly.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .env import ENERGY_EPS

_DX = np.array([0, 0, 0, -1, 1], dtype=np.int64)
_DY = np.array([0, -1, 1, 0, 0], dtype=np.int64)


@njit(cache=True)
def _q(w, a, f0, row, yi, xi):
    s = w[a, 0] * f0
    for k in range(row.shape[0]):
        s += w[a, 1 + k] * row[k]
    return s + w[a, yi] + w[a, xi]


@njit(cache=True)
def _argmax_q(w, f0, row, yi, xi):
    best_a = 0
    best = _q(w, 0, f0, row, yi, xi)
    for a in range(1, w.shape[0]):
        v = _q(w, a, f0, row, yi, xi)
        if v > best:
            best_a, best = a, v
    return best_a, best


@njit(cache=True)
def _reward(d, k, pleasure, use_pleasure, overshoot_gain):
    if abs(d) < 1.0:
        r = 1.0
    elif d < 0.0:
        r = d
    else:
        r = -overshoot_gain * d
    if use_pleasure and k >= 0:
        r += pleasure[k]
    return r


@njit(cache=True)
def run_episode(w, table, contact, recharge, pleasure, use_pleasure,
                x, y, energy, decay, battery_max, homeostasis, overshoot_gain,
                signed_drive, learn, alpha, gamma, epsilon, u, r, max_steps,
                y_off, x_off, visits, station_steps, record,
                rec_drive, rec_x, rec_y, rec_contact):
    """Run one episode in place; returns ``(steps, total_reward, died)``.

    ``w`` is updated in place when ``learn`` is set.  ``visits`` and
    ``station_steps`` (last slot = off-station) are accumulated.  With
    ``record`` set, the post-step drive, position and station index are
    written to the ``rec_*`` arrays.
    """
    height, width = contact.shape
    d = energy - homeostasis
    f0 = d if signed_drive else abs(d)
    total = 0.0
    steps = 0
    died = False
    for t in range(max_steps):
        row = table[y, x]
        yi = y_off + y
        xi = x_off + x
        if u[t] < epsilon:
            a = r[t]
        else:
            a, _ = _argmax_q(w, f0, row, yi, xi)

        nx = min(max(x + _DX[a], 0), width - 1)
        ny = min(max(y + _DY[a], 0), height - 1)
        k = contact[ny, nx]
        e = energy - decay
        if k >= 0:
            e += recharge[k]
        if e < ENERGY_EPS:
            e = 0.0
        elif e > battery_max:
            e = battery_max
        died = e <= 0.0

        nd = e - homeostasis
        rew = _reward(nd, k, pleasure, use_pleasure, overshoot_gain)
        nf0 = nd if signed_drive else abs(nd)
        nrow = table[ny, nx]
        nyi = y_off + ny
        nxi = x_off + nx

        if learn:
            target = rew
            if not died:
                _, qn = _argmax_q(w, nf0, nrow, nyi, nxi)
                target = rew + gamma * qn
            step_size = alpha * (target - _q(w, a, f0, row, yi, xi))
            w[a, 0] += step_size * f0
            for j in range(row.shape[0]):
                w[a, 1 + j] += step_size * row[j]
            w[a, yi] += step_size
            w[a, xi] += step_size

        visits[ny, nx] += 1
        if k >= 0:
            station_steps[k] += 1
        else:
            station_steps[station_steps.shape[0] - 1] += 1
        if record:
            rec_drive[t] = nd
            rec_x[t] = nx
            rec_y[t] = ny
            rec_contact[t] = k

        total += rew
        steps = t + 1
        x, y, energy, d, f0 = nx, ny, e, nd, nf0
        if died:
            break
    return steps, total, died
