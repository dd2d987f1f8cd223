"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code; each oracle re-derives
its answer by brute force or plain loops.
"""

import math


def station_cells(x0, y0, x1, y1):
    return [(x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)]


def brute_distances(x, y, stations):
    """{id: (min distance, closest cells)} scanning every station cell."""
    out = {}
    for sid, cells in stations.items():
        ds = [(math.sqrt((cx - x) ** 2 + (cy - y) ** 2), (cx, cy)) for cx, cy in cells]
        best = min(d for d, _ in ds)
        out[sid] = (best, [c for d, c in ds if d == best])
    return out


def naive_dot(a, b):
    s = 0.0
    for u, v in zip(a, b):
        s += u * v
    return s


def two_pass_stats(values):
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def tabular_q_learning(q, transitions, alpha, gamma):
    """Replay ``(s, a, r, s_next, terminal)`` tuples through textbook Q-learning.

    ``q`` is a dict-of-lists table indexed ``q[s][a]``; updated in place.
    """
    for s, a, r, s_next, terminal in transitions:
        target = r if terminal else r + gamma * max(q[s_next])
        q[s][a] = q[s][a] + alpha * (target - q[s][a])
    return q
