"""Summaries and SVG charts built from episode logs.

All renderers emit plain SVG text with fixed number formatting, so equal
inputs give byte-equal documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .env import StationSpec

# Legend colours of stations A-D; further stations cycle.
STATION_COLOURS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728")


@dataclass(frozen=True)
class WindowStat:
    index: int
    size: int
    mean_reward: float
    std_reward: float
    mean_steps: float
    std_steps: float


def window_stats(logs: Sequence, window: int = 100) -> list[WindowStat]:
    """Blocked (non-overlapping) windows with population standard deviation."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if not logs:
        raise ValueError("no episode logs")
    rewards = np.array([e.reward for e in logs], dtype=float)
    steps = np.array([e.steps for e in logs], dtype=float)
    out = []
    for i, lo in enumerate(range(0, len(logs), window)):
        r, s = rewards[lo:lo + window], steps[lo:lo + window]
        out.append(WindowStat(i, len(r), float(r.mean()), float(r.std()),
                              float(s.mean()), float(s.std())))
    return out


def occupancy_by_station(logs: Sequence, window: slice | range | None = None,
                         station_ids: Sequence[str] = ("A", "B", "C", "D")) -> dict[str, float]:
    """Share of steps spent on each station over ``logs[window]``.

    Keys are the station ids plus ``"off"``; values sum to one.
    """
    if isinstance(window, range):
        window = slice(window.start, window.stop, window.step)
    chosen = list(logs[window] if window is not None else logs)
    if not chosen:
        raise ValueError("empty episode range")
    counts = np.sum([e.station_steps for e in chosen], axis=0)
    if len(counts) != len(station_ids) + 1:
        raise ValueError(f"logs track {len(counts) - 1} stations, got ids {tuple(station_ids)}")
    total = counts.sum()
    if total == 0:
        raise ValueError("episode range holds no steps")
    keys = list(station_ids) + ["off"]
    return {k: float(c / total) for k, c in zip(keys, counts)}


def drive_summary(test_logs: Sequence) -> np.ndarray:
    """Mean per-step drive of each test episode."""
    if not test_logs:
        raise ValueError("no test logs")
    return np.array([e.mean_drive for e in test_logs])


# --- SVG ------------------------------------------------------------------

def _f(v: float) -> str:
    return f"{v:.2f}"


def _svg(width: float, height: float, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" '
            f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="#ffffff"/>', *body, "</svg>\n"])


def _text(x: float, y: float, s: str, size: int = 11, anchor: str = "start") -> str:
    return (f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}">{s}</text>')


@dataclass
class Heatmap:
    counts: np.ndarray  # (height, width)
    stations: tuple[StationSpec, ...] = ()


def render_heatmap(h: Heatmap, cell: int = 20) -> str:
    counts = np.asarray(h.counts)
    rows, cols = counts.shape
    margin = 30
    peak = counts.max()
    body = []
    for y in range(rows):
        for x in range(cols):
            level = counts[y, x] / peak if peak > 0 else 0.0
            # white -> dark red
            g = int(round(255 * (1 - level)))
            b = int(round(255 * (1 - level)))
            body.append(
                f'<rect x="{margin + x * cell}" y="{margin + y * cell}" width="{cell}" '
                f'height="{cell}" fill="#ff{g:02x}{b:02x}" data-count="{int(counts[y, x])}"/>'
            )
    for k, s in enumerate(h.stations):
        colour = STATION_COLOURS[k % len(STATION_COLOURS)]
        body.append(
            f'<rect class="station" x="{margin + s.x0 * cell}" y="{margin + s.y0 * cell}" '
            f'width="{(s.x1 - s.x0 + 1) * cell}" height="{(s.y1 - s.y0 + 1) * cell}" '
            f'fill="none" stroke="{colour}" stroke-width="3"/>'
        )
        body.append(_text(margin + s.x0 * cell + 2, margin + s.y0 * cell - 3, s.id))
    body.append(_text(margin, 18, f"visits per cell (max {int(peak)})"))
    return _svg(2 * margin + cols * cell, 2 * margin + rows * cell, body)


def _polyline(xs, ys, colour: str) -> str:
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(xs, ys))
    return f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>'


def _band(xs, lo, hi, colour: str) -> str:
    pts = [f"{_f(x)},{_f(y)}" for x, y in zip(xs, hi)]
    pts += [f"{_f(x)},{_f(y)}" for x, y in zip(reversed(xs), reversed(lo))]
    return f'<polygon points="{" ".join(pts)}" fill="{colour}" fill-opacity="0.25" stroke="none"/>'


def _panel(top: float, height: float, width: float, left: float, series: np.ndarray,
           spread: np.ndarray, label: str, colour: str) -> list[str]:
    lo, hi = series - spread, series + spread
    vmin, vmax = float(lo.min()), float(hi.max())
    if math.isclose(vmin, vmax):
        vmin, vmax = vmin - 1, vmax + 1
    n = len(series)
    xs = [left + (i + 0.5) * width / n for i in range(n)]

    def sy(v):
        return top + height * (vmax - v) / (vmax - vmin)

    return [
        f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(width)}" height="{_f(height)}" '
        f'fill="none" stroke="#888888"/>',
        _band(xs, [sy(v) for v in lo], [sy(v) for v in hi], colour),
        _polyline(xs, [sy(v) for v in series], colour),
        _text(left, top - 5, label),
        _text(left - 5, top + 10, _f(vmax), 9, "end"),
        _text(left - 5, top + height, _f(vmin), 9, "end"),
    ]


def render_reward_curve(stats: Sequence[WindowStat], window: int = 100) -> str:
    """Two stacked panels: windowed reward and windowed episode length, mean +/- std."""
    if not stats:
        raise ValueError("no window statistics")
    w, h, left = 640.0, 200.0, 70.0
    mean_r = np.array([s.mean_reward for s in stats])
    std_r = np.array([s.std_reward for s in stats])
    mean_s = np.array([s.mean_steps for s in stats])
    std_s = np.array([s.std_steps for s in stats])
    body = _panel(30, h, w, left, mean_r, std_r, f"reward per episode (mean of {window})", "#1f77b4")
    body += _panel(60 + h, h, w, left, mean_s, std_s, f"actions per episode (mean of {window})", "#d62728")
    body.append(_text(left + w / 2, 2 * h + 90, f"window ({len(stats)} windows)", 11, "middle"))
    return _svg(left + w + 20, 2 * h + 100, body)


def render_drive_chart(means: Sequence[float], lo: float = -30.0, hi: float = 20.0) -> str:
    """One bar per test episode, with the setpoint (drive 0) as a reference line."""
    means = np.asarray(means, dtype=float)
    if means.size == 0:
        raise ValueError("no test drives")
    w, h, left, top = 600.0, 300.0, 50.0, 30.0
    bar = w / len(means)

    def sy(v):
        return top + h * (hi - v) / (hi - lo)

    zero = sy(0.0)
    body = [f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(w)}" height="{_f(h)}" '
            f'fill="none" stroke="#888888"/>']
    for i, m in enumerate(means):
        y0, y1 = sorted((zero, sy(m)))
        colour = "#2ca02c" if abs(m) < 1 else ("#d62728" if m < 0 else "#1f77b4")
        body.append(f'<rect x="{_f(left + i * bar + 1)}" y="{_f(y0)}" width="{_f(max(bar - 2, 1))}" '
                    f'height="{_f(y1 - y0)}" fill="{colour}"/>')
    body.append(f'<line class="homeostasis" x1="{_f(left)}" y1="{_f(zero)}" x2="{_f(left + w)}" '
                f'y2="{_f(zero)}" stroke="#000000" stroke-dasharray="4,3"/>')
    body.append(_text(left, top - 8, f"average drive in {len(means)} tests"))
    body.append(_text(left - 5, top + 10, _f(hi), 9, "end"))
    body.append(_text(left - 5, top + h, _f(lo), 9, "end"))
    body.append(_text(left - 5, zero + 3, "0", 9, "end"))
    return _svg(left + w + 20, top + h + 30, body)
