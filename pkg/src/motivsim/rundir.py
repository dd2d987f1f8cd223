"""On-disk run directories: manifest, CSV logs, weights and charts.

A run directory ``<exp_id>_<seed>/`` holds::

    manifest.json   experiment id, seed, overrides, layout
    train_log.csv   episode, reward, steps, died, steps_<station>..., steps_off
    visits.csv      x, y, count (summed over training)
    weights.csv     action, feature_index, weight
    test_log.csv    test_index, step, drive, x, y, station_contact

Files are written to a temporary name and renamed into place.  Existing
files are never replaced unless ``force`` is set.
"""

from __future__ import annotations

import contextlib
import csv
import io
import json
import os
import shutil
import tempfile
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import report
from .env import ConfigError, Layout
from .experiments import OVERRIDABLE, EpisodeLog, ExperimentConfig, TrainingResult, build_config
from .learner import weights_to_csv

MANIFEST = "manifest.json"
TRAIN_LOG = "train_log.csv"
VISITS = "visits.csv"
WEIGHTS = "weights.csv"
TEST_LOG = "test_log.csv"


class RunDirError(RuntimeError):
    """A run directory is missing, incomplete, or would be overwritten."""


def run_dir_name(config: ExperimentConfig) -> str:
    return f"{config.id}_{config.seed}"


def manifest(config: ExperimentConfig) -> dict:
    defaults = build_config(config.id)
    overrides = {
        name: getattr(config, name) for name in OVERRIDABLE
        if getattr(config, name) != getattr(defaults, name)
    }
    return {
        "experiment_id": config.id,
        "seed": config.seed,
        "overrides": overrides,
        "layout": config.layout.to_dict(),
    }


def config_from_manifest(doc: dict) -> ExperimentConfig:
    try:
        layout = Layout.from_dict(doc["layout"]) if "layout" in doc else None
        kwargs = dict(doc.get("overrides", {}))
        if layout is not None:
            kwargs["layout"] = layout
        return build_config(doc["experiment_id"], int(doc.get("seed", 0)), **kwargs)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed manifest: {exc!r}") from exc


def read_manifest(run_dir: Path) -> ExperimentConfig:
    path = Path(run_dir) / MANIFEST
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise RunDirError(f"cannot read {path}: {exc}") from exc
    return config_from_manifest(doc)


def atomic_write(path: Path, text: str, force: bool = False) -> None:
    path = Path(path)
    if path.exists() and not force:
        raise RunDirError(f"{path} exists (use --force to overwrite)")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


@contextlib.contextmanager
def staged_dir(final: Path, force: bool = False) -> Iterator[Path]:
    """Yield a scratch directory that becomes ``final`` only on success."""
    final = Path(final)
    if final.exists() and not force:
        raise RunDirError(f"{final} exists (use --force to overwrite)")
    final.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(dir=final.parent, prefix=f".{final.name}."))
    try:
        yield scratch
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise
    if final.exists():
        shutil.rmtree(final)
    os.replace(scratch, final)


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _num(v: float) -> str:
    return repr(float(v))


def train_log_csv(logs: Sequence[EpisodeLog], station_ids: Sequence[str]) -> str:
    header = ["episode", "reward", "steps", "died"] + [f"steps_{s}" for s in station_ids] + ["steps_off"]
    rows = [[e.episode, _num(e.reward), e.steps, int(e.died), *map(int, e.station_steps)] for e in logs]
    return _csv(rows, header)


def visits_csv(visits: np.ndarray) -> str:
    rows = [[x, y, int(visits[y, x])] for y in range(visits.shape[0]) for x in range(visits.shape[1])]
    return _csv(rows, ["x", "y", "count"])


def test_log_csv(logs: Sequence[EpisodeLog], station_ids: Sequence[str]) -> str:
    rows = []
    for e in logs:
        for t in range(e.steps):
            k = int(e.contacts[t])
            rows.append([e.episode, t, _num(e.drives[t]), int(e.xs[t]), int(e.ys[t]),
                         station_ids[k] if k >= 0 else ""])
    return _csv(rows, ["test_index", "step", "drive", "x", "y", "station_contact"])


def write_training(run_dir: Path, result: TrainingResult, force: bool = False) -> None:
    cfg = result.config
    ids = cfg.grid.station_ids
    run_dir = Path(run_dir)
    atomic_write(run_dir / MANIFEST, json.dumps(manifest(cfg), indent=2, sort_keys=True) + "\n", force)
    atomic_write(run_dir / TRAIN_LOG, train_log_csv(result.logs, ids), force)
    atomic_write(run_dir / VISITS, visits_csv(result.visits), force)
    atomic_write(run_dir / WEIGHTS, weights_to_csv(result.weights), force)


def write_test(run_dir: Path, config: ExperimentConfig, logs: Sequence[EpisodeLog],
               force: bool = False) -> None:
    atomic_write(Path(run_dir) / TEST_LOG,
                 test_log_csv(logs, config.grid.station_ids), force)


def _rows(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            return header, list(reader)
    except (OSError, StopIteration) as exc:
        raise RunDirError(f"cannot read {path}: {exc}") from exc


def read_train_log(path: Path) -> list[EpisodeLog]:
    header, rows = _rows(path)
    n_counts = len(header) - 4
    return [
        EpisodeLog(int(r[0]), float(r[1]), int(r[2]), bool(int(r[3])),
                   np.array([int(v) for v in r[4:4 + n_counts]], dtype=np.int64))
        for r in rows
    ]


def read_visits(path: Path, width: int, height: int) -> np.ndarray:
    _, rows = _rows(path)
    visits = np.zeros((height, width), dtype=np.int64)
    for x, y, c in rows:
        visits[int(y), int(x)] = int(c)
    return visits


def read_test_log(path: Path, station_ids: Sequence[str], homeostasis: float = 30.0) -> list[EpisodeLog]:
    _, rows = _rows(path)
    by_test: dict[int, list[list[str]]] = {}
    for r in rows:
        by_test.setdefault(int(r[0]), []).append(r)
    logs = []
    for i in sorted(by_test):
        rs = by_test[i]
        drives = np.array([float(r[2]) for r in rs])
        contacts = np.array([station_ids.index(r[5]) if r[5] else -1 for r in rs], dtype=np.int64)
        station_steps = np.zeros(len(station_ids) + 1, dtype=np.int64)
        for k in contacts:
            station_steps[k] += 1
        died = bool(drives[-1] <= -homeostasis)
        logs.append(EpisodeLog(i, float("nan"), len(rs), died, station_steps, drives=drives,
                               xs=np.array([int(r[3]) for r in rs]),
                               ys=np.array([int(r[4]) for r in rs]), contacts=contacts))
    return logs


def write_report(run_dir: Path, force: bool = False, final_window: int = 500) -> list[str]:
    """Render the charts and occupancy table of a trained (and tested) run."""
    run_dir = Path(run_dir)
    cfg = read_manifest(run_dir)
    grid = cfg.grid
    ids = grid.station_ids
    train = read_train_log(run_dir / TRAIN_LOG)
    visits = read_visits(run_dir / VISITS, grid.width, grid.height)
    written = []

    def put(name, text):
        atomic_write(run_dir / name, text, force)
        written.append(name)

    put("reward_curve.svg", report.render_reward_curve(report.window_stats(train)))
    put("heatmap.svg", report.render_heatmap(report.Heatmap(visits, grid.stations)))

    occ_rows = []
    lo = max(len(train) - final_window, 0)
    for k, v in report.occupancy_by_station(train, slice(lo, None), ids).items():
        occ_rows.append(["train_final", k, _num(v)])
    if (run_dir / TEST_LOG).exists():
        tests = read_test_log(run_dir / TEST_LOG, ids, cfg.homeostasis_level)
        means = report.drive_summary(tests)
        put("drive_tests.svg", report.render_drive_chart(means, -cfg.homeostasis_level,
                                                          grid.battery_max - cfg.homeostasis_level))
        put("drive_tests.csv", _csv([[e.episode, _num(m)] for e, m in zip(tests, means)],
                                    ["test_index", "mean_drive"]))
        for k, v in report.occupancy_by_station(tests, None, ids).items():
            occ_rows.append(["test", k, _num(v)])
    put("occupancy.csv", _csv(occ_rows, ["phase", "station", "fraction"]))
    return written
