"""``motivsim`` command line.

    motivsim train --exp EXP04 --seed 7 --out runs/
    motivsim test --exp EXP04 --seed 7 --out runs/ --weights runs/EXP04_7/weights.csv
    motivsim report --exp EXP04 --seed 7 --out runs/
    motivsim suite --seed 1 --out runs/ --jobs 4
    motivsim validate-config --layout layout.json

Exit status: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import rundir
from .env import DEFAULT_LAYOUT, ConfigError, Layout, load_layout
from .experiments import EXPERIMENTS, build_config, reachable_starts, run_test, run_training
from .learner import DivergenceError, load_weights

log = logging.getLogger("motivsim")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class Command:
    name: str
    experiments: list[str] = field(default_factory=list)
    seed: int = 0
    out: Path = Path("runs")
    layout: Layout = DEFAULT_LAYOUT
    episodes: Optional[int] = None
    force: bool = False
    jobs: int = 1
    weights: Optional[Path] = None

    def run_dir(self, exp_id: str) -> Path:
        return self.out / f"{exp_id}_{self.seed}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get("MOTIVSIM_SEED")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=int(env_seed) if env_seed else 0,
                        help="master seed (default: $MOTIVSIM_SEED or 0)")
    common.add_argument("--out", type=Path, default=Path("runs"), help="parent of run directories")
    common.add_argument("--layout", type=Path, help="station layout JSON")
    common.add_argument("--episodes", type=int, help="override the number of training episodes")
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p = _Parser(prog="motivsim", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("train", "test", "report"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--exp", required=True, help="experiment id, EXP01..EXP12")
        if name == "test":
            sp.add_argument("--weights", type=Path, required=True, help="weights.csv from training")
    sp = sub.add_parser("suite", parents=[common])
    sp.add_argument("--jobs", type=int, default=1, help="experiments run concurrently")
    sp = sub.add_parser("validate-config", parents=[common])
    return p


def parse_args(argv: list[str]) -> Command:
    ns = _parser().parse_args(argv)
    cmd = Command(ns.command, seed=ns.seed, out=ns.out, episodes=ns.episodes, force=ns.force)
    if ns.layout is not None:
        try:
            cmd.layout = load_layout(ns.layout)
        except ConfigError as exc:
            raise UsageError(str(exc)) from exc
    elif ns.command == "validate-config":
        raise UsageError("validate-config needs --layout")
    if ns.episodes is not None and ns.episodes < 1:
        raise UsageError("--episodes must be >= 1")
    if ns.command == "suite":
        cmd.experiments = list(EXPERIMENTS)
        if ns.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        cmd.jobs = ns.jobs
    elif ns.command in ("train", "test", "report"):
        exp = ns.exp.upper()
        if exp not in EXPERIMENTS:
            raise UsageError(f"unknown experiment id {ns.exp!r}")
        cmd.experiments = [exp]
    if ns.command == "test":
        cmd.weights = ns.weights
    return cmd


def _config(cmd: Command, exp_id: str):
    overrides = {"training_episodes": cmd.episodes} if cmd.episodes else {}
    return build_config(exp_id, cmd.seed, layout=cmd.layout, **overrides)


def train(cmd: Command, exp_id: str) -> Path:
    cfg = _config(cmd, exp_id)
    final = cmd.run_dir(exp_id)
    with rundir.staged_dir(final, cmd.force) as scratch:
        result = run_training(cfg)
        rundir.write_training(scratch, result)
    log.info("%s: wrote %s", exp_id, final)
    return final


def test(cmd: Command, exp_id: str, weights_path: Path) -> Path:
    final = cmd.run_dir(exp_id)
    weights = load_weights(weights_path)
    if (final / rundir.MANIFEST).exists():
        cfg = rundir.read_manifest(final)
        if cfg.id != exp_id:
            raise ConfigError(f"{final} belongs to {cfg.id}, not {exp_id}")
        logs = run_test(cfg, weights, reachable_starts(cfg))
        rundir.write_test(final, cfg, logs, cmd.force)
    else:
        cfg = _config(cmd, exp_id)
        logs = run_test(cfg, weights, reachable_starts(cfg))
        with rundir.staged_dir(final, cmd.force) as scratch:
            rundir.atomic_write(scratch / rundir.MANIFEST, _manifest_text(cfg))
            rundir.write_test(scratch, cfg, logs)
    log.info("%s: %d test episodes, median length %d", exp_id, len(logs),
             sorted(e.steps for e in logs)[len(logs) // 2])
    return final


def _manifest_text(cfg) -> str:
    return json.dumps(rundir.manifest(cfg), indent=2, sort_keys=True) + "\n"


def report(cmd: Command, exp_id: str) -> Path:
    final = cmd.run_dir(exp_id)
    if not final.is_dir():
        raise rundir.RunDirError(f"no run directory {final}")
    written = rundir.write_report(final, cmd.force)
    log.info("%s: wrote %s", exp_id, ", ".join(written))
    return final


def _suite_job(cmd: Command, exp_id: str) -> str:
    final = train(cmd, exp_id)
    test(cmd, exp_id, final / rundir.WEIGHTS)
    report(cmd, exp_id)
    return exp_id


def execute(cmd: Command) -> int:
    try:
        if cmd.name == "validate-config":
            cmd.layout.validate()
            print(f"layout ok: {len(cmd.layout.stations)} stations on "
                  f"{cmd.layout.width}x{cmd.layout.height}")
        elif cmd.name == "train":
            train(cmd, cmd.experiments[0])
        elif cmd.name == "test":
            test(cmd, cmd.experiments[0], cmd.weights)
        elif cmd.name == "report":
            report(cmd, cmd.experiments[0])
        elif cmd.name == "suite":
            if cmd.jobs == 1:
                for exp in cmd.experiments:
                    _suite_job(cmd, exp)
            else:
                with ProcessPoolExecutor(max_workers=cmd.jobs) as pool:
                    for done in pool.map(_suite_job, [cmd] * len(cmd.experiments), cmd.experiments):
                        log.info("%s finished", done)
        else:
            raise UsageError(f"unknown command {cmd.name!r}")
    except (ConfigError, rundir.RunDirError, DivergenceError, OSError, ValueError) as exc:
        print(f"motivsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    try:
        cmd = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"motivsim: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return execute(cmd)


if __name__ == "__main__":
    sys.exit(main())
