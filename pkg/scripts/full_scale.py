"""Time one full-scale experiment and write its run directory.

    python scripts/full_scale.py --exp EXP07 --seed 1 --out runs

Equivalent to ``motivsim train``/``test``/``report`` in sequence, with the
wall-clock time of each phase printed.
"""

import argparse
import time
from pathlib import Path

from motivsim import rundir
from motivsim.experiments import build_config, reachable_starts, run_test, run_training


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--exp", default="EXP07")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs"))
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()

    cfg = build_config(args.exp, seed=args.seed)
    final = args.out / rundir.run_dir_name(cfg)

    t0 = time.perf_counter()
    result = run_training(cfg)
    t1 = time.perf_counter()
    logs = run_test(cfg, result.weights, reachable_starts(cfg))
    t2 = time.perf_counter()
    with rundir.staged_dir(final, args.force) as scratch:
        rundir.write_training(scratch, result)
        rundir.write_test(scratch, cfg, logs)
    rundir.write_report(final)
    t3 = time.perf_counter()

    steps = sum(e.steps for e in result.logs)
    print(f"{cfg.id} seed {cfg.seed}: {len(result.logs)} episodes, {steps} steps")
    print(f"train {t1 - t0:.1f} s, test {t2 - t1:.1f} s, write+report {t3 - t2:.1f} s -> {final}")


if __name__ == "__main__":
    main()
