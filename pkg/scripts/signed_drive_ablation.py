"""Compare the magnitude-only drive feature with a signed one.

    python scripts/signed_drive_ablation.py --seeds 1 2 3

With ``|drive|`` as the only energy feature a hungry agent and a full one look
alike away from the battery limits; the signed variant removes that
ambiguity.  Reports the median per-test mean drive of EXP01 and EXP07.
"""

import argparse

import numpy as np

from motivsim.experiments import build_config, reachable_starts, run_test, run_training
from motivsim.report import drive_summary


def median_drive(exp, seed, episodes, signed):
    cfg = build_config(exp, seed=seed, training_episodes=episodes, signed_drive=signed)
    res = run_training(cfg, log_every=0)
    return float(np.median(drive_summary(run_test(cfg, res.weights, reachable_starts(cfg)))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--episodes", type=int, default=10000)
    args = ap.parse_args()

    print("seed  feature   EXP01   EXP07")
    for seed in args.seeds:
        for signed in (False, True):
            row = [median_drive(exp, seed, args.episodes, signed) for exp in ("EXP01", "EXP07")]
            label = "signed" if signed else "|drive|"
            print(f"{seed:>4}  {label:<8} {row[0]:>+6.1f}  {row[1]:>+6.1f}", flush=True)


if __name__ == "__main__":
    main()
