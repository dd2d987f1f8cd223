"""Seed sweep over the desk-scale behavioural checks.

    python scripts/desk_sweep.py --seeds 1 2 3 --episodes 5000

Prints one row per seed: EXP03 station occupancy, top stations of EXP07 and
EXP12, mean test drive of EXP07 and EXP01, and the EXP01 median test drive
after twice the episode budget.
"""

import argparse

import numpy as np

from motivsim.experiments import build_config, reachable_starts, run_test, run_training
from motivsim.report import drive_summary, occupancy_by_station


def run(exp, seed, episodes, final_window):
    cfg = build_config(exp, seed=seed, training_episodes=episodes)
    res = run_training(cfg, log_every=0)
    occ = occupancy_by_station(res.logs, slice(len(res.logs) - final_window, None))
    drives = drive_summary(run_test(cfg, res.weights, reachable_starts(cfg)))
    return occ, drives


def top(occ):
    return max((k for k in occ if k != "off"), key=occ.get)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--episodes", type=int, default=5000)
    ap.add_argument("--final-window", type=int, default=500)
    args = ap.parse_args()

    print("seed  on_station(EXP03)  top(EXP07)  top(EXP12)  drive(EXP07)  drive(EXP01)  median(EXP01 x2)")
    for seed in args.seeds:
        o3, _ = run("EXP03", seed, args.episodes, args.final_window)
        o7, d7 = run("EXP07", seed, args.episodes, args.final_window)
        o12, _ = run("EXP12", seed, args.episodes, args.final_window)
        _, d1 = run("EXP01", seed, args.episodes, args.final_window)
        _, d1_long = run("EXP01", seed, 2 * args.episodes, args.final_window)
        print(f"{seed:>4}  {1 - o3['off']:>17.3f}  {top(o7):>10}  {top(o12):>10}  "
              f"{d7.mean():>+12.2f}  {d1.mean():>+12.2f}  {np.median(d1_long):>+16.2f}", flush=True)


if __name__ == "__main__":
    main()
