"""Relative clustering error of separate, joint, dependent and consensus
clustering as a function of the true adherence, for M = 2 or 3 sources.
Writes raw (alpha, error) points; smoothing is left to the plotting tool."""
import argparse
from dataclasses import replace

import numpy as np

from bcc.io import write_records
from bcc.simulation import STUDY_CONFIG, error_comparison_study

METHODS = ("separate", "joint", "dependent", "bcc")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sources", type=int, choices=[2, 3], default=2)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    args = p.parse_args()
    recs = error_comparison_study(args.sources, args.reps, replace(STUDY_CONFIG, seed=args.seed),
                                  n_jobs=args.jobs)
    write_records(args.out or f"error_comparison_M{args.sources}.csv", recs)
    alpha = np.array([r["alpha"] for r in recs])
    for label, mask in [("alpha >= 0.95", alpha >= 0.95), ("alpha <= 0.55", alpha <= 0.55), ("all", alpha > 0)]:
        means = "  ".join(f"{m} {np.mean([r['err_' + m] for r, k in zip(recs, mask) if k]):.3f}" for m in METHODS)
        print(f"{label:>14} ({mask.sum():3d} reps): {means}")


if __name__ == "__main__":
    main()
