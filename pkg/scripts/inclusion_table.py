"""Source-cluster probabilities induced by skewed overall weights (K = 10)
at several adherence levels."""
import argparse

import numpy as np

from bcc.simulation import inclusion_probability_table

PI = np.array([0.35, 0.25, 0.15, 0.1, 0.08, 0.05, 0.02, 0.0, 0.0, 0.0])


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alphas", default="1,0.95,0.75,0.1")
    args = p.parse_args()
    alphas = [float(a) for a in args.alphas.split(",")]
    table = inclusion_probability_table(PI, alphas, K=PI.size)
    print("k   " + "".join(f"alpha={a:<8g}" for a in alphas))
    for k, row in enumerate(table, start=1):
        print(f"{k:<4}" + "".join(f"{v:<14.4f}" for v in row))


if __name__ == "__main__":
    main()
