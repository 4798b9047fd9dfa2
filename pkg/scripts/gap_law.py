"""CUE empty-arc frequencies against the sine-kernel gap probability."""

import argparse
import math

import numpy as np

from spacinglab.ensembles import EmptyArcs, run_trials
from spacinglab.fredholm import gap_probability
from spacinglab.kernels import Ensemble


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--s", type=float, nargs="+", default=[0.25, 0.5, 1.0, 1.5, 2.0, 2.5])
    args = ap.parse_args()
    arcs = tuple(s * 2 * math.pi / args.n for s in args.s)
    emp = run_trials(Ensemble.CUE, args.n, args.seed, args.trials, EmptyArcs(arcs)).mean(axis=0)
    se = np.sqrt(emp * (1 - emp) / args.trials)
    print("s,empirical,se,E2")
    for s, e, d in zip(args.s, emp, se):
        print(f"{s},{e:.5f},{d:.5f},{gap_probability(s).value:.5f}")


if __name__ == "__main__":
    main()
