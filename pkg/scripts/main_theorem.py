"""Rescaled closest-spacing tails against exp(-beta^3) for several n."""

import argparse
import math

import numpy as np

from spacinglab.ensembles import tail_experiment
from spacinglab.kernels import Ensemble
from spacinglab.windows import Interval


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ensemble", default="cue", choices=["cue", "gue"])
    ap.add_argument("--n", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0])
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    ens = Ensemble(args.ensemble)
    print("n," + ",".join(f"beta={b}" for b in args.betas) + ",max_abs_diff")
    for n in args.n:
        if ens is Ensemble.CUE:
            window = Interval.full_circle()
        else:
            window = Interval.real(-0.5 * math.sqrt(n), 0.5 * math.sqrt(n))
        res = tail_experiment(ens, n, window, args.betas, args.trials, args.seed, args.workers)
        diff = np.abs(res.tail - np.exp(-res.betas**3))
        print(f"{n}," + ",".join(f"{t:.4f}" for t in res.tail) + f",{diff.max():.4f}")
    print("theory," + ",".join(f"{math.exp(-b**3):.4f}" for b in args.betas))


if __name__ == "__main__":
    main()
