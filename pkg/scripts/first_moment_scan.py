"""Exact first moment, local expansion and heuristic mean across gamma*n."""

import argparse

import numpy as np

from spacinglab.kernels import KernelSpec
from spacinglab.moments import first_moment_local_expansion, gaudin_first_moment, heuristic_mu
from spacinglab.windows import Interval


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=64)
    args = ap.parse_args()
    n = args.n
    spec = KernelSpec("cue", n)
    window = Interval.full_circle()
    print("gamma_n,gaudin,local,heuristic,gaudin/heuristic")
    for gn in np.geomspace(0.02, 3.0, 12):
        g = gn / n
        q = gaudin_first_moment(spec, window, g)
        h = heuristic_mu("cue", n, window, g)
        print(f"{gn:.4f},{q:.6g},{first_moment_local_expansion(spec, window, g):.6g},{h:.6g},{q / h:.5f}")


if __name__ == "__main__":
    main()
