"""Convergence rates of the Plancherel-Rotach and bulk UUE approximations."""

import math

import numpy as np

from spacinglab.asymptotics import pr_error_amplitude, semicircle_measure, uue_eta_asymptotic
from spacinglab.kernels import eta


def main():
    print("n,pr_amp(w=0.3),pr_amp(w=0.8),uue_median_err")
    m = semicircle_measure()
    for n in (25, 50, 100, 200, 400):
        zs = np.linspace(-1, 1, 41)
        ref = n**0.25 * eta(n, math.sqrt(n) * zs)
        approx = np.array([uue_eta_asymptotic(m, n, "n", 0, z) for z in zs])
        env = math.sqrt(2 / (2 * math.sqrt(2) * math.pi))
        med = float(np.median(np.abs(approx - ref))) / env
        print(f"{n},{pr_error_amplitude(n, 0.3):.3e},{pr_error_amplitude(n, 0.8):.3e},{med:.3e}")


if __name__ == "__main__":
    main()
