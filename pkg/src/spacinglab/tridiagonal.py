"""Eigenvalues of symmetric tridiagonal matrices by implicit-shift QL."""

from __future__ import annotations

import math

import numba
import numpy as np

MAX_SWEEPS = 50


class EigensolverError(RuntimeError):
    """QL iteration failed to split off an eigenvalue."""


@numba.njit(cache=True)
def _tql(d, e, max_sweeps):
    # d: diagonal (overwritten with eigenvalues); e: subdiagonal padded to len(d).
    n = d.size
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return l
            # Wilkinson-style shift from the leading 2x2 block.
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tridiagonal_eigenvalues(diag, offdiag, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Sorted eigenvalues of the symmetric tridiagonal matrix.

    Parameters
    ----------
    diag : array_like, shape (n,)
    offdiag : array_like, shape (n-1,)
    max_sweeps : int
        QL sweeps allowed per eigenvalue before giving up.
    """
    d = np.array(diag, dtype=np.float64)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = offdiag
    stuck = _tql(d, e, max_sweeps)
    if stuck >= 0:
        raise EigensolverError(f"no convergence for eigenvalue {stuck} after {max_sweeps} sweeps")
    d.sort()
    return d
