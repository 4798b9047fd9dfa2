"""Projection kernels of the circular and Gaussian unitary ensembles.

The GUE weight is ``exp(-x**2)``. Hermite polynomials are carried as a
mantissa times ``2**e`` so that kernels stay finite for large ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

TWO_PI = 2.0 * math.pi
RESCALE_EXP = 512
RESCALE_BAND = 2.0**RESCALE_EXP
LOG2 = math.log(2.0)
LOG_SQRT_PI = 0.5 * math.log(math.pi)
# |x - y| at or below SWITCH * max(1, |x|) uses the diagonal expansion.
SWITCH = 1e-4
# Agreement demanded between the two GUE branches inside a derivative stencil.
BRANCH_TOL = 1e-8


class Ensemble(str, Enum):
    CUE = "cue"
    GUE = "gue"


class IllConditionedStencil(ArithmeticError):
    """A difference stencil straddles kernel branches that disagree."""


@dataclass(frozen=True)
class KernelSpec:
    ensemble: Ensemble
    n: int

    def __post_init__(self):
        object.__setattr__(self, "ensemble", Ensemble(self.ensemble))
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class ScaledHermitePair:
    """``H_n(x) = h_n * exp(log_scale)`` and likewise for ``H_{n-1}``."""

    n: int
    x: float
    log_scale: float
    h_n: float
    h_nm1: float

    @property
    def value(self) -> float:
        return self.h_n * math.exp(self.log_scale) if self.h_n else 0.0

    @property
    def value_nm1(self) -> float:
        return self.h_nm1 * math.exp(self.log_scale) if self.h_nm1 else 0.0


@dataclass(frozen=True)
class KernelValue:
    value: complex | float
    is_diagonal_limit: bool


# ---------------------------------------------------------------------------
# Hermite recurrence


def hermite_window(n: int, x, depth: int = 2):
    """Run ``H_j = 2x H_{j-1} - 2(j-1) H_{j-2}`` up to ``j = n``.

    Returns ``(h, e)`` with ``h[i] * 2**e == H_{n-i}(x)`` for ``i < depth``
    (entries with negative index are zero). ``e`` is an integer array; the
    top pair of mantissas is kept in ``[1, 2**512)``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = np.asarray(x, dtype=float)
    keep = depth
    depth = max(depth, 2)
    win = [np.zeros_like(x) for _ in range(depth)]
    win[0] = np.ones_like(x)
    e = np.zeros(x.shape, dtype=np.int64)
    two_x = 2.0 * x
    down = 2.0**-RESCALE_EXP
    for j in range(1, n + 1):
        new = two_x * win[0] - (2.0 * (j - 1)) * win[1]
        win = [new] + win[:-1]
        top = np.maximum(np.abs(win[0]), np.abs(win[1]))
        big = top >= RESCALE_BAND
        small = (top < 1.0) & (top > 0.0)
        if big.any() or small.any():
            factor = np.where(big, down, np.where(small, RESCALE_BAND, 1.0))
            win = [w * factor for w in win]
            e = e + np.where(big, RESCALE_EXP, np.where(small, -RESCALE_EXP, 0))
    return np.stack(win[:keep]), e


def hermite_scaled(n: int, x: float) -> ScaledHermitePair:
    """Overflow-safe ``(H_n(x), H_{n-1}(x))``."""
    h, e = hermite_window(n, float(x), 2)
    return ScaledHermitePair(int(n), float(x), float(e) * LOG2, float(h[0]), float(h[1]))


def _normalize(h, e):
    """Rescale a window by a power of two so its largest entry is in [0.5, 1)."""
    top = np.max(np.abs(h), axis=0)
    _, shift = np.frexp(top)
    return np.ldexp(h, -shift), e + shift


# ---------------------------------------------------------------------------
# Orthonormal functions


def eta(j: int, x, ensemble: Ensemble = Ensemble.GUE):
    """Orthonormal function ``eta_j`` for the ensemble's weight.

    GUE: ``H_j(x) exp(-x**2/2) / sqrt(2**j j! sqrt(pi))``.
    CUE: ``exp(i j x) / sqrt(2 pi)``.
    """
    ensemble = Ensemble(ensemble)
    x = np.asarray(x, dtype=float)
    if ensemble is Ensemble.CUE:
        out = np.exp(1j * j * x) / math.sqrt(TWO_PI)
        return out[()] if out.ndim == 0 else out
    h, e = hermite_window(j, x, 1)
    h = h[0]
    log_norm = 0.5 * (j * LOG2 + gammaln(j + 1.0) + LOG_SQRT_PI)
    with np.errstate(divide="ignore"):
        mag = np.log(np.abs(h)) + e * LOG2 - 0.5 * x * x - log_norm
    out = np.where(h == 0.0, 0.0, np.sign(h) * np.exp(mag))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# CUE


def cue_kernel(n: int, delta):
    """``(1/2pi) sum_{j<n} exp(i j delta)`` in closed form."""
    d = np.asarray(delta, dtype=float)
    d = np.remainder(d + math.pi, TWO_PI) - math.pi
    half = 0.5 * d
    s = np.sin(half)
    safe = np.where(s == 0.0, 1.0, s)
    ratio = np.where(s == 0.0, float(n), np.sin(n * half) / safe)
    out = np.exp(1j * (n - 1) * half) * ratio / TWO_PI
    return out[()] if out.ndim == 0 else out


def cue_kernel_derivative(n: int, k: int, delta):
    """k-th derivative in ``delta``, by termwise differentiation."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    d = np.asarray(delta, dtype=float)
    j = np.arange(n, dtype=float)
    coef = (1j * j) ** k
    out = np.exp(1j * np.multiply.outer(d, j)) @ coef / TWO_PI
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# GUE


def _log_norm(n: int) -> float:
    # log(2**n (n-1)! sqrt(pi))
    return n * LOG2 + float(gammaln(n)) + LOG_SQRT_PI


def _gue_quotient(n, x, y):
    hx, ex = _normalize(*hermite_window(n, x, 2))
    hy, ey = _normalize(*hermite_window(n, y, 2))
    log_pref = -0.5 * (x * x + y * y) - _log_norm(n) + (ex + ey) * LOG2
    num = hx[0] * hy[1] - hx[1] * hy[0]
    return np.exp(log_pref) * num / (x - y)


def _falling(j: int, p: int) -> float:
    out = 1.0
    for i in range(p):
        out *= j - i
    return out


def _gue_near(n, x, y):
    """Expansion of the kernel about the diagonal.

    With ``m = (x+y)/2`` and ``d = (x-y)/2`` the Christoffel-Darboux
    numerator over ``x - y`` is a polynomial in ``d**2``. Its coefficients
    come from derivatives ``H_j^(p) = 2**p j!/(j-p)! H_{j-p}`` at ``m``; the
    ``d**0`` term is the L'Hopital limit ``H_n' H_{n-1} - H_{n-1}' H_n``.
    Terms through ``d**4`` are kept.
    """
    m = 0.5 * (x + y)
    d = 0.5 * (x - y)
    h, e = _normalize(*hermite_window(n, m, 7))
    # gn[p] = H_n^(p)(m), gm[p] = H_{n-1}^(p)(m), in the common scale.
    gn = [(2.0**p) * _falling(n, p) * h[p] for p in range(6)]
    gm = [(2.0**p) * _falling(n - 1, p) * h[p + 1] for p in range(6)]
    coef = []
    for r in (1, 3, 5):
        a = 0.0
        for p in range(r + 1):
            q = r - p
            c = (-1.0) ** q / (math.factorial(p) * math.factorial(q))
            a = a + c * (gn[p] * gm[q] - gm[p] * gn[q])
        coef.append(0.5 * a)
    d2 = d * d
    poly = coef[0] + d2 * (coef[1] + d2 * coef[2])
    log_pref = -m * m - d2 - _log_norm(n) + 2 * e * LOG2
    return np.exp(log_pref) * poly


def _near_mask(x, y):
    return np.abs(x - y) <= SWITCH * np.maximum(1.0, np.abs(x))


def gue_kernel(n: int, x, y):
    """GUE projection kernel ``sum_{j<n} eta_j(x) eta_j(y)``, vectorized."""
    if n < 1:
        raise ValueError("n must be positive")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    near = _near_mask(x, y)
    out = np.empty(x.shape)
    if near.any():
        out[near] = _gue_near(n, x[near], y[near])
    far = ~near
    if far.any():
        out[far] = _gue_quotient(n, x[far], y[far])
    return out[()] if out.ndim == 0 else out


def kernel_value(spec: KernelSpec, x: float, y: float) -> KernelValue:
    if spec.ensemble is Ensemble.CUE:
        return KernelValue(complex(cue_kernel(spec.n, x - y)), bool(x == y))
    near = bool(_near_mask(np.float64(x), np.float64(y)))
    return KernelValue(float(gue_kernel(spec.n, x, y)), near)


# Second-order central stencils: (offset, weight) pairs per derivative order.
_STENCIL = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}


def fd_step(n: int) -> float:
    return 1e-3 / math.sqrt(n)


def gue_kernel_partial(n: int, kx: int, ky: int, x, y):
    """``d^kx/dx^kx d^ky/dy^ky K_n(x, y)`` by central differences.

    The step is ``1e-3 / sqrt(n)``. When a stencil mixes diagonal and
    off-diagonal evaluations, both branches are compared at the off-diagonal
    points and :class:`IllConditionedStencil` is raised if they disagree.
    """
    if kx < 0 or ky < 0 or kx + ky > 4:
        raise ValueError("need kx, ky >= 0 and kx + ky <= 4")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if kx == 0 and ky == 0:
        return gue_kernel(n, x, y)
    h = fd_step(n)
    pts_x, pts_y, wts = [], [], []
    for i, a in _STENCIL[kx]:
        for j, b in _STENCIL[ky]:
            pts_x.append(x + i * h)
            pts_y.append(y + j * h)
            wts.append(a * b)
    px = np.stack(pts_x)
    py = np.stack(pts_y)
    vals = gue_kernel(n, px, py)
    near = _near_mask(px, py)
    mixed = near.any(axis=0) & (~near).any(axis=0)
    if mixed.any():
        check = mixed[None, ...] & ~near
        alt = _gue_near(n, px[check], py[check])
        scale = np.max(np.abs(vals), axis=0)
        gap = np.abs(alt - vals[check]) / np.broadcast_to(scale, px.shape)[check]
        if gap.size and gap.max() > BRANCH_TOL:
            raise IllConditionedStencil(
                f"diagonal and quotient branches differ by {gap.max():.2e} inside the stencil"
            )
    out = np.tensordot(np.asarray(wts), vals, axes=1) / h ** (kx + ky)
    return out[()] if out.ndim == 0 else out


def christoffel_darboux_gap(n: int, x: float, y: float, ensemble: Ensemble = Ensemble.GUE) -> float:
    """``|sum_{j<n} eta_j(x) eta_j(y) - closed form|``.

    For the GUE the sum runs the orthonormal three-term recurrence
    ``x eta_k = b_k eta_{k+1} + b_{k-1} eta_{k-1}`` with ``b_k = sqrt((k+1)/2)``
    and the closed form is ``b_{n-1} (eta_n(x) eta_{n-1}(y) - eta_{n-1}(x) eta_n(y)) / (x - y)``.
    """
    if x == y:
        raise ValueError("the identity is probed off the diagonal")
    ensemble = Ensemble(ensemble)
    if ensemble is Ensemble.CUE:
        j = np.arange(n)
        direct = np.sum(np.exp(1j * j * (x - y))) / TWO_PI
        return float(abs(direct - cue_kernel(n, x - y)))
    ex = [math.exp(-0.5 * x * x) / math.pi**0.25]
    ey = [math.exp(-0.5 * y * y) / math.pi**0.25]
    for k in range(n - 1):
        bk = math.sqrt((k + 1) / 2)
        bkm = math.sqrt(k / 2)
        ex.append((x * ex[k] - (bkm * ex[k - 1] if k else 0.0)) / bk)
        ey.append((y * ey[k] - (bkm * ey[k - 1] if k else 0.0)) / bk)
    direct = math.fsum(a * b for a, b in zip(ex, ey))
    b = math.sqrt(n / 2)
    closed = b * (eta(n, x) * eta(n - 1, y) - eta(n - 1, x) * eta(n, y)) / (x - y)
    return abs(direct - float(closed))
