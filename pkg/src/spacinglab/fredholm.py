"""Sine-kernel gap probabilities by Nystrom discretization of the Fredholm determinant."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .quadrature import _reference, composite_gauss_legendre
from .windows import Interval

# zeta'(-1), from mpmath.zeta(-1, derivative=1) at 30 digits; checked in the tests.
ZETA_PRIME_M1 = -0.16542114370045092921
DYSON_CONST = 3.0 * ZETA_PRIME_M1 + math.log(2.0) / 3.0
CONVERGENCE_TOL = 1e-10
RICHARDSON_TOL = 1e-5
MIN_NODES = 20


class FredholmConvergenceError(RuntimeError):
    """The determinant changed by more than the tolerance when nodes were doubled."""


def sine_kernel(x, y, density: float = 1.0):
    """``sin(pi rho (x-y)) / (pi (x-y))``, equal to ``rho`` on the diagonal.

    ``rho = 1`` gives unit mean spacing; ``rho = 1/pi`` gives ``sin(x-y)/(pi(x-y))``.
    """
    d = np.subtract(x, y, dtype=float)
    out = density * np.sinc(density * d)
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GapProbe:
    s: float
    m: int
    value: float
    log_value: float
    density: float = 1.0


def default_nodes(length: float, density: float = 1.0) -> int:
    """Ten nodes per mean spacing, never fewer than :data:`MIN_NODES`."""
    return max(MIN_NODES, int(math.ceil(10.0 * length * density)))


def _log_det(nodes: np.ndarray, weights: np.ndarray, density: float) -> float:
    r = np.sqrt(weights)
    a = r[:, None] * sine_kernel(nodes[:, None], nodes[None, :], density) * r[None, :]
    lam = np.linalg.eigvalsh(a)
    if lam.max() >= 1.0:
        raise FredholmConvergenceError("operator norm reached 1; determinant is not positive")
    # log1p keeps relative accuracy for the eigenvalues close to zero.
    return float(np.sum(np.log1p(-lam)))


def _nodes_on(intervals, m: int):
    x, w = _reference(m)
    nodes, weights = [], []
    for lo, hi in intervals:
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _checked(intervals, m: int, density: float, check: bool) -> tuple[float, float]:
    logv = _log_det(*_nodes_on(intervals, m), density)
    if check:
        fine = _log_det(*_nodes_on(intervals, 2 * m), density)
        if abs(math.exp(fine) - math.exp(logv)) > CONVERGENCE_TOL:
            raise FredholmConvergenceError(f"m={m} and m={2 * m} differ by {abs(math.exp(fine) - math.exp(logv)):.2e}")
    return math.exp(logv), logv


def gap_probability(s: float, m: int | None = None, density: float = 1.0, check: bool = True) -> GapProbe:
    """Probability that ``[0, s]`` holds no point of the sine process.

    ``det(I - A)`` with ``A_ij = sqrt(w_i) K(x_i, x_j) sqrt(w_j)`` on ``m``
    Gauss-Legendre nodes; the log determinant is summed from the symmetric
    eigenvalues. With ``check`` the value is recomputed on ``2m`` nodes and
    :class:`FredholmConvergenceError` is raised on a gap above ``1e-10``.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return GapProbe(0.0, 0, 1.0, 0.0, density)
    m = default_nodes(s, density) if m is None else int(m)
    if m < MIN_NODES:
        raise ValueError(f"m must be at least {MIN_NODES}")
    value, logv = _checked([(0.0, float(s))], m, density, check)
    return GapProbe(float(s), m, value, logv, density)


def gap_probability_multi(intervals: Sequence, m: int | None = None, density: float = 1.0, check: bool = True) -> float:
    """Gap probability of a union of disjoint intervals; ``m`` nodes on each."""
    spans = sorted((iv.lo, iv.hi) if isinstance(iv, Interval) else (float(iv[0]), float(iv[1])) for iv in intervals)
    if not spans:
        raise ValueError("need at least one interval")
    for (lo, hi), (lo2, _) in zip(spans, spans[1:]):
        if lo2 < hi:
            raise ValueError("intervals must be disjoint")
    if any(hi <= lo for lo, hi in spans):
        raise ValueError("intervals need positive length")
    if m is None:
        m = default_nodes(max(hi - lo for lo, hi in spans), density)
    return _checked(spans, m, density, check)[0]


def _second_difference(s: float, h: float, m: int, density: float) -> float:
    e = [gap_probability(s + k * h, m, density, check=False).value for k in (-1, 0, 1)]
    return (e[0] - 2.0 * e[1] + e[2]) / (h * h)


def p2_density(s: float, density: float = 1.0, m: int | None = None) -> float:
    """Consecutive-spacing density ``d^2/ds^2 E(s)``.

    Central second difference with ``h = max(1e-3, 1e-2 s)`` (capped at
    ``s/4`` so the stencil stays at positive lengths) and one Richardson
    step; a residual above ``1e-5`` raises ``ArithmeticError``.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    h = min(max(1e-3, 1e-2 * s), 0.25 * s)
    if m is None:
        m = default_nodes(s + h, density) + 10
    coarse = _second_difference(s, h, m, density)
    fine = _second_difference(s, 0.5 * h, m, density)
    extrap = (4.0 * fine - coarse) / 3.0
    if abs(extrap - fine) > RICHARDSON_TOL:
        raise ArithmeticError(f"Richardson residual {abs(extrap - fine):.2e} at s={s}")
    return extrap


def dyson_tail_log(sigma: float) -> float:
    """``-sigma^2/8 - log(sigma)/4 + 3 zeta'(-1) + log(2)/3``.

    ``sigma`` is the interval length for the kernel ``sin(x-y)/(pi(x-y))``,
    i.e. ``pi`` times the length in mean spacings.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return -0.125 * sigma * sigma - 0.25 * math.log(sigma) + DYSON_CONST


def dyson_tail_log_unit(s: float) -> float:
    """:func:`dyson_tail_log` for an interval of ``s`` mean spacings."""
    return dyson_tail_log(math.pi * s)


def _mu_prefactor(g, prefactor: str):
    if prefactor == "tail":
        return g**0.75 / 4.0
    if prefactor == "density":
        return g**1.75 / 16.0
    raise ValueError("prefactor must be 'tail' or 'density'")


def max_spacing_mu(
    window: Interval,
    gamma: float,
    density: Callable | float | None = None,
    prefactor: str = "tail",
    order: int = 16,
) -> float:
    """Heuristic mean number of gaps wider than ``gamma``.

    ``int_I K(x) P(gamma K(x)) exp(-(gamma K)^2/8 + 3 zeta'(-1) + log(2)/3) dx``
    with ``P(g) = g^(3/4)/4`` ("tail") or ``g^(7/4)/16`` ("density"). For a
    constant density the integral is the closed form ``|I| K P exp(...)``.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if density is None or np.isscalar(density):
        k = 1.0 if density is None else float(density)
        g = gamma * k
        return window.length * k * _mu_prefactor(g, prefactor) * math.exp(-g * g / 8.0 + DYSON_CONST)
    if window.is_arc or not (math.isfinite(window.lo) and math.isfinite(window.hi)):
        raise ValueError("a variable density needs a finite real window")
    rule = composite_gauss_legendre([window.lo, window.hi], order, max(window.length / 64.0, 1e-12))

    def integrand(x):
        k = np.asarray(density(x), dtype=float)
        g = gamma * k
        return k * _mu_prefactor(g, prefactor) * np.exp(-g * g / 8.0 + DYSON_CONST)

    return rule.integrate(integrand)
