"""Moments of the close-pair count: heuristic means, determinantal quadrature,
tiny-n oracles and Monte Carlo reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .asymptotics import EquilibriumMeasure
from .combinatorics import poisson_moment_coeffs
from .ensembles import ClosePairCount, check_gue_window, gue_quartic_integral, run_trials
from .kernels import Ensemble, KernelSpec, cue_kernel, cue_kernel_derivative, gue_kernel, gue_kernel_partial
from .quadrature import QuadratureResolutionError, composite_gauss_legendre, gauss_legendre
from .windows import TWO_PI, Interval

REFINE_TOL = 1e-6
# Padding beyond the soft edge sqrt(2n) when a GUE window is unbounded.
GUE_TAIL_PAD = 8.0


def consecutive_spacing_density_series(s):
    """``pi^2 s^2/3 - 2 pi^4 s^4/45 + pi^6 s^6/315``; truncation error ``O(s^8)``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    p2 = math.pi**2
    out = s * s * (p2 / 3.0 - s * s * (2.0 * p2 * p2 / 45.0 - s * s * p2**3 / 315.0))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Heuristic means


def heuristic_mu(ensemble: Ensemble, n: int, window: Interval, gamma: float) -> float:
    """Leading-order mean of the close-pair count.

    CUE: ``|I| gamma^3 n^4 / (144 pi^2)``.
    GUE: ``(pi^2 gamma^3 / 9) int_I K_n(x,x)^4 dx`` with 128 Gauss-Legendre nodes.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if Ensemble(ensemble) is Ensemble.CUE:
        return window.length * gamma**3 * n**4 / (144.0 * math.pi**2)
    check_gue_window(n, window)
    return math.pi**2 * gamma**3 / 9.0 * gue_quartic_integral(n, window)


def heuristic_mu_uue(measure: EquilibriumMeasure, n: int, window: Interval, gamma: float, order: int = 128) -> float:
    """``(pi^2 gamma^3 n^4 / 9) int_I psi^4`` for a one-cut equilibrium density ``psi``."""
    if not (measure.a <= window.lo < window.hi <= measure.b):
        raise ValueError("window must lie inside the support")
    rule = gauss_legendre(order, window.lo, window.hi)
    return math.pi**2 * gamma**3 * n**4 / 9.0 * rule.integrate(lambda x: measure.density(x) ** 4)


def gamma_for_mu(ensemble: Ensemble, n: int, window: Interval, mu: float) -> float:
    """Invert :func:`heuristic_mu` (it is cubic in gamma)."""
    unit = heuristic_mu(ensemble, n, window, 1.0)
    return (mu / unit) ** (1.0 / 3.0)


def gamma_n_sq(gamma: float, n: int) -> float:
    """The dimensionless size ``gamma^2 n^2`` governing the heuristic's error."""
    return gamma * gamma * n * n


# ---------------------------------------------------------------------------
# Gaudin quadrature


def _refined(compute, what: str) -> float:
    coarse, fine = compute(1), compute(2)
    if abs(coarse - fine) > REFINE_TOL * max(abs(fine), 1e-300):
        raise QuadratureResolutionError(f"{what}: refinement changed the value from {coarse!r} to {fine!r}")
    return fine


def _gue_x_range(n: int, window: Interval) -> tuple[float, float]:
    if window.is_arc:
        raise ValueError("GUE windows are real intervals")
    reach = math.sqrt(2.0 * n) + GUE_TAIL_PAD
    return max(window.lo, -reach), min(window.hi, reach)


def _gue_wavelength(n: int) -> float:
    return TWO_PI / math.sqrt(2.0 * n)


def gaudin_first_moment(spec: KernelSpec, window: Interval, gamma: float, order: int = 8) -> float:
    """``E(G)`` as a determinantal integral over pairs closer than ``gamma``.

    With midpoint ``x`` and half-difference ``y`` the expectation is
    ``int_I dx int_{|y|<gamma/2} [K(u,u) K(t,t) - |K(u,t)|^2] dy`` where
    ``u = x + y`` and ``t = x - y``. The CUE kernel depends on ``u - t`` only,
    so the x integral is a factor ``|I|``. Composite Gauss-Legendre panels
    are at most a quarter wavelength wide; the result is recomputed with
    panels halved and :class:`QuadratureResolutionError` is raised if the two
    differ by more than ``1e-6`` relative.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0:
        return 0.0
    n = spec.n
    if spec.ensemble is Ensemble.CUE:
        top = min(gamma, math.pi)
        width = TWO_PI / n / 4.0
        diag = (n / TWO_PI) ** 2

        def compute(level):
            rule = composite_gauss_legendre([0.0, top], order, width / level)
            return window.length * rule.integrate(lambda d: diag - np.abs(cue_kernel(n, d)) ** 2)

        return _refined(compute, "CUE first moment")

    lo, hi = _gue_x_range(n, window)
    wave = _gue_wavelength(n)

    def compute(level):
        xr = composite_gauss_legendre([lo, hi], order, wave / 4.0 / level)
        # The integrand is even in y; the y-oscillation runs at twice the rate.
        yr = composite_gauss_legendre([0.0, 0.5 * gamma], order, wave / 8.0 / level)
        x = xr.nodes[:, None]
        y = yr.nodes[None, :]
        u, t = x + y, x - y
        det = gue_kernel(n, u, u) * gue_kernel(n, t, t) - gue_kernel(n, u, t) ** 2
        return 2.0 * float(xr.weights @ det @ yr.weights)

    return _refined(compute, "GUE first moment")


def first_moment_local_expansion(spec: KernelSpec, window: Interval, gamma: float, order: int = 8) -> float:
    """Small-gamma expansion ``int_I (gamma^3/12) (K Kff - Kf^2 - |Kb|^2 - K Re Kbb) dx``.

    ``f`` and ``b`` differentiate along ``u + t`` and ``u - t``, all at the
    diagonal. For a real symmetric kernel ``Kb`` vanishes there. CUE
    derivatives are exact; GUE ones come from
    :func:`~spacinglab.kernels.gue_kernel_partial`.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0:
        return 0.0
    n = spec.n
    if spec.ensemble is Ensemble.CUE:
        k0 = cue_kernel(n, 0.0)
        k1 = cue_kernel_derivative(n, 1, 0.0)
        k2 = cue_kernel_derivative(n, 2, 0.0)
        # K(u,t) = k(u - t): Kf = Kff = 0, Kb = 2k', Kbb = 4k''.
        combo = -abs(2.0 * k1) ** 2 - (k0 * 4.0 * k2).real
        return window.length * gamma**3 / 12.0 * float(combo)

    lo, hi = _gue_x_range(n, window)
    rule = composite_gauss_legendre([lo, hi], order, _gue_wavelength(n) / 4.0)

    def combo(x):
        k = gue_kernel(n, x, x)
        k10, k01 = gue_kernel_partial(n, 1, 0, x, x), gue_kernel_partial(n, 0, 1, x, x)
        k20, k02 = gue_kernel_partial(n, 2, 0, x, x), gue_kernel_partial(n, 0, 2, x, x)
        k11 = gue_kernel_partial(n, 1, 1, x, x)
        kf = k10 + k01
        kff = k20 + 2.0 * k11 + k02
        kbb = k20 - 2.0 * k11 + k02
        return k * kff - kf * kf - k * kbb

    return gamma**3 / 12.0 * rule.integrate(combo)


# ---------------------------------------------------------------------------
# Tiny-n oracle from the raw joint density


@dataclass(frozen=True)
class PairStatistic:
    """``F = sum over pairs of weight(distance)``.

    ``breakpoints`` are distances where ``weight`` is not smooth, so the
    quadrature can split there. ``ordered`` sums over ``i != j`` instead of
    ``i < j``.
    """

    weight: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple = ()
    ordered: bool = False

    @classmethod
    def close_pairs(cls, gamma: float, ordered: bool = False) -> "PairStatistic":
        return cls(lambda d: (d < gamma).astype(float), (float(gamma),), ordered)

    @classmethod
    def constant(cls, ordered: bool = True) -> "PairStatistic":
        return cls(lambda d: np.ones_like(d), (), ordered)


# Truncation of the GUE coordinates: location of the lowest point and gap sizes.
BF_GUE_LOC = 7.0
BF_GUE_GAP = 12.0
BF_WIDTH = 0.5


def _circ(d):
    return np.minimum(d, TWO_PI - d)


def _breaks(lo: float, hi: float, extra) -> list[float]:
    return [lo, hi] + [b for b in extra if lo < b < hi]


def _dist_breaks(ensemble: Ensemble, stat: PairStatistic, shift: float) -> list[float]:
    # Values of a gap where ``shift + gap`` hits a kink of the pair weight.
    out = []
    for b in stat.breakpoints:
        out.append(b - shift)
        if ensemble is Ensemble.CUE:
            out.append(TWO_PI - b - shift)
    if ensemble is Ensemble.CUE:
        out.append(math.pi - shift)
    return out


def _bf_two(ensemble: Ensemble, stat: PairStatistic, order: int, width: float) -> tuple[float, float]:
    if ensemble is Ensemble.CUE:
        # The common rotation integrates out; only the gap d remains.
        r = composite_gauss_legendre(_breaks(0.0, TWO_PI, _dist_breaks(ensemble, stat, 0.0)), order, width)
        dens = 4.0 * np.sin(0.5 * r.nodes) ** 2
        f = stat.weight(_circ(r.nodes))
        return float(r.weights @ (dens * f)), float(r.weights @ dens)
    tr = composite_gauss_legendre([-BF_GUE_LOC, BF_GUE_LOC], order, width)
    dr = composite_gauss_legendre(_breaks(0.0, BF_GUE_GAP, _dist_breaks(ensemble, stat, 0.0)), order, width)
    t = tr.nodes[:, None]
    d = dr.nodes[None, :]
    dens = d * d * np.exp(-t * t - (t + d) ** 2)
    f = stat.weight(dr.nodes)
    return float(tr.weights @ (dens * f) @ dr.weights), float(tr.weights @ dens @ dr.weights)


def _bf_three(ensemble: Ensemble, stat: PairStatistic, order: int, width: float) -> tuple[float, float]:
    cue = ensemble is Ensemble.CUE
    span = TWO_PI if cue else BF_GUE_GAP
    r1 = composite_gauss_legendre(_breaks(0.0, span, _dist_breaks(ensemble, stat, 0.0)), order, width)
    if not cue:
        tr = composite_gauss_legendre([-BF_GUE_LOC, BF_GUE_LOC], order, width)
    num = den = 0.0
    for d1, w1 in zip(r1.nodes, r1.weights):
        top = TWO_PI - d1 if cue else BF_GUE_GAP
        extra = _dist_breaks(ensemble, stat, 0.0) + _dist_breaks(ensemble, stat, d1)
        r2 = composite_gauss_legendre(_breaks(0.0, top, extra), order, width)
        d2 = r2.nodes
        if cue:
            dist = (_circ(d1), _circ(d2), _circ(d1 + d2))
            dens = 64.0 * (np.sin(0.5 * d1) * np.sin(0.5 * d2) * np.sin(0.5 * (d1 + d2))) ** 2
        else:
            dist = (d1, d2, d1 + d2)
            t = tr.nodes[:, None]
            gauss = np.exp(-t * t - (t + d1) ** 2 - (t + d1 + d2[None, :]) ** 2)
            dens = (d1 * d2 * (d1 + d2)) ** 2 * (tr.weights @ gauss)
        f = stat.weight(np.full_like(d2, dist[0])) + stat.weight(dist[1]) + stat.weight(dist[2])
        num += w1 * float(r2.weights @ (dens * f))
        den += w1 * float(r2.weights @ dens)
    return num, den


def brute_force_expectation(n: int, ensemble: Ensemble, stat: PairStatistic, order: int = 12) -> float:
    """``E(F)`` by direct quadrature of the joint eigenvalue density, ``n`` in {2, 3}.

    Coordinates are the lowest point (GUE) or a free rotation (CUE) plus
    consecutive gaps; the density ``prod |e_j - e_k|^2 * weight`` is
    normalized by integrating it with ``F = 1`` on the same rule. GUE
    coordinates are truncated where the density is below ``1e-20``. The
    result is recomputed with panels halved and checked to ``1e-6`` relative.
    """
    ensemble = Ensemble(ensemble)
    if n not in (2, 3):
        raise ValueError("brute force supports n = 2 or 3")
    body = _bf_two if n == 2 else _bf_three
    mult = 2.0 if stat.ordered else 1.0

    def compute(level):
        num, den = body(ensemble, stat, order, BF_WIDTH / level)
        return mult * num / den

    return _refined(compute, "brute-force expectation")


# ---------------------------------------------------------------------------
# Monte Carlo moment report


def jackknife_se(values: np.ndarray, estimator: Callable[[np.ndarray], float] = np.mean) -> float:
    """Jackknife standard error; leave-one-out means are formed in closed form."""
    x = np.asarray(values, dtype=float)
    m = x.size
    if m < 2:
        raise ValueError("need at least two samples")
    if estimator is np.mean:
        loo = (x.sum() - x) / (m - 1)
    else:
        loo = np.array([estimator(np.delete(x, i)) for i in range(m)])
    return float(math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2)))


def poisson_moments(mu: float, k_max: int) -> list[float]:
    return [float(sum(a * mu ** (j + 1) for j, a in enumerate(poisson_moment_coeffs(k)))) for k in range(1, k_max + 1)]


@dataclass(frozen=True)
class MomentReport:
    k_max: int
    mu: float
    empirical: list
    se: list
    poisson: list
    quadrature_first_moment: float
    gamma_n_sq: float
    trials: int = 0
    extra: dict = field(default_factory=dict)

    def within(self, k: int, nse: float = 3.0) -> bool:
        return abs(self.empirical[k - 1] - self.poisson[k - 1]) <= nse * self.se[k - 1]


def moment_report(
    ensemble: Ensemble,
    n: int,
    window: Interval,
    gamma: float,
    k_max: int,
    trials: int,
    seed: int,
    workers: int | None = None,
) -> MomentReport:
    """Monte Carlo ``E(G^k)`` beside the Poisson moments at ``mu = heuristic_mu``."""
    if not 1 <= k_max <= 4:
        raise ValueError("k_max must be in 1..4")
    if trials < 1000:
        raise ValueError("moment_report needs at least 1000 trials")
    ensemble = Ensemble(ensemble)
    mu = heuristic_mu(ensemble, n, window, gamma)
    counts = run_trials(ensemble, n, seed, trials, ClosePairCount(window, gamma), workers)
    empirical = [float(np.mean(counts**k)) for k in range(1, k_max + 1)]
    se = [jackknife_se(counts**k) for k in range(1, k_max + 1)]
    quad = gaudin_first_moment(KernelSpec(ensemble, n), window, gamma)
    return MomentReport(k_max, mu, empirical, se, poisson_moments(mu, k_max), quad, gamma_n_sq(gamma, n), trials)
