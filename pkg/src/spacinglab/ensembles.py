"""Exact CUE/GUE spectrum samplers and closest-spacing statistics."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np

from .kernels import Ensemble, gue_kernel
from .quadrature import gauss_legendre
from .rng import check_seed, trial_generator
from .tridiagonal import EigensolverError, tridiagonal_eigenvalues
from .windows import TWO_PI, Interval

PROPOSAL_CAP = 100_000  # proposals allowed per point, times n overall
BULK_EPS = 0.05


class SamplerError(RuntimeError):
    def __init__(self, message: str, seed: int, trial: int):
        super().__init__(f"{message} (seed={seed}, trial={trial})")
        self.seed = seed
        self.trial = trial


@dataclass(frozen=True)
class Spectrum:
    ensemble: Ensemble
    n: int
    values: np.ndarray = field(repr=False)
    seed: int
    trial: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ensemble", Ensemble(self.ensemble))


@dataclass(frozen=True)
class SpacingStats:
    z_min: float
    pair_count: int
    rescaled_beta: float


# ---------------------------------------------------------------------------
# CUE: sequential sampling of the determinantal projection process


@numba.njit(cache=True)
def _cue_core(n, xs, us):
    """Sequential projection-DPP sampler on the Fourier basis ``z**j``, ``j < n``.

    ``q`` holds an orthonormal basis of the feature vectors of accepted
    points. The projected mass ``sum_m |<q_m, v(x)>|^2`` is the trigonometric
    polynomial ``c_0 + 2 Re sum_{d>0} c_d z^d`` with ``c_d`` the summed
    autocorrelations of the rows of ``q``, so each proposal costs ``O(n)``.
    A proposal ``x`` is accepted with probability ``1 - mass(x)/n``.
    Returns the points and the number of proposals used, or ``-1`` if the
    stream ran out.
    """
    q = np.zeros((n, n), np.complex128)
    c = np.zeros(n, np.complex128)
    v = np.empty(n, np.complex128)
    pts = np.empty(n)
    p = 0
    for k in range(n):
        while True:
            if p >= xs.size:
                return pts, -1
            x = xs[p]
            u = us[p]
            p += 1
            z = np.exp(1j * x)
            acc = 0j
            for d in range(n - 1, 0, -1):
                acc = (acc + c[d]) * z
            mass = c[0].real + 2.0 * acc.real
            if u * n < n - mass:
                break
        w = 1.0 + 0j
        for j in range(n):
            v[j] = w
            w *= z
        # Two Gram-Schmidt passes keep q orthonormal to working precision.
        for _ in range(2):
            for m in range(k):
                a = 0j
                for j in range(n):
                    a += q[m, j].conjugate() * v[j]
                for j in range(n):
                    v[j] -= a * q[m, j]
        nrm = 0.0
        for j in range(n):
            nrm += v[j].real ** 2 + v[j].imag ** 2
        nrm = math.sqrt(nrm)
        for j in range(n):
            q[k, j] = v[j] / nrm
        for d in range(n):
            s = 0j
            for a_ in range(n - d):
                s += q[k, a_] * q[k, a_ + d].conjugate()
            c[d] += s
        pts[k] = x
    return pts, p


def _cue_angles(n: int, rng: np.random.Generator, seed: int, trial: int) -> np.ndarray:
    cap = PROPOSAL_CAP * n
    size = 8 * n + 64
    xs = rng.uniform(0.0, TWO_PI, size)
    us = rng.random(size)
    while True:
        pts, used = _cue_core(n, xs, us)
        if used >= 0:
            return np.sort(pts)
        if xs.size >= cap:
            raise SamplerError(f"rejection sampling stalled after {xs.size} proposals", seed, trial)
        more = min(xs.size, cap - xs.size)
        # Extending the stream reproduces the prefix, so the outcome equals
        # that of one unbounded stream.
        xs = np.concatenate([xs, rng.uniform(0.0, TWO_PI, more)])
        us = np.concatenate([us, rng.random(more)])


def sample_cue_spectrum(n: int, seed: int, trial: int = 0) -> Spectrum:
    """``n`` CUE eigenangles in ``[0, 2pi)``, sorted."""
    if n < 1:
        raise ValueError("n must be positive")
    seed = check_seed(seed)
    vals = _cue_angles(int(n), trial_generator(seed, trial), seed, trial)
    if n > 1 and not np.all(np.diff(vals) > 0):
        raise SamplerError("coincident eigenangles", seed, trial)
    return Spectrum(Ensemble.CUE, int(n), vals, seed, trial)


# ---------------------------------------------------------------------------
# GUE: tridiagonal beta = 2 model


def sample_gue_spectrum(n: int, seed: int, trial: int = 0) -> Spectrum:
    """``n`` GUE eigenvalues for the weight ``exp(-sum lambda^2)``, sorted.

    Diagonal entries are ``N(0, 1/2)`` and the k-th off-diagonal entry is
    ``chi_{2(n-k)} / 2``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    seed = check_seed(seed)
    rng = trial_generator(seed, trial)
    diag = rng.normal(0.0, math.sqrt(0.5), n)
    off = 0.5 * np.sqrt(rng.chisquare(2.0 * np.arange(n - 1, 0, -1))) if n > 1 else np.zeros(0)
    try:
        vals = tridiagonal_eigenvalues(diag, off)
    except EigensolverError as err:
        raise SamplerError(str(err), seed, trial) from err
    if n > 1 and not np.all(np.diff(vals) > 0):
        raise SamplerError("coincident eigenvalues", seed, trial)
    return Spectrum(Ensemble.GUE, int(n), vals, seed, trial)


def sample_spectrum(ensemble: Ensemble, n: int, seed: int, trial: int = 0) -> Spectrum:
    if Ensemble(ensemble) is Ensemble.CUE:
        return sample_cue_spectrum(n, seed, trial)
    return sample_gue_spectrum(n, seed, trial)


# ---------------------------------------------------------------------------
# Pair statistics


def _pairs_at_offset(spec: Spectrum, r: int):
    """Distances and midpoints of pairs ``r`` apart in sorted order.

    On the circle each unordered pair is reported once, from the endpoint
    whose forward arc to the other is the shorter one.
    """
    v = spec.values
    if spec.ensemble is Ensemble.CUE:
        fwd = np.mod(np.roll(v, -r) - v, TWO_PI)
        keep = fwd <= math.pi
        return fwd, np.mod(v + 0.5 * fwd, TWO_PI), keep
    dist = v[r:] - v[:-r]
    return dist, 0.5 * (v[r:] + v[:-r]), np.ones(dist.shape, dtype=bool)


def closest_spacing(spec: Spectrum, window: Interval) -> float:
    """Smallest distance over pairs whose midpoint lies in ``window``; ``inf`` if none."""
    best = math.inf
    for r in range(1, spec.n):
        dist, mid, keep = _pairs_at_offset(spec, r)
        # Distances grow with r, so nothing further can beat ``best``.
        if dist.min() >= best:
            break
        ok = keep & window.contains(mid)
        if ok.any():
            best = min(best, float(dist[ok].min()))
    return best


def count_close_pairs(spec: Spectrum, window: Interval, gamma: float) -> int:
    """Unordered pairs closer than ``gamma`` with midpoint in ``window``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    total = 0
    for r in range(1, spec.n):
        dist, mid, keep = _pairs_at_offset(spec, r)
        if dist.min() >= gamma:
            break
        total += int(np.count_nonzero(keep & (dist < gamma) & window.contains(mid)))
    return total


def check_gue_window(n: int, window: Interval, eps: float = BULK_EPS) -> None:
    edge = (math.sqrt(2.0) - eps) * math.sqrt(n)
    if window.is_arc or window.lo <= -edge or window.hi >= edge:
        raise ValueError(f"GUE window must lie inside (-{edge:.6g}, {edge:.6g})")


def gue_quartic_integral(n: int, window: Interval, order: int = 128) -> float:
    """``int_window K_n(x, x)^4 dx`` by Gauss-Legendre."""
    rule = gauss_legendre(order, window.lo, window.hi)
    return rule.integrate(lambda x: gue_kernel(n, x, x) ** 4)


def rescale_factor(ensemble: Ensemble, n: int, window: Interval, eps: float = BULK_EPS) -> float:
    """Factor ``c`` with ``Pr(c Z_n > beta) -> exp(-beta^3)``.

    CUE: ``(n^4 |I| / (144 pi^2))^(1/3)``.
    GUE: ``((pi^2/9) int_I K_n(x,x)^4 dx)^(1/3)``.
    """
    if Ensemble(ensemble) is Ensemble.CUE:
        return (n**4 * window.length / (144.0 * math.pi**2)) ** (1.0 / 3.0)
    check_gue_window(n, window, eps)
    return (math.pi**2 / 9.0 * gue_quartic_integral(n, window)) ** (1.0 / 3.0)


def rescale_statistic(z: float, ensemble: Ensemble, n: int, window: Interval) -> float:
    if not math.isfinite(z):
        return z
    return z * rescale_factor(ensemble, n, window)


def spacing_stats(spec: Spectrum, window: Interval, gamma: float) -> SpacingStats:
    z = closest_spacing(spec, window)
    return SpacingStats(z, count_close_pairs(spec, window, gamma), rescale_statistic(z, spec.ensemble, spec.n, window))


# ---------------------------------------------------------------------------
# Trial runner


@dataclass(frozen=True)
class ClosestSpacing:
    window: Interval

    def __call__(self, spec: Spectrum) -> float:
        return closest_spacing(spec, self.window)


@dataclass(frozen=True)
class ClosePairCount:
    window: Interval
    gamma: float

    def __call__(self, spec: Spectrum) -> float:
        return float(count_close_pairs(spec, self.window, self.gamma))


@dataclass(frozen=True)
class EmptyArcs:
    """Indicators that each arc ``[0, L)`` holds no eigenangle, per length ``L``."""

    lengths: tuple

    def __call__(self, spec: Spectrum) -> np.ndarray:
        first = spec.values[0]
        return np.array([1.0 if first >= L else 0.0 for L in self.lengths])


@dataclass(frozen=True)
class RawValues:
    def __call__(self, spec: Spectrum) -> np.ndarray:
        return spec.values.copy()


def _run_chunk(task):
    ensemble, n, seed, start, stop, statistic = task
    return [statistic(sample_spectrum(ensemble, n, seed, t)) for t in range(start, stop)]


def resolve_workers(workers: int | None) -> int:
    """Explicit value, else ``SPACINGLAB_WORKERS``, else 1."""
    if workers is None:
        workers = int(os.environ.get("SPACINGLAB_WORKERS", "1"))
    if workers < 1:
        raise ValueError("workers must be positive")
    return workers


def run_trials(
    ensemble: Ensemble,
    n: int,
    seed: int,
    trials: int,
    statistic: Callable[[Spectrum], float | np.ndarray],
    workers: int | None = None,
) -> np.ndarray:
    """Apply ``statistic`` to spectra of trials ``0..trials-1``, in trial order."""
    seed = check_seed(seed)
    workers = resolve_workers(workers)
    ensemble = Ensemble(ensemble)
    if workers == 1:
        out = _run_chunk((ensemble, n, seed, 0, trials, statistic))
    else:
        bounds = np.linspace(0, trials, 4 * workers + 1).astype(int)
        tasks = [(ensemble, n, seed, int(a), int(b), statistic) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = [x for chunk in pool.map(_run_chunk, tasks) for x in chunk]
    return np.asarray(out, dtype=float)


@dataclass(frozen=True)
class TailResult:
    betas: np.ndarray
    tail: np.ndarray
    se: np.ndarray
    trials: int
    factor: float


def tail_experiment(
    ensemble: Ensemble,
    n: int,
    window: Interval,
    betas: Sequence[float],
    trials: int,
    seed: int,
    workers: int | None = None,
) -> TailResult:
    """Empirical ``Pr(rescaled Z_n > beta)`` with binomial standard errors."""
    if trials < 100:
        raise ValueError("tail_experiment needs at least 100 trials")
    factor = rescale_factor(ensemble, n, window)
    z = run_trials(ensemble, n, seed, trials, ClosestSpacing(window), workers)
    betas = np.asarray(betas, dtype=float)
    tail = np.array([np.mean(z * factor > b) for b in betas])
    return TailResult(betas, tail, np.sqrt(tail * (1.0 - tail) / trials), trials, factor)
