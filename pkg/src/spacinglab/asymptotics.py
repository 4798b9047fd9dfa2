"""Bulk asymptotics of Hermite polynomials and orthonormal functions."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .kernels import hermite_scaled
from .quadrature import _reference

DEFAULT_EPS = 0.05


class DomainError(ValueError):
    """Argument outside the bulk where an asymptotic formula holds."""


def _check_bulk(x, n: int, eps: float):
    x = np.asarray(x, dtype=float)
    if np.any(x * x >= 2.0 * n):
        raise DomainError("x**2 / (2n) must be below 1")
    if np.any(np.abs(x) >= (math.sqrt(2.0) - eps) * math.sqrt(n)):
        raise DomainError(f"|x| must be below (sqrt(2) - {eps}) sqrt(n)")
    return x


def pr_phase(x, n: int, eps: float = DEFAULT_EPS):
    """Plancherel-Rotach phase ``Phi(x, n)`` with ``H_n ~ envelope * Re Phi``.

    ``exp(-i pi/4) (x/sqrt(2n) + i sqrt(1 - x^2/2n))**(n + 1/2) exp(-i x sqrt(2n - x^2)/2)``,
    evaluated as a single exponential of the total angle. The half-step
    ``n + 1/2`` and the ``-pi/4`` offset both come from the square root of
    the saddle-point slope; at ``x = 0`` this coincides with the variant
    carrying ``exp(i pi/4)`` and exponent ``n - 1/2``, but only this form is
    accurate to ``O(1/n)`` away from the origin.
    """
    x = _check_bulk(x, n, eps)
    theta = np.arccos(x / math.sqrt(2.0 * n))
    angle = -0.25 * math.pi + (n + 0.5) * theta - 0.5 * x * np.sqrt(2.0 * n - x * x)
    out = np.exp(1j * angle)
    return out[()] if out.ndim == 0 else out


def pr_phase_naive(x: float, n: int) -> complex:
    """Same phase via complex powers; an independent evaluation path."""
    base = complex(x / math.sqrt(2 * n), math.sqrt(1 - x * x / (2 * n)))
    tail = -0.5 * x * math.sqrt(2 * n - x * x)
    return complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4)) * base ** (n + 0.5) * complex(math.cos(tail), math.sin(tail))


def hermite_pr_approx(n: int, x, eps: float = DEFAULT_EPS):
    """Return ``(log_envelope, oscillation)`` with ``H_n(x) ~ exp(log_envelope) * oscillation``."""
    x = _check_bulk(x, n, eps)
    log_env = (
        0.5 * x * x
        + 0.5 * (n + 1) * math.log(2.0)
        + 0.5 * n * math.log(n)
        - 0.5 * n
        - 0.25 * np.log1p(-x * x / (2.0 * n))
    )
    osc = np.real(pr_phase(x, n, eps))
    if np.ndim(log_env) == 0:
        return float(log_env), float(osc)
    return log_env, osc


def pr_error(n: int, x: float, eps: float = DEFAULT_EPS) -> float:
    """Envelope-normalized error ``|H_n(x) / envelope - Re Phi(x, n)|``."""
    log_env, osc = hermite_pr_approx(n, x, eps)
    pair = hermite_scaled(n, x)
    return abs(pair.h_n * math.exp(pair.log_scale - log_env) - osc)


def pr_error_amplitude(n: int, w: float, samples: int = 97, eps: float = DEFAULT_EPS) -> float:
    """Largest :func:`pr_error` over one local period around ``x = w sqrt(n)``.

    The error oscillates with the phase, so its amplitude rather than a
    point value is what decays like ``1/n``.
    """
    x0 = w * math.sqrt(n)
    period = 2.0 * math.pi / math.sqrt(2.0 * n - x0 * x0)
    xs = x0 + period * np.linspace(-0.5, 0.5, samples)
    return max(pr_error(n, float(x), eps) for x in xs)


def pr_ratio(x, n: int, eps: float = DEFAULT_EPS):
    """``(x + i sqrt(2n - x^2)) / sqrt(2n)``, the step ``Phi(x, n+1) / Phi(x, n)``."""
    x = _check_bulk(x, n, eps)
    out = (x + 1j * np.sqrt(2.0 * n - x * x)) / math.sqrt(2.0 * n)
    return out[()] if out.ndim == 0 else out


def semicircle_density(n: int, x):
    """``(sqrt(2n)/pi) sqrt(1 - x^2/2n)``, zero outside the support."""
    x = np.asarray(x, dtype=float)
    out = math.sqrt(2.0 * n) / math.pi * np.sqrt(np.clip(1.0 - x * x / (2.0 * n), 0.0, None))
    return out[()] if out.ndim == 0 else out


def unimodular_identity_residual(u: complex, v: complex) -> float:
    """``Re[uv]^2 - Re[u] Re[uv^2] - Im[v]^2``, zero for unimodular u, v."""
    return (u * v).real ** 2 - u.real * (u * v * v).real - v.imag**2


# ---------------------------------------------------------------------------
# One-cut equilibrium measures


@dataclass
class EquilibriumMeasure:
    """Density ``psi`` supported on ``[a, b]`` with a square-root vanishing at ``b``."""

    a: float
    b: float
    density: Callable[[np.ndarray], np.ndarray]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def _tail(self, z: float, order: int) -> float:
        # s = b - u^2 removes the square-root behaviour at b.
        top = math.sqrt(self.b - z)
        x, w = _reference(order)
        u = 0.5 * top * (x + 1.0)
        return float(np.sum(0.5 * top * w * self.density(self.b - u * u) * 2.0 * u))

    def tail_mass(self, z: float) -> float:
        """``int_z^b psi``; memoized per ``z``."""
        z = float(z)
        with self._lock:
            hit = self._cache.get(z)
        if hit is not None:
            return hit
        coarse, fine = self._tail(z, 32), self._tail(z, 64)
        if abs(coarse - fine) > 1e-10:
            fine = self._tail(z, 128)
        with self._lock:
            self._cache.setdefault(z, fine)
        return fine

    def total_mass(self, order: int = 200) -> float:
        # x = a + (b-a)(1 - cos t)/2 smooths square-root edges at both ends.
        x, w = _reference(order)
        t = 0.5 * math.pi * (x + 1.0)
        half = 0.5 * (self.b - self.a)
        xs = self.a + half * (1.0 - np.cos(t))
        return float(np.sum(0.5 * math.pi * w * self.density(xs) * half * np.sin(t)))


def semicircle_measure() -> EquilibriumMeasure:
    """Equilibrium measure of ``V(x) = x^2``: ``sqrt(2 - x^2)/pi`` on ``[-sqrt2, sqrt2]``."""
    r = math.sqrt(2.0)
    return EquilibriumMeasure(-r, r, lambda x: np.sqrt(np.clip(2.0 - np.asarray(x) ** 2, 0.0, None)) / math.pi)


def semicircle_tail_mass(z: float) -> float:
    """Closed form of ``int_z^sqrt2 sqrt(2 - s^2)/pi ds``."""
    return (0.5 * math.pi - 0.5 * z * math.sqrt(2.0 - z * z) - math.asin(z / math.sqrt(2.0))) / math.pi


class EtaIndex(str, Enum):
    N = "n"
    N_MINUS_1 = "n-1"


def uue_eta_asymptotic(
    measure: EquilibriumMeasure,
    n: int,
    index: EtaIndex | str,
    k: int,
    z: float,
    eps: float = DEFAULT_EPS,
) -> float:
    """Leading-order k-th derivative of ``eta_n`` or ``eta_{n-1}`` for weight ``exp(-n V)``.

    ``(n pi psi)^k sqrt(2/((b-a) pi)) Re[(-i)^k exp(i n pi T) (c r + exp(-i pi/4) / r)]``
    with ``T = int_z^b psi``, ``r = ((b-z)/(z-a))^(1/4)``, ``c = exp(i pi/4)``
    for index ``n`` and ``c = exp(-3i pi/4)`` for ``n-1``. The factor
    ``(-i)^k`` is the derivative of the phase, since ``dT/dz = -psi``.
    """
    index = EtaIndex(index)
    a, b = measure.a, measure.b
    if not (a + eps <= z <= b - eps):
        raise DomainError(f"z must lie in [a + {eps}, b - {eps}]")
    psi = float(measure.density(np.asarray(z)))
    r = ((b - z) / (z - a)) ** 0.25
    c = np.exp(0.25j * math.pi) if index is EtaIndex.N else np.exp(-0.75j * math.pi)
    bracket = c * r + np.exp(-0.25j * math.pi) / r
    phase = np.exp(1j * n * math.pi * measure.tail_mass(z))
    amp = math.sqrt(2.0 / ((b - a) * math.pi))
    return float((n * math.pi * psi) ** k * amp * np.real((-1j) ** k * phase * bracket))
