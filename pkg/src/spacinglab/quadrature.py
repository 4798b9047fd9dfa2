"""Gauss-Legendre rules, single and composite."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .windows import Interval


class QuadratureResolutionError(RuntimeError):
    """Raised when a rule and its 2x refinement disagree."""


@lru_cache(maxsize=64)
def _reference(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on a real domain."""

    nodes: np.ndarray
    weights: np.ndarray
    domain: Interval

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_legendre(order: int, lo: float, hi: float) -> QuadratureRule:
    if order < 1:
        raise ValueError("order must be positive")
    x, w = _reference(order)
    half = 0.5 * (hi - lo)
    return QuadratureRule(lo + half * (x + 1.0), half * w, Interval.real(lo, hi))


def composite_gauss_legendre(breaks, order: int, max_width: float | None = None) -> QuadratureRule:
    """Gauss-Legendre panels between consecutive ``breaks``.

    Each gap is further split into equal panels no wider than ``max_width``.
    Zero-width gaps are dropped, so duplicated breakpoints are harmless.
    """
    b = np.unique(np.asarray(breaks, dtype=float))
    if b.size < 2:
        raise ValueError("need at least two distinct breakpoints")
    x, w = _reference(order)
    nodes, weights = [], []
    for lo, hi in zip(b[:-1], b[1:]):
        panels = 1 if max_width is None else max(1, math.ceil((hi - lo) / max_width))
        edges = np.linspace(lo, hi, panels + 1)
        half = 0.5 * np.diff(edges)
        nodes.append((edges[:-1, None] + half[:, None] * (x + 1.0)).ravel())
        weights.append((half[:, None] * w).ravel())
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), Interval.real(b[0], b[-1]))


def panel_nodes(lo, hi, order: int):
    """Batched single-panel rules: ``lo``/``hi`` arrays give one panel each.

    Returns nodes and weights of shape ``lo.shape + (order,)``.
    """
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    x, w = _reference(order)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w
