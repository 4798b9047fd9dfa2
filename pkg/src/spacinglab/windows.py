"""Observation windows on the circle and on the real line."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi


class IntervalKind(str, Enum):
    ARC = "arc"
    REAL = "real"


@dataclass(frozen=True)
class Interval:
    """A window ``[lo, hi]``.

    Arcs are read on the circle, so ``arc(5, 1)`` wraps through zero and
    ``arc(0, 2*pi)`` is the whole circle. Real intervals may have infinite
    endpoints.
    """

    kind: IntervalKind
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "kind", IntervalKind(self.kind))
        if self.kind is IntervalKind.REAL and not self.lo < self.hi:
            raise ValueError(f"real interval needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.kind is IntervalKind.ARC and not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("arc endpoints must be finite")

    @classmethod
    def arc(cls, lo: float, hi: float) -> "Interval":
        return cls(IntervalKind.ARC, float(lo), float(hi))

    @classmethod
    def real(cls, lo: float, hi: float) -> "Interval":
        return cls(IntervalKind.REAL, float(lo), float(hi))

    @classmethod
    def full_circle(cls) -> "Interval":
        return cls.arc(0.0, TWO_PI)

    @classmethod
    def parse(cls, text: str, kind: IntervalKind | str) -> "Interval":
        """Parse ``"LO:HI"``; ``pi`` and ``2pi`` style tokens are accepted."""
        lo, sep, hi = text.partition(":")
        if not sep:
            raise ValueError(f"window must look like LO:HI, got {text!r}")
        return cls(IntervalKind(kind), _parse_number(lo), _parse_number(hi))

    @property
    def is_arc(self) -> bool:
        return self.kind is IntervalKind.ARC

    @property
    def is_full_circle(self) -> bool:
        return self.is_arc and self.length == TWO_PI

    @property
    def length(self) -> float:
        if self.is_arc:
            span = math.fmod(self.hi - self.lo, TWO_PI)
            if span < 0:
                span += TWO_PI
            # Equal endpoints mod 2*pi mean the whole circle.
            return TWO_PI if span == 0.0 else span
        return self.hi - self.lo

    def contains(self, x):
        """Membership test, vectorized over ``x``."""
        x = np.asarray(x, dtype=float)
        if self.is_arc:
            if self.is_full_circle:
                return np.ones(x.shape, dtype=bool)
            return np.mod(x - self.lo, TWO_PI) <= self.length
        return (x >= self.lo) & (x <= self.hi)

    def rotated(self, angle: float) -> "Interval":
        if not self.is_arc:
            raise ValueError("only arcs can be rotated")
        return Interval.arc(self.lo + angle, self.lo + angle + self.length)

    def as_text(self) -> str:
        return f"{self.lo!r}:{self.hi!r}"


def _parse_number(token: str) -> float:
    t = token.strip().lower()
    if t.endswith("pi"):
        head = t[:-2].rstrip("*")
        return (float(head) if head not in ("", "+") else (-1.0 if head == "-" else 1.0)) * math.pi
    return float(t)
