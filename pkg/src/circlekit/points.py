"""Points on the torus ``T^{r+1}`` and rational points indexing complete sums.

Coordinates are ordered like the columns of ``ParametricExpansion.values``:
one per multi-index in ``index_set`` followed by the discriminant coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from circlekit.forms import MultiIndex


@dataclass(frozen=True)
class ArcPoint:
    """``(alpha_j)_{j in J}`` and ``alpha_0``; reduced into ``[0, 1)`` unless ``on_torus`` is false.

    With ``on_torus=False`` the same type carries unconstrained real ``beta``
    vectors for box integrals.
    """

    alpha0: float
    alphas: Mapping[MultiIndex, float]
    on_torus: bool = True

    def __post_init__(self):
        if self.on_torus:
            object.__setattr__(self, "alpha0", float(self.alpha0) % 1.0)
            object.__setattr__(self, "alphas", {j: float(a) % 1.0 for j, a in self.alphas.items()})
        else:
            object.__setattr__(self, "alpha0", float(self.alpha0))
            object.__setattr__(self, "alphas", {j: float(a) for j, a in self.alphas.items()})
        for v in [self.alpha0, *self.alphas.values()]:
            if not math.isfinite(v):
                raise ValueError("arc point coordinates must be finite")

    @classmethod
    def from_vector(cls, index_set: Sequence[MultiIndex], vec: Sequence[float], on_torus: bool = True) -> "ArcPoint":
        vec = list(vec)
        if len(vec) != len(index_set) + 1:
            raise ValueError("vector needs r + 1 entries")
        return cls(vec[-1], dict(zip(index_set, vec[:-1])), on_torus)

    @classmethod
    def zero(cls, index_set: Sequence[MultiIndex], on_torus: bool = True) -> "ArcPoint":
        return cls(0.0, {j: 0.0 for j in index_set}, on_torus)

    def vector(self, index_set: Sequence[MultiIndex]) -> np.ndarray:
        return np.array([self.alphas[j] for j in index_set] + [self.alpha0], dtype=np.float64)

    def __neg__(self) -> "ArcPoint":
        return ArcPoint(-self.alpha0, {j: -a for j, a in self.alphas.items()}, self.on_torus)


@dataclass(frozen=True)
class RationalPoint:
    """``(a_j)_{j in J}, a_0`` over a common denominator ``q``; entries live in ``[0, q)``."""

    q: int
    a0: int
    a: Mapping[MultiIndex, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("denominator must be positive")
        object.__setattr__(self, "a0", int(self.a0) % self.q)
        object.__setattr__(self, "a", {j: int(v) % self.q for j, v in self.a.items()})

    @property
    def reduced(self) -> bool:
        """Joint gcd of every residue with ``q`` equals 1."""
        g = self.q
        for v in [self.a0, *self.a.values()]:
            g = math.gcd(g, v)
        return g == 1

    def vector(self, index_set: Sequence[MultiIndex]) -> np.ndarray:
        return np.array([self.a.get(j, 0) for j in index_set] + [self.a0], dtype=np.int64)

    def as_arc_point(self, index_set: Sequence[MultiIndex]) -> ArcPoint:
        return ArcPoint(self.a0 / self.q, {j: self.a.get(j, 0) / self.q for j in index_set})

    @classmethod
    def from_vector(cls, index_set: Sequence[MultiIndex], q: int, vec: Sequence[int]) -> "RationalPoint":
        vec = [int(v) for v in vec]
        return cls(q, vec[-1], dict(zip(index_set, vec[:-1])))


def frac_mul(alpha: float, k: np.ndarray) -> np.ndarray:
    """``alpha * k mod 1`` for exact integers ``k`` without losing the phase to cancellation.

    ``alpha`` is split into a 24-bit dyadic head, multiplied exactly in
    integers, and a tail whose product is small.
    """
    k = np.asarray(k)
    alpha = float(alpha) % 1.0
    head = math.floor(alpha * (1 << 24))
    tail = alpha - head / (1 << 24)
    if k.dtype == object:
        exact = np.array([(head * int(v)) % (1 << 24) for v in k], dtype=np.float64)
        rest = np.array([tail * float(int(v) % (1 << 60)) for v in k], dtype=np.float64)
    else:
        k64 = k.astype(np.int64)
        exact = ((k64 % (1 << 38)) * head % (1 << 24)).astype(np.float64)
        rest = tail * k64.astype(np.float64)
    return (exact / (1 << 24) + rest) % 1.0
