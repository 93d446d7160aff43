"""Structured descriptors for operator value sets.

Every descriptor is a closed convex set with an exact Euclidean projection.
Membership, distances and least-norm elements all reduce to that projection,
which keeps the property tests decidable.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np


class ValueSet(ABC):
    """Closed convex subset of R^N with exact projection."""

    dimension: int

    @abstractmethod
    def project(self, v: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def scale(self, c: float) -> "ValueSet":
        """The set c * S for c > 0."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, radius: float = 10.0) -> np.ndarray:
        """Draw one element (unbounded directions truncated at radius)."""

    def shift(self, u: np.ndarray) -> "ValueSet":
        return OffsetSet(self, np.asarray(u, float))

    def distance(self, v: np.ndarray) -> float:
        v = np.asarray(v, float)
        return float(np.linalg.norm(v - self.project(v)))

    def contains(self, v: np.ndarray, tol: float) -> bool:
        return self.distance(v) <= tol

    def least_norm(self) -> np.ndarray:
        return self.project(np.zeros(self.dimension))


class SingletonSet(ValueSet):
    def __init__(self, point):
        self.point = np.asarray(point, float)
        self.dimension = self.point.size

    def project(self, v):
        return self.point.copy()

    def scale(self, c):
        return SingletonSet(c * self.point)

    def sample(self, rng, radius=10.0):
        return self.point.copy()

    def __repr__(self):
        return f"SingletonSet({self.point.tolist()})"


class BoxSet(ValueSet):
    """Product of closed intervals; bounds may be infinite."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, float)
        self.hi = np.asarray(hi, float)
        self.dimension = self.lo.size

    def project(self, v):
        return np.clip(np.asarray(v, float), self.lo, self.hi)

    def scale(self, c):
        return BoxSet(c * self.lo, c * self.hi)

    def sample(self, rng, radius=10.0):
        lo = np.maximum(self.lo, -radius)
        hi = np.minimum(self.hi, radius)
        return lo + rng.random(self.dimension) * (hi - lo)

    def __repr__(self):
        return f"BoxSet({self.lo.tolist()}, {self.hi.tolist()})"


class RaySet(ValueSet):
    """{t * d : t >= 0} for a unit direction d."""

    def __init__(self, direction):
        d = np.asarray(direction, float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("ray direction must be nonzero")
        self.direction = d / n
        self.dimension = d.size

    def project(self, v):
        t = max(float(np.asarray(v, float) @ self.direction), 0.0)
        return t * self.direction

    def scale(self, c):
        return RaySet(self.direction)

    def sample(self, rng, radius=10.0):
        return float(rng.random() * radius) * self.direction

    def __repr__(self):
        return f"RaySet({self.direction.tolist()})"


class SubspaceSet(ValueSet):
    """A linear subspace given by its orthogonal projector."""

    def __init__(self, projector):
        self.projector = np.asarray(projector, float)
        self.dimension = self.projector.shape[0]

    def project(self, v):
        return self.projector @ np.asarray(v, float)

    def scale(self, c):
        return SubspaceSet(self.projector)

    def sample(self, rng, radius=10.0):
        return self.projector @ rng.normal(0.0, radius / 3.0, self.dimension)

    def __repr__(self):
        return f"SubspaceSet(rank~{int(round(np.trace(self.projector)))})"


class OffsetSet(ValueSet):
    """inner + u."""

    def __init__(self, inner: ValueSet, offset):
        self.inner = inner
        self.offset = np.asarray(offset, float)
        self.dimension = inner.dimension

    def project(self, v):
        return self.offset + self.inner.project(np.asarray(v, float) - self.offset)

    def scale(self, c):
        return OffsetSet(self.inner.scale(c), c * self.offset)

    def sample(self, rng, radius=10.0):
        return self.offset + self.inner.sample(rng, radius)

    def __repr__(self):
        return f"OffsetSet({self.inner!r}, {self.offset.tolist()})"


def minkowski_distance(
    sets: list[ValueSet],
    weights: np.ndarray,
    offset: np.ndarray,
    tol: float = 1e-10,
    max_iters: int = 100_000,
) -> tuple[float, list[np.ndarray]]:
    """dist(0, sum_i w_i S_i + offset) with the attaining selections.

    Projected gradient on the block variables v_i in S_i minimizing
    ||sum w_i v_i + offset||^2. Returns (distance, [v_i]).
    """
    weights = np.asarray(weights, float)
    offset = np.asarray(offset, float)
    sels = [s.least_norm() for s in sets]
    if not sets:
        return float(np.linalg.norm(offset)), []
    step = 1.0 / float(np.sum(weights**2) + 1e-300)
    resid = sum(w * v for w, v in zip(weights, sels)) + offset
    scale = 1.0 + float(np.linalg.norm(offset))
    for _ in range(max_iters):
        moved = 0.0
        for i, (w, s) in enumerate(zip(weights, sets)):
            new = s.project(sels[i] - step * w * resid)
            delta = new - sels[i]
            m = float(np.linalg.norm(delta))
            if m > 0:
                resid = resid + w * delta
                sels[i] = new
                moved = max(moved, m)
        if moved <= tol * scale:
            break
    return float(np.linalg.norm(resid)), sels
