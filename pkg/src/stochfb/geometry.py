"""Closed convex sets: membership, projection, distance, normal cones.

All set operations accept arrays of shape ``(N,)`` or ``(M, N)`` and act on
the last axis, so diagnostics can project whole trajectories at once.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .errors import ConstructionError, InfeasibilityError
from .values import BoxSet, RaySet, SingletonSet, SubspaceSet, ValueSet

# Points this close to the closure count as members.
BOUNDARY_TOL = 1e-12


class Domain(ABC):
    """A closed convex subset of R^N."""

    dimension: int

    @abstractmethod
    def project(self, x: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the set."""

    @abstractmethod
    def normal_cone(self, x: np.ndarray, atol: float = 1e-9) -> ValueSet:
        """Normal cone at a member point (activity detected within atol)."""

    @abstractmethod
    def interior_margin(self, x: np.ndarray) -> float:
        """Signed depth of x inside the set; negative outside, -inf if the
        interior is empty."""

    @property
    def is_full(self) -> bool:
        return False

    def distance(self, x: np.ndarray) -> np.ndarray | float:
        d = np.linalg.norm(np.asarray(x, float) - self.project(x), axis=-1)
        return float(d) if d.ndim == 0 else d

    def contains(self, x: np.ndarray, tol: float = BOUNDARY_TOL) -> bool:
        return bool(np.all(self.distance(x) <= tol))


class FullSpace(Domain):
    def __init__(self, dimension: int):
        self.dimension = int(dimension)

    @property
    def is_full(self) -> bool:
        return True

    def project(self, x):
        return np.array(x, float, copy=True)

    def normal_cone(self, x, atol=1e-9):
        return SingletonSet(np.zeros(self.dimension))

    def interior_margin(self, x):
        return np.inf

    def __repr__(self):
        return f"FullSpace({self.dimension})"


class Box(Domain):
    """Coordinate box [lo, hi]; infinite bounds give orthants and rays."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, float)
        self.hi = np.asarray(hi, float)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ConstructionError("box bounds must be 1-d arrays of equal length")
        if np.any(self.lo > self.hi):
            raise ConstructionError("box has lo > hi in some coordinate")
        self.dimension = self.lo.size

    def project(self, x):
        return np.clip(np.asarray(x, float), self.lo, self.hi)

    def normal_cone(self, x, atol=1e-9):
        x = np.asarray(x, float)
        lo = np.where(np.abs(x - self.hi) <= atol, 0.0, -np.inf)
        hi = np.where(np.abs(x - self.lo) <= atol, 0.0, np.inf)
        # interior coordinate: both faces inactive -> {0}
        inactive = (np.abs(x - self.lo) > atol) & (np.abs(x - self.hi) > atol)
        lo = np.where(inactive, 0.0, lo)
        hi = np.where(inactive, 0.0, hi)
        # degenerate coordinate lo == hi: whole line
        flat = self.hi - self.lo <= atol
        lo = np.where(flat, -np.inf, lo)
        hi = np.where(flat, np.inf, hi)
        return BoxSet(lo, hi)

    def interior_margin(self, x):
        x = np.asarray(x, float)
        return float(np.min(np.minimum(x - self.lo, self.hi - x)))

    def __repr__(self):
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"


class Halfspace(Domain):
    """{x : <a, x> <= c}."""

    def __init__(self, a, c: float):
        self.a = np.asarray(a, float)
        self.c = float(c)
        na = np.linalg.norm(self.a)
        if na == 0.0:
            raise ConstructionError("halfspace normal must be nonzero")
        self._unit = self.a / na
        self._norm = na
        self.dimension = self.a.size

    def project(self, x):
        x = np.asarray(x, float)
        excess = np.maximum(x @ self.a - self.c, 0.0) / self._norm ** 2
        return x - excess[..., None] * self.a

    def normal_cone(self, x, atol=1e-9):
        if abs(float(np.asarray(x, float) @ self.a) - self.c) <= atol * self._norm:
            return RaySet(self._unit)
        return SingletonSet(np.zeros(self.dimension))

    def interior_margin(self, x):
        return float((self.c - np.asarray(x, float) @ self.a) / self._norm)

    def __repr__(self):
        return f"Halfspace({self.a.tolist()}, {self.c})"


class Ball(Domain):
    def __init__(self, center, radius: float):
        self.center = np.asarray(center, float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ConstructionError("ball radius must be positive")
        self.dimension = self.center.size

    def project(self, x):
        x = np.asarray(x, float)
        d = x - self.center
        r = np.linalg.norm(d, axis=-1)
        scale = np.where(r > self.radius, self.radius / np.maximum(r, 1e-300), 1.0)
        return self.center + scale[..., None] * d

    def normal_cone(self, x, atol=1e-9):
        d = np.asarray(x, float) - self.center
        r = float(np.linalg.norm(d))
        if abs(r - self.radius) <= atol and r > 0:
            return RaySet(d / r)
        return SingletonSet(np.zeros(self.dimension))

    def interior_margin(self, x):
        return float(self.radius - np.linalg.norm(np.asarray(x, float) - self.center))

    def __repr__(self):
        return f"Ball({self.center.tolist()}, {self.radius})"


class Affine(Domain):
    """anchor + span(basis); basis columns are orthonormalized at construction."""

    def __init__(self, anchor, basis):
        self.anchor = np.asarray(anchor, float)
        b = np.atleast_2d(np.asarray(basis, float))
        if b.shape[0] != self.anchor.size:
            b = b.T
        if b.shape[0] != self.anchor.size:
            raise ConstructionError("affine basis shape incompatible with anchor")
        q, r = np.linalg.qr(b)
        keep = np.abs(np.diag(r)) > 1e-12
        self.basis = q[:, keep]
        self.dimension = self.anchor.size
        self._tangent = self.basis @ self.basis.T

    def project(self, x):
        d = np.asarray(x, float) - self.anchor
        return self.anchor + d @ self._tangent.T

    def normal_cone(self, x, atol=1e-9):
        return SubspaceSet(np.eye(self.dimension) - self._tangent)

    def interior_margin(self, x):
        if self.basis.shape[1] == self.dimension:
            return np.inf
        return -np.inf

    def __repr__(self):
        return f"Affine(anchor={self.anchor.tolist()}, rank={self.basis.shape[1]})"


def dykstra_project(
    sets: list[Domain],
    x: np.ndarray,
    tol: float = 1e-10,
    max_cycles: int = 20000,
) -> np.ndarray:
    """Project onto the intersection of closed convex sets (Dykstra).

    Works on batches: x may be (N,) or (M, N). Raises InfeasibilityError
    when the sets appear not to intersect (correction terms blow up).
    """
    x = np.asarray(x, float)
    if len(sets) == 0:
        raise ValueError("need at least one set")
    if len(sets) == 1:
        return sets[0].project(x)
    y = np.array(x, copy=True)
    corrections = [np.zeros_like(y) for _ in sets]
    scale = 1.0 + float(np.max(np.linalg.norm(x, axis=-1)))
    for cycle in range(max_cycles):
        y_prev = y.copy()
        for i, s in enumerate(sets):
            z = s.project(y + corrections[i])
            corrections[i] = y + corrections[i] - z
            y = z
        change = float(np.max(np.linalg.norm(y - y_prev, axis=-1)))
        worst = max(
            float(np.max(np.asarray(s.distance(y)))) for s in sets
        )
        if change <= tol * scale and worst <= max(tol * scale, 1e-9):
            return y
        if float(np.max(np.linalg.norm(y, axis=-1))) > 1e9 * scale:
            raise InfeasibilityError("Dykstra iterates diverged; empty intersection?")
    if worst > 1e-6 * scale:
        raise InfeasibilityError(
            f"Dykstra failed to reach a common point (worst distance {worst:.2e})"
        )
    return y


def intersection_distance(sets: list[Domain], x: np.ndarray, tol: float = 1e-10):
    """Distance from x to the intersection of the given sets."""
    p = dykstra_project(sets, x, tol=tol)
    d = np.linalg.norm(np.asarray(x, float) - p, axis=-1)
    return float(d) if d.ndim == 0 else d
