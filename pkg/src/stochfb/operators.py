"""Maximal monotone operator abstraction and the resolvent machinery.

An operator atom knows its ambient dimension, its domain, an exact resolvent
formula, and a structured descriptor of its value set at any domain point.
The module-level functions wrap these with precondition checks and derived
quantities (Yosida approximation, least-norm selection, domain projection,
seeded graph sampling).
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .errors import DomainError, EmptySampleError, PreconditionError
from .geometry import BOUNDARY_TOL, Domain
from .values import ValueSet


def containment_tol(x: np.ndarray, base: float = 1e-9) -> float:
    """Absolute tolerance for containment/identity checks, scaled by 1+||x||."""
    return base * (1.0 + float(np.linalg.norm(x)))


class OperatorAtom(ABC):
    """One maximal monotone operator on R^N with exact resolvent."""

    dimension: int
    domain: Domain
    # markers from the demipositivity condition list; value is the modulus
    # where the condition carries one (strongly-monotone, cocoercive)
    demipositivity_flags: dict[str, float | None]

    @abstractmethod
    def resolvent(self, gamma: float, x: np.ndarray) -> np.ndarray:
        """(I + gamma * A)^{-1} x, exact."""

    @abstractmethod
    def value(self, x: np.ndarray) -> ValueSet:
        """The value set A(x) for x in dom(A)."""

    def selection_lipschitz(self, radius: float) -> float | None:
        """Lipschitz bound of the least-norm selection on a ball, if known."""
        return None

    def is_zero_operator(self) -> bool:
        return False


def _check_point(x) -> np.ndarray:
    x = np.asarray(x, float)
    if not np.all(np.isfinite(x)):
        raise PreconditionError("point has non-finite entries")
    return x


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not np.isfinite(gamma) or gamma <= 0:
        raise PreconditionError(f"gamma must be a positive real, got {gamma}")
    return gamma


def resolvent(op: OperatorAtom, gamma: float, x) -> np.ndarray:
    """J_gamma(x) = (I + gamma A)^{-1} x."""
    return op.resolvent(_check_gamma(gamma), _check_point(x))


def yosida(op: OperatorAtom, gamma: float, x) -> np.ndarray:
    """A_gamma(x) = (x - J_gamma(x)) / gamma."""
    gamma = _check_gamma(gamma)
    x = _check_point(x)
    return (x - op.resolvent(gamma, x)) / gamma


def least_norm(op: OperatorAtom, x) -> np.ndarray:
    """A_0(x), the projection of 0 onto the value set A(x)."""
    x = _check_point(x)
    if not op.domain.contains(x, max(BOUNDARY_TOL, containment_tol(x, 1e-12))):
        raise DomainError("least_norm requires x in dom(op)")
    return op.value(x).least_norm()


def project_domain(op: OperatorAtom, x) -> np.ndarray:
    """Euclidean projection onto clos(dom(op))."""
    return op.domain.project(_check_point(x))


def graph_sample(
    op: OperatorAtom,
    region_lo,
    region_hi,
    n: int,
    seed: int,
    max_tries: int = 200,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Draw n pairs (x, y) with y in A(x), x in region ∩ dom(op).

    Deterministic per seed. Points are drawn uniformly in the region and
    projected onto the domain; draws whose projection leaves the region are
    rejected.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    lo = np.asarray(region_lo, float)
    hi = np.asarray(region_hi, float)
    rng = np.random.default_rng(seed)
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    tries = 0
    while len(pairs) < n:
        if tries >= max_tries * n:
            raise EmptySampleError("region does not appear to intersect dom(op)")
        tries += 1
        x = lo + rng.random(op.dimension) * (hi - lo)
        x = op.domain.project(x)
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            continue
        y = op.value(x).sample(rng)
        pairs.append((x, y))
    return pairs
