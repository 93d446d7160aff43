"""Concrete operator atoms with exact resolvents.

Covers gradients of quadratics, l1 subdifferentials, normal cones of the
geometry module's sets, skew-linear operators (monotone but not
subdifferentials), positive rescalings, quadratic-plus-atom sums, per-sample
linear regression gradients, and a cubic gradient used to exercise growth
audits.
"""

from __future__ import annotations

import numpy as np

from .errors import ConstructionError, DomainError
from .geometry import Box, Domain, FullSpace
from .operators import OperatorAtom, containment_tol
from .values import BoxSet, SingletonSet, ValueSet

SUBDIFF_MIN = "subdifferential-with-minimum"
IDENTITY_MINUS_NONEXPANSIVE = "identity-minus-nonexpansive"
NONEMPTY_INTERIOR_ZEROS = "nonempty-interior-zeros"
THREE_MONOTONE = "three-monotone"
STRONGLY_MONOTONE = "strongly-monotone"
COCOERCIVE = "cocoercive"


def soft_threshold(x: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def prox_l1(lam: float, gamma: float, x) -> np.ndarray:
    """Proximity operator of lam * ||.||_1 with step gamma."""
    if lam < 0:
        raise ConstructionError("l1 weight must be nonnegative")
    if gamma <= 0:
        raise ConstructionError("gamma must be positive")
    return soft_threshold(np.asarray(x, float), gamma * lam)


class QuadraticGradient(OperatorAtom):
    """x -> Qx + q for symmetric PSD Q (gradient of a convex quadratic)."""

    def __init__(self, Q, q):
        self.q = np.asarray(q, float)
        self.dimension = self.q.size
        self.Q = np.zeros((self.dimension, self.dimension)) if Q is None \
            else np.asarray(Q, float)
        if self.Q.shape != (self.dimension, self.dimension):
            raise ConstructionError("Q shape incompatible with q")
        self.domain = FullSpace(self.dimension)
        eig = np.linalg.eigvalsh((self.Q + self.Q.T) / 2.0)
        self._lmin, self._lmax = float(eig[0]), float(eig[-1])
        flags: dict[str, float | None] = {THREE_MONOTONE: None}
        if self._lmax > 0:
            flags[COCOERCIVE] = 1.0 / self._lmax
        if self._lmin > 1e-12:
            flags[STRONGLY_MONOTONE] = self._lmin
        # minimum attained iff -q lies in range(Q) (or the atom is affine-free)
        sol, *_ = np.linalg.lstsq(self.Q, -self.q, rcond=None)
        if np.linalg.norm(self.Q @ sol + self.q) <= 1e-10 * (1 + np.linalg.norm(self.q)):
            flags[SUBDIFF_MIN] = None
        self.demipositivity_flags = flags

    def resolvent(self, gamma, x):
        rhs = x - gamma * self.q
        return np.linalg.solve(np.eye(self.dimension) + gamma * self.Q, rhs)

    def value(self, x) -> ValueSet:
        return SingletonSet(self.Q @ np.asarray(x, float) + self.q)

    def selection_lipschitz(self, radius):
        return self._lmax

    def is_zero_operator(self):
        return self._lmax <= 1e-15 and float(np.linalg.norm(self.q)) == 0.0

    def __repr__(self):
        return f"QuadraticGradient(dim={self.dimension})"


def zero_operator(dimension: int) -> QuadraticGradient:
    return QuadraticGradient(None, np.zeros(dimension))


class L1Subdifferential(OperatorAtom):
    """The subdifferential of lam * ||.||_1."""

    def __init__(self, lam: float, dimension: int):
        if lam < 0:
            raise ConstructionError("l1 weight must be nonnegative")
        self.lam = float(lam)
        self.dimension = int(dimension)
        self.domain = FullSpace(self.dimension)
        self.demipositivity_flags = {SUBDIFF_MIN: None, THREE_MONOTONE: None}

    def resolvent(self, gamma, x):
        return soft_threshold(x, gamma * self.lam)

    def value(self, x) -> ValueSet:
        x = np.asarray(x, float)
        sgn = np.sign(x) * self.lam
        lo = np.where(x == 0.0, -self.lam, sgn)
        hi = np.where(x == 0.0, self.lam, sgn)
        return BoxSet(lo, hi)

    def __repr__(self):
        return f"L1Subdifferential(lam={self.lam}, dim={self.dimension})"


class NormalCone(OperatorAtom):
    """N_C for a geometry-module set C; resolvent is the projection."""

    def __init__(self, domain: Domain):
        self.domain = domain
        self.dimension = domain.dimension
        self.demipositivity_flags = {SUBDIFF_MIN: None, THREE_MONOTONE: None}

    def resolvent(self, gamma, x):
        return self.domain.project(x)

    def value(self, x) -> ValueSet:
        x = np.asarray(x, float)
        tol = containment_tol(x)
        if not self.domain.contains(x, tol):
            raise DomainError("normal cone evaluated outside its set")
        return self.domain.normal_cone(x, atol=tol)

    def __repr__(self):
        return f"NormalCone({self.domain!r})"


class SkewLinear(OperatorAtom):
    """x -> Sx for skew-symmetric S; monotone but not a subdifferential."""

    def __init__(self, S):
        self.S = np.asarray(S, float)
        if self.S.ndim != 2 or self.S.shape[0] != self.S.shape[1]:
            raise ConstructionError("S must be square")
        if float(np.max(np.abs(self.S + self.S.T))) > 1e-12:
            raise ConstructionError("S must be skew-symmetric within 1e-12")
        self.dimension = self.S.shape[0]
        self.domain = FullSpace(self.dimension)
        self.demipositivity_flags = {}
        self._opnorm = float(np.linalg.norm(self.S, 2))

    def resolvent(self, gamma, x):
        return np.linalg.solve(np.eye(self.dimension) + gamma * self.S, x)

    def value(self, x) -> ValueSet:
        return SingletonSet(self.S @ np.asarray(x, float))

    def selection_lipschitz(self, radius):
        return self._opnorm

    def __repr__(self):
        return f"SkewLinear(dim={self.dimension})"


def rotation_quarter_turn() -> SkewLinear:
    """The plane rotation by a quarter turn; its only zero is the origin,
    yet orbits of the induced flow circle forever."""
    return SkewLinear([[0.0, -1.0], [1.0, 0.0]])


class ScaledAtom(OperatorAtom):
    """c * A for c > 0; resolvent via J_{c*gamma} of the inner atom."""

    def __init__(self, c: float, inner: OperatorAtom):
        if c <= 0:
            raise ConstructionError("scale factor must be positive")
        self.c = float(c)
        self.inner = inner
        self.dimension = inner.dimension
        self.domain = inner.domain
        flags = dict(inner.demipositivity_flags)
        if STRONGLY_MONOTONE in flags and flags[STRONGLY_MONOTONE] is not None:
            flags[STRONGLY_MONOTONE] = flags[STRONGLY_MONOTONE] * self.c
        if COCOERCIVE in flags and flags[COCOERCIVE] is not None:
            flags[COCOERCIVE] = flags[COCOERCIVE] / self.c
        self.demipositivity_flags = flags

    def resolvent(self, gamma, x):
        return self.inner.resolvent(self.c * gamma, x)

    def value(self, x) -> ValueSet:
        return self.inner.value(x).scale(self.c)

    def selection_lipschitz(self, radius):
        inner = self.inner.selection_lipschitz(radius)
        return None if inner is None else self.c * inner

    def __repr__(self):
        return f"ScaledAtom({self.c}, {self.inner!r})"


class SumWithQuadratic(OperatorAtom):
    """(Qx + q) + A(x) with an exact resolvent.

    Supported closed forms:
      * inner atom single-valued linear (quadratic or skew): one joint solve;
      * Q = c*I: shift-and-rescale reduction to the inner resolvent.
    """

    def __init__(self, quad: QuadraticGradient, inner: OperatorAtom):
        if quad.dimension != inner.dimension:
            raise ConstructionError("dimension mismatch in sum")
        self.quad = quad
        self.inner = inner
        self.dimension = quad.dimension
        self.domain = inner.domain
        eye = np.eye(self.dimension)
        self._linear_inner = isinstance(inner, (QuadraticGradient, SkewLinear))
        c = float(quad.Q[0, 0]) if self.dimension else 0.0
        self._iso = float(np.max(np.abs(quad.Q - c * eye))) <= 1e-12
        self._iso_c = c
        if not (self._linear_inner or self._iso):
            raise ConstructionError(
                "SumWithQuadratic needs an isotropic Q or a linear inner atom"
            )
        flags = dict(inner.demipositivity_flags)
        alpha = flags.get(STRONGLY_MONOTONE) or 0.0
        if alpha + quad._lmin > 1e-12:
            flags[STRONGLY_MONOTONE] = alpha + quad._lmin
        if SUBDIFF_MIN in flags and SUBDIFF_MIN not in quad.demipositivity_flags:
            del flags[SUBDIFF_MIN]
        self.demipositivity_flags = flags

    def resolvent(self, gamma, x):
        if self._linear_inner:
            if isinstance(self.inner, QuadraticGradient):
                m_mat, m_vec = self.inner.Q, self.inner.q
            else:
                m_mat, m_vec = self.inner.S, np.zeros(self.dimension)
            lhs = np.eye(self.dimension) + gamma * (self.quad.Q + m_mat)
            return np.linalg.solve(lhs, x - gamma * (self.quad.q + m_vec))
        c = self._iso_c
        scale = 1.0 + gamma * c
        return self.inner.resolvent(gamma / scale, (x - gamma * self.quad.q) / scale)

    def value(self, x) -> ValueSet:
        x = np.asarray(x, float)
        return self.inner.value(x).shift(self.quad.Q @ x + self.quad.q)

    def selection_lipschitz(self, radius):
        inner = self.inner.selection_lipschitz(radius)
        return None if inner is None else inner + self.quad._lmax

    def __repr__(self):
        return f"SumWithQuadratic({self.quad!r}, {self.inner!r})"


class DataLinearRegression(OperatorAtom):
    """Gradient of the half squared residual of one sample: (⟨a,x⟩ - y) a."""

    def __init__(self, a, y: float):
        self.a = np.asarray(a, float)
        self.y = float(y)
        self.dimension = self.a.size
        self.domain = FullSpace(self.dimension)
        self._na2 = float(self.a @ self.a)
        flags: dict[str, float | None] = {SUBDIFF_MIN: None, THREE_MONOTONE: None}
        if self._na2 > 0:
            flags[COCOERCIVE] = 1.0 / self._na2
        self.demipositivity_flags = flags

    def resolvent(self, gamma, x):
        # Sherman-Morrison solve of (I + gamma a a^T) z = x + gamma y a
        w = x + gamma * self.y * self.a
        return w - (gamma * float(self.a @ w) / (1.0 + gamma * self._na2)) * self.a

    def value(self, x) -> ValueSet:
        r = float(self.a @ np.asarray(x, float)) - self.y
        return SingletonSet(r * self.a)

    def selection_lipschitz(self, radius):
        return self._na2

    def __repr__(self):
        return f"DataLinearRegression(dim={self.dimension})"


class CubicGradient(OperatorAtom):
    """x -> x^3 coordinatewise: monotone with superlinear growth."""

    def __init__(self, dimension: int):
        self.dimension = int(dimension)
        self.domain = FullSpace(self.dimension)
        self.demipositivity_flags = {SUBDIFF_MIN: None, THREE_MONOTONE: None}

    def resolvent(self, gamma, x):
        # unique real root of gamma z^3 + z = x per coordinate (Cardano)
        x = np.asarray(x, float)
        p = 1.0 / gamma
        q = -x / gamma
        disc = np.sqrt((q / 2.0) ** 2 + (p / 3.0) ** 3)
        return np.cbrt(-q / 2.0 + disc) + np.cbrt(-q / 2.0 - disc)

    def value(self, x) -> ValueSet:
        return SingletonSet(np.asarray(x, float) ** 3)

    def selection_lipschitz(self, radius):
        return 3.0 * radius**2

    def __repr__(self):
        return f"CubicGradient(dim={self.dimension})"


def make_atom(spec: dict) -> OperatorAtom:
    """Build an atom from a plain-dict description (the config wire format).

    Raises ConstructionError naming the violated condition.
    """
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "quadratic":
        q = np.asarray(spec.pop("vector"), float)
        Q = spec.pop("matrix", None)
        if Q is not None:
            Q = np.asarray(Q, float)
            if float(np.max(np.abs(Q - Q.T))) > 1e-10:
                raise ConstructionError("quadratic matrix must be symmetric")
            if float(np.linalg.eigvalsh((Q + Q.T) / 2)[0]) < -1e-10:
                raise ConstructionError("quadratic matrix must be PSD within 1e-10")
        atom = QuadraticGradient(Q, q)
    elif kind == "l1":
        atom = L1Subdifferential(spec.pop("lam"), spec.pop("dim"))
    elif kind == "normal-cone":
        atom = NormalCone(make_domain(spec.pop("domain")))
    elif kind == "skew":
        atom = SkewLinear(spec.pop("matrix"))
    elif kind == "scaled":
        atom = ScaledAtom(spec.pop("factor"), make_atom(spec.pop("inner")))
    elif kind == "sum-quadratic":
        quad = QuadraticGradient(spec.pop("matrix", None), spec.pop("vector"))
        atom = SumWithQuadratic(quad, make_atom(spec.pop("inner")))
    elif kind == "linreg":
        atom = DataLinearRegression(spec.pop("a"), spec.pop("y"))
    elif kind == "cubic":
        atom = CubicGradient(spec.pop("dim"))
    else:
        raise ConstructionError(f"unknown atom kind {kind!r}")
    if spec:
        raise ConstructionError(f"unused atom parameters: {sorted(spec)}")
    return atom


def make_domain(spec: dict) -> Domain:
    from . import geometry

    spec = dict(spec)
    typ = spec.pop("type", None)
    if typ == "full":
        dom = geometry.FullSpace(spec.pop("dim"))
    elif typ == "box":
        lo = [(-np.inf if v is None else v) for v in spec.pop("lo")]
        hi = [(np.inf if v is None else v) for v in spec.pop("hi")]
        dom = Box(lo, hi)
    elif typ == "halfspace":
        dom = geometry.Halfspace(spec.pop("normal"), spec.pop("offset"))
    elif typ == "ball":
        dom = geometry.Ball(spec.pop("center"), spec.pop("radius"))
    elif typ == "affine":
        dom = geometry.Affine(spec.pop("anchor"), spec.pop("basis"))
    else:
        raise ConstructionError(f"unknown domain type {typ!r}")
    if spec:
        raise ConstructionError(f"unused domain parameters: {sorted(spec)}")
    return dom
