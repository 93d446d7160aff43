"""Random operator pairs: sampling, mean operators, zeros, and audits.

A program is a finite mixture over operator pairs. The first family carries
the backward (resolvent) operators and may have restricted domains; the
second carries the forward operators, all with full domain. Means over the
mixture are exact weighted sums, so zero residuals and the assumption audits
need no sampling beyond the declared grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import zero_operator
from .errors import DomainError, InfeasibilityError, PreconditionError
from .geometry import Domain, dykstra_project
from .operators import OperatorAtom, containment_tol, least_norm
from .values import ValueSet, minkowski_distance


def _normalize_family(family) -> list[tuple[float, OperatorAtom]]:
    out = []
    for w, atom in family:
        w = float(w)
        if w < 0:
            raise PreconditionError("mixture weights must be nonnegative")
        out.append((w, atom))
    total = sum(w for w, _ in out)
    if out and abs(total - 1.0) > 1e-12:
        raise PreconditionError(f"mixture weights sum to {total}, expected 1")
    return out


@dataclass
class ZeroCertificate:
    """Per-atom selections whose weighted sum (nearly) vanishes at x_star."""

    x_star: np.ndarray
    phis: list[np.ndarray]
    psis: list[np.ndarray]
    residual: float


@dataclass
class AuditReport:
    """Outcome of one Monte-Carlo / exact-sum assumption check."""

    assumption: str
    estimates: dict[str, float]
    samples: int
    grid: str
    passed: bool
    seed: int | None = None
    witness: list | None = None

    def to_dict(self) -> dict:
        return {
            "assumption": self.assumption,
            "estimates": {k: float(v) for k, v in self.estimates.items()},
            "samples": self.samples,
            "grid": self.grid,
            "passed": bool(self.passed),
            "seed": self.seed,
            "witness": self.witness,
        }


class RandomProgram:
    """Finite mixture of operator pairs with a seeded innovation stream."""

    def __init__(
        self,
        a_family,
        b_family=(),
        b_selection: str = "least-norm",
        p: int = 1,
        seed: int = 0,
    ):
        self.a_family = _normalize_family(a_family)
        if not self.a_family:
            raise PreconditionError("a_family must contain at least one atom")
        self.dimension = self.a_family[0][1].dimension
        self.b_family = _normalize_family(b_family)
        for _, atom in self.b_family:
            if not atom.domain.is_full:
                raise PreconditionError("forward atoms must have full domain")
            if atom.dimension != self.dimension:
                raise PreconditionError("dimension mismatch in b_family")
        for _, atom in self.a_family:
            if atom.dimension != self.dimension:
                raise PreconditionError("dimension mismatch in a_family")
        if b_selection != "least-norm":
            raise PreconditionError("only the least-norm selection is built in")
        self.b_selection = b_selection
        self.p = int(p)
        if self.p < 1:
            raise PreconditionError("integrability exponent p must be >= 1")
        self.seed_stream = np.random.default_rng(seed)
        self._zero_b = zero_operator(self.dimension)
        self._a_cum = np.cumsum([w for w, _ in self.a_family])
        self._b_cum = np.cumsum([w for w, _ in self.b_family])
        # feasibility probe for the essential domain intersection
        self._domains = [a.domain for w, a in self.a_family if w > 0]
        try:
            probe = dykstra_project(self._domains, np.zeros(self.dimension))
        except InfeasibilityError:
            raise InfeasibilityError("essential domain intersection is empty")
        self._domain_probe = probe

    # -- geometry of the essential domain ---------------------------------

    @property
    def domains(self) -> list[Domain]:
        return list(self._domains)

    def domain_project(self, x, tol: float = 1e-10) -> np.ndarray:
        return dykstra_project(self._domains, x, tol=tol)

    def domain_distance(self, x, tol: float = 1e-10):
        x = np.asarray(x, float)
        d = np.linalg.norm(x - self.domain_project(x, tol=tol), axis=-1)
        return float(d) if d.ndim == 0 else d

    def in_domain(self, x) -> bool:
        return self.domain_distance(np.asarray(x, float)) <= containment_tol(x)

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator | None = None):
        """Draw one operator pair; returns (atom_a, atom_b, (ia, ib))."""
        rng = self.seed_stream if rng is None else rng
        ia = int(np.searchsorted(self._a_cum, rng.random(), side="right"))
        ia = min(ia, len(self.a_family) - 1)
        if self.b_family:
            ib = int(np.searchsorted(self._b_cum, rng.random(), side="right"))
            ib = min(ib, len(self.b_family) - 1)
            atom_b = self.b_family[ib][1]
        else:
            ib, atom_b = -1, self._zero_b
        return self.a_family[ia][1], atom_b, (ia, ib)

    def b_value(self, atom_b: OperatorAtom, x) -> np.ndarray:
        """The forward selection b(xi, x); least-norm by construction."""
        return atom_b.value(np.asarray(x, float)).least_norm()

    # -- mean operators ----------------------------------------------------

    def mean_b(self, x) -> np.ndarray:
        """Exact mixture mean of the forward selections."""
        x = np.asarray(x, float)
        out = np.zeros(self.dimension)
        for w, atom in self.b_family:
            if w > 0:
                out += w * self.b_value(atom, x)
        return out

    def mean_b_lipschitz(self, radius: float) -> float | None:
        total = 0.0
        for w, atom in self.b_family:
            if w == 0:
                continue
            lip = atom.selection_lipschitz(radius)
            if lip is None:
                return None
            total += w * lip
        return total

    def _mean_value_sets(self, x) -> tuple[list[ValueSet], list[float]]:
        x = np.asarray(x, float)
        sets, weights = [], []
        for w, atom in self.a_family:
            if w > 0:
                sets.append(atom.value(x))
                weights.append(w)
        for w, atom in self.b_family:
            if w > 0:
                sets.append(atom.value(x))
                weights.append(w)
        return sets, weights

    def mean_a_distance_to_zero(self, x, tol: float = 1e-10) -> float:
        """dist(0, mean-A(x) + mean-B(x)) for the finite mixture."""
        x = np.asarray(x, float)
        if not self.in_domain(x):
            raise DomainError("x is outside the essential domain")
        sets, weights = self._mean_value_sets(x)
        dist, _ = minkowski_distance(sets, np.array(weights), np.zeros(self.dimension), tol=tol)
        return dist

    def zero_certificate(self, x, tol: float = 1e-8) -> ZeroCertificate | None:
        x = np.asarray(x, float)
        if not self.in_domain(x):
            raise DomainError("x is outside the essential domain")
        sets, weights = self._mean_value_sets(x)
        dist, sels = minkowski_distance(
            sets, np.array(weights), np.zeros(self.dimension), tol=min(tol, 1e-10)
        )
        if dist > tol:
            return None
        n_a = sum(1 for w, _ in self.a_family if w > 0)
        return ZeroCertificate(
            x_star=x, phis=sels[:n_a], psis=sels[n_a:], residual=dist
        )


# -- assumption audits ------------------------------------------------------


def audit_compact_moment(
    program: RandomProgram, grid, epsilon: float, seed: int | None = None
) -> AuditReport:
    """sup over the grid of the (1+epsilon)-moment of the least-norm
    selections of the backward family; exact for finite mixtures."""
    if not (0 < epsilon <= 1):
        raise PreconditionError("epsilon must lie in (0, 1]")
    grid = [np.asarray(g, float) for g in grid]
    worst = 0.0
    for x in grid:
        if not program.in_domain(x):
            raise DomainError("grid point outside the essential domain")
        total = 0.0
        for w, atom in program.a_family:
            if w > 0:
                total += w * float(np.linalg.norm(least_norm(atom, x))) ** (1 + epsilon)
        worst = max(worst, total)
    return AuditReport(
        assumption="compact-moment",
        estimates={"sup_moment": worst, "epsilon": epsilon},
        samples=len(grid),
        grid=f"{len(grid)} points",
        passed=bool(np.isfinite(worst)),
        seed=seed,
    )


def audit_linear_regularity(
    sets: list[Domain],
    region_lo,
    region_hi,
    samples: int,
    seed: int = 0,
    denominator_floor: float = 1e-9,
) -> AuditReport:
    """kappa_hat = min over samples of max_i d(x, C_i) / d(x, ∩ C_i)."""
    lo = np.asarray(region_lo, float)
    hi = np.asarray(region_hi, float)
    rng = np.random.default_rng(seed)
    xs = lo + rng.random((samples, lo.size)) * (hi - lo)
    # feasibility probe
    dykstra_project(sets, (lo + hi) / 2.0)
    dmax = np.max(np.stack([np.asarray(s.distance(xs)) for s in sets]), axis=0)
    dint = np.linalg.norm(xs - dykstra_project(sets, xs), axis=-1)
    mask = dint > denominator_floor
    if not np.any(mask):
        kappa = 1.0
        used = 0
    else:
        kappa = float(np.min(dmax[mask] / dint[mask]))
        used = int(np.sum(mask))
    return AuditReport(
        assumption="linear-regularity",
        estimates={"kappa_hat": kappa, "quotients_used": float(used)},
        samples=samples,
        grid=f"uniform box {lo.tolist()}..{hi.tolist()}",
        passed=kappa > 0,
        seed=seed,
    )


def audit_b_growth(
    program: RandomProgram,
    samples: int,
    radius: float,
    seed: int = 0,
    bound: float | None = None,
) -> AuditReport:
    """Estimate of the affine growth constant of the forward selections.

    Reports M_hat = sup ||b(xi,x)|| / (1+||x||) over sampled x and all atoms,
    and the fourth-moment growth ratio. Without a declared bound, the audit
    fails when the constant keeps growing with the sampling radius (the
    superlinear signature), with the worst sample as witness.
    """
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    dim = program.dimension
    xs = rng.uniform(-radius, radius, (samples, dim))
    best = 0.0
    best_inner = 0.0
    witness = None
    moment_worst = 0.0
    for x in xs:
        nx = float(np.linalg.norm(x))
        ratio = 0.0
        moment = 0.0
        for w, atom in program.b_family:
            if w == 0:
                continue
            bval = float(np.linalg.norm(program.b_value(atom, x)))
            ratio = max(ratio, bval / (1.0 + nx))
            moment += w * bval**4
        moment_worst = max(moment_worst, moment / (1.0 + nx ** (2 * program.p)))
        if ratio > best:
            best, witness = ratio, x
        if nx <= radius / 2.0 * np.sqrt(dim):
            best_inner = max(best_inner, ratio)
    if bound is not None:
        passed = best <= bound
    else:
        passed = best_inner == 0.0 or best <= 2.0 * best_inner
    return AuditReport(
        assumption="b-growth",
        estimates={
            "M_hat": best,
            "M_hat_inner": best_inner,
            "fourth_moment_ratio": moment_worst,
        },
        samples=samples,
        grid=f"uniform box radius {radius}",
        passed=bool(passed),
        seed=seed,
        witness=None if witness is None else [float(v) for v in witness],
    )


def audit_resolvent_projection_gap(
    program: RandomProgram, grid, gammas, seed: int | None = None
) -> AuditReport:
    """Fourth-moment rate of the resolvent/projection gap across the grid."""
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise PreconditionError("gammas must be non-empty")
    grid = [np.asarray(g, float) for g in grid]
    worst = 0.0
    for x in grid:
        denom = 1.0 + float(np.linalg.norm(x)) ** (2 * program.p)
        for gamma in gammas:
            total = 0.0
            for w, atom in program.a_family:
                if w == 0:
                    continue
                gap = atom.resolvent(gamma, x) - atom.domain.project(x)
                total += w * float(np.linalg.norm(gap)) ** 4
            worst = max(worst, total / (gamma**4 * denom))
    return AuditReport(
        assumption="resolvent-projection-gap",
        estimates={"max_ratio": worst},
        samples=len(grid) * len(gammas),
        grid=f"{len(grid)} points x {len(gammas)} gammas",
        passed=bool(np.isfinite(worst)),
        seed=seed,
    )


def audit_interior_domain(
    program: RandomProgram, samples: int = 200, seed: int = 0
) -> AuditReport:
    """Probe for a point interior to every backward-atom domain."""
    rng = np.random.default_rng(seed)
    dim = program.dimension
    candidates = [program._domain_probe]
    pts = rng.normal(0.0, 1.0, (samples, dim))
    proj = program.domain_project(pts)
    candidates.extend(list(proj))
    best = -np.inf
    best_pt = None
    for x in candidates:
        margin = min(d.interior_margin(x) for d in program.domains)
        if margin > best:
            best, best_pt = margin, x
    return AuditReport(
        assumption="interior-nonempty",
        estimates={"best_margin": float(best)},
        samples=samples,
        grid="projected gaussian probes",
        passed=bool(best > 0),
        seed=seed,
        witness=None if best_pt is None else [float(v) for v in best_pt],
    )
