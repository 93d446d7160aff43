"""The stochastic forward-backward iteration and its trajectory records.

One step draws an operator pair, moves forward along the sampled forward
selection, then applies the sampled resolvent:

    x_next = J_gamma(xi, x - gamma * b(xi, x))

Step sizes follow a power schedule whose exponent keeps the sequence square
summable but not summable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, PreconditionError
from .program import RandomProgram

DIVERGENCE_GUARD = 1e12


@dataclass(frozen=True)
class Schedule:
    """gamma_n = gamma0 * (n + shift)^(-exponent) for n = 1, 2, ...

    The exponent must lie in (1/2, 1] so the sequence is square summable
    without being summable, and the consecutive-step ratio tends to one.
    """

    gamma0: float = 1.0
    exponent: float = 0.75
    shift: float = 0.0

    def __post_init__(self):
        if self.gamma0 <= 0:
            raise PreconditionError("gamma0 must be positive")
        if not (0.5 < self.exponent <= 1.0):
            raise PreconditionError("exponent must lie in (1/2, 1]")
        if self.shift < 0:
            raise PreconditionError("shift must be nonnegative")

    def gamma(self, n: int) -> float:
        """Step used to produce iterate n (n >= 1)."""
        return self.gamma0 * (n + self.shift) ** (-self.exponent)

    def gammas(self, n_iters: int) -> np.ndarray:
        ns = np.arange(1, n_iters + 1, dtype=float)
        return self.gamma0 * (ns + self.shift) ** (-self.exponent)


@dataclass
class Trajectory:
    """Recorded run: iterates, steps, cumulative times, innovations.

    ``indices`` lists the iteration numbers actually stored (thinning keeps
    every ``stride``-th iterate plus the final 10%); ``records`` always keeps
    every innovation so a run can be replayed exactly.
    """

    schedule: Schedule
    seed: int
    n_iters: int
    indices: np.ndarray          # stored iteration numbers, always includes 0 and n
    points: np.ndarray           # (len(indices), N)
    taus: np.ndarray             # cumulative times at stored indices (tau_0 = 0)
    gammas: np.ndarray           # gamma_n at stored indices (gamma_0 = 0 by convention)
    means: np.ndarray            # running weighted means at stored indices (row 0 = x_0)
    records: np.ndarray          # (n_iters, 2) sampled (ia, ib) per step
    thinned: bool = False

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]

    @property
    def final_mean(self) -> np.ndarray:
        return self.means[-1]


def step(program: RandomProgram, gamma: float, x, rng=None):
    """One forward-backward step; returns (next point, innovation record)."""
    if gamma <= 0:
        raise PreconditionError("gamma must be positive")
    x = np.asarray(x, float)
    atom_a, atom_b, record = program.sample(rng)
    forward = x - gamma * program.b_value(atom_b, x)
    return atom_a.resolvent(gamma, forward), record


def run(
    program: RandomProgram,
    schedule: Schedule,
    n_iters: int,
    x0,
    seed: int,
    store_stride: int = 1,
) -> Trajectory:
    """Run the iteration for n_iters steps, deterministic per seed.

    ``store_stride > 1`` thins storage: every stride-th iterate is kept,
    plus all of the final 10% (diagnostics that need dense tails still work,
    interpolation over thinned ranges is refused).
    """
    if n_iters < 1:
        raise PreconditionError("n_iters must be >= 1")
    if store_stride < 1:
        raise PreconditionError("store_stride must be >= 1")
    x = np.asarray(x0, float).copy()
    if x.shape != (program.dimension,):
        raise PreconditionError("x0 has the wrong dimension")
    rng = np.random.default_rng(seed)
    tail_start = n_iters - max(1, n_iters // 10)

    idx_list = [0]
    pts = [x.copy()]
    tau_list = [0.0]
    gam_list = [0.0]
    mean_list = [x.copy()]

    records = np.empty((n_iters, 2), dtype=np.int64)
    tau = 0.0
    wsum = 0.0
    wmean = np.zeros_like(x)
    for n in range(1, n_iters + 1):
        gamma = schedule.gamma(n)
        x, rec = step(program, gamma, x, rng)
        records[n - 1] = rec
        norm = float(np.linalg.norm(x))
        if not np.isfinite(norm) or norm > DIVERGENCE_GUARD:
            raise DivergenceError(n, norm)
        tau += gamma
        wsum += gamma
        wmean += (gamma / wsum) * (x - wmean)
        if store_stride == 1 or n % store_stride == 0 or n > tail_start or n == n_iters:
            idx_list.append(n)
            pts.append(x.copy())
            tau_list.append(tau)
            gam_list.append(gamma)
            mean_list.append(wmean.copy())

    return Trajectory(
        schedule=schedule,
        seed=seed,
        n_iters=n_iters,
        indices=np.array(idx_list, dtype=np.int64),
        points=np.array(pts),
        taus=np.array(tau_list),
        gammas=np.array(gam_list),
        means=np.array(mean_list),
        records=records,
        thinned=store_stride > 1,
    )


def interpolate(traj: Trajectory, t: float) -> np.ndarray:
    """Affine interpolation x(t) of the iterates at cumulative time t."""
    t = float(t)
    if t < 0 or t > traj.taus[-1] + 1e-12:
        raise PreconditionError(f"t={t} outside recorded range [0, {traj.taus[-1]}]")
    k = int(np.searchsorted(traj.taus, t, side="right")) - 1
    k = min(max(k, 0), len(traj.taus) - 1)
    if k == len(traj.taus) - 1:
        return traj.points[-1].copy()
    if traj.thinned and traj.indices[k + 1] != traj.indices[k] + 1:
        raise PreconditionError(
            "interpolation over a thinned trajectory range is refused"
        )
    gamma = traj.gammas[k + 1]
    frac = (t - traj.taus[k]) / gamma
    return traj.points[k] + frac * (traj.points[k + 1] - traj.points[k])


def averaged(traj: Trajectory) -> np.ndarray:
    """Step-weighted running means at the stored indices (row 0 = x_0)."""
    return traj.means.copy()
