"""Reference semiflow of the mean inclusion, and trajectory diagnostics.

The mean dynamics z' in -(meanA + meanB)(z) are integrated by implicit
Euler: each step solves the strongly monotone subproblem

    0 in (z - z_k)/h + meanA(z) + meanB(z)

with an inner forward-backward loop (contraction, since the subproblem is
(1/h)-strongly monotone). Mixtures of several backward atoms use Dykstra
passes over the atom resolvents inside the inner loop; this requires the
atoms to be subdifferential-like, which every multi-atom scenario here is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import SUBDIFF_MIN
from .errors import FlowIntegrationError, PreconditionError
from .program import RandomProgram
from .solver import Trajectory, interpolate


@dataclass
class FlowTrajectory:
    """Grid solution of the mean differential inclusion."""

    times: np.ndarray       # 0 = s_0 < ... < s_K = T, uniform step
    points: np.ndarray      # (K+1, N)
    residuals: np.ndarray   # inner-solver residual per step
    h: float

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    def at(self, t: float) -> np.ndarray:
        """Piecewise-linear evaluation on the grid."""
        t = float(t)
        if t < -1e-12 or t > self.times[-1] + 1e-9:
            raise PreconditionError(f"t={t} outside flow range [0, {self.times[-1]}]")
        k = min(int(t / self.h), len(self.times) - 2)
        frac = (t - self.times[k]) / self.h
        return self.points[k] + frac * (self.points[k + 1] - self.points[k])


def _sum_resolvent(program: RandomProgram, s: float, u: np.ndarray,
                   tol: float, max_cycles: int = 200) -> np.ndarray:
    """Approximate resolvent of the weighted mean backward operator."""
    atoms = [(w, a) for w, a in program.a_family if w > 0]
    if len(atoms) == 1:
        return atoms[0][1].resolvent(s, u)
    for _, a in atoms:
        if SUBDIFF_MIN not in a.demipositivity_flags:
            raise FlowIntegrationError(
                "multi-atom backward mixtures need subdifferential atoms"
            )
    # Dykstra over the atom resolvents (prox of the weighted sum)
    x = u.copy()
    corrections = [np.zeros_like(u) for _ in atoms]
    scale = 1.0 + float(np.linalg.norm(u))
    for _ in range(max_cycles):
        x_prev = x.copy()
        for i, (w, a) in enumerate(atoms):
            y = a.resolvent(s * w, x + corrections[i])
            corrections[i] = x + corrections[i] - y
            x = y
        if float(np.linalg.norm(x - x_prev)) <= 0.1 * tol * scale:
            break
    return x


def _implicit_step(program: RandomProgram, zk: np.ndarray, h: float,
                   tol: float, cap: int) -> tuple[np.ndarray, float]:
    """Solve z + h*(meanA + meanB)(z) ∋ zk to the given residual."""
    atoms = [(w, a) for w, a in program.a_family if w > 0]
    b_zero = all(a.is_zero_operator() for _, a in program.b_family) or not program.b_family
    if len(atoms) == 1 and b_zero:
        return atoms[0][1].resolvent(h, zk), 0.0
    radius = float(np.linalg.norm(zk)) + 10.0
    lip_b = program.mean_b_lipschitz(radius)
    if lip_b is None:
        raise FlowIntegrationError(
            "mean forward selection has no Lipschitz bound; cannot integrate"
        )
    m = 1.0 / h
    lip_s = m + lip_b
    s = m / lip_s**2
    w = zk.copy()
    resid = np.inf
    for _ in range(cap):
        grad = (w - zk) / h + program.mean_b(w)
        w_new = _sum_resolvent(program, s, w - s * grad, tol)
        resid = float(np.linalg.norm(w_new - w)) / s
        w = w_new
        if resid <= tol:
            return w, resid
    raise FlowIntegrationError(
        f"inner solver did not reach tol={tol} (worst residual {resid:.3e})",
        worst_residual=resid,
    )


def integrate_flow(
    program: RandomProgram,
    z0,
    T: float,
    h: float,
    tol: float = 1e-8,
    inner_cap: int = 10_000,
) -> FlowTrajectory:
    """Implicit-Euler reference solution of the mean inclusion on [0, T].

    The grid step is h rounded so the grid lands exactly on T.
    """
    z0 = np.asarray(z0, float)
    if h <= 0 or h > T:
        raise PreconditionError("need 0 < h <= T")
    K = max(1, int(round(T / h)))
    h_eff = T / K
    z = program.domain_project(z0)
    times = np.linspace(0.0, T, K + 1)
    pts = np.empty((K + 1, z0.size))
    pts[0] = z
    residuals = np.empty(K)
    for k in range(K):
        z, residuals[k] = _implicit_step(program, z, h_eff, tol, inner_cap)
        pts[k + 1] = z
    return FlowTrajectory(times=times, points=pts, residuals=residuals, h=h_eff)


# -- diagnostics -------------------------------------------------------------


def apt_deviation(
    traj: Trajectory,
    program: RandomProgram,
    window: float,
    t_list,
    flow_h: float,
    flow_tol: float = 1e-8,
    grid_points: int = 101,
) -> list[tuple[float, float]]:
    """Window deviations between the interpolated process and the flow.

    For each t, the flow is re-launched from the domain projection of x(t)
    and the deviation is the max over a grid of at least grid_points window
    samples (a lower bound of the continuous sup; reported as a grid sup).
    Degenerate window <= 0 reduces to the projection distance at t.
    """
    out = []
    for t in t_list:
        t = float(t)
        x_t = interpolate(traj, t)
        z0 = program.domain_project(x_t)
        if window <= 0:
            out.append((t, float(np.linalg.norm(x_t - z0))))
            continue
        if t + window > traj.taus[-1] + 1e-9:
            raise PreconditionError("window extends past the recorded trajectory")
        h = min(flow_h, window / (grid_points - 1))
        ft = integrate_flow(program, z0, window, h, tol=flow_tol)
        dev = 0.0
        for s, z in zip(ft.times, ft.points):
            dev = max(dev, float(np.linalg.norm(interpolate(traj, min(t + s, traj.taus[-1])) - z)))
        out.append((t, dev))
    return out


def fejer_series(traj: Trajectory, x_star) -> np.ndarray:
    """||x_n - x_star|| at every stored iterate."""
    x_star = np.asarray(x_star, float)
    return np.linalg.norm(traj.points - x_star, axis=1)


def domain_distance_series(traj: Trajectory, program: RandomProgram) -> np.ndarray:
    """Distance of every stored iterate to the essential domain."""
    d = program.domain_distance(traj.points)
    return np.atleast_1d(np.asarray(d, float))


def tail_oscillation(traj: Trajectory, tail_fraction: float = 0.1) -> float:
    """Max pairwise distance among the stored iterates in the final tail."""
    if not (0 < tail_fraction < 1):
        raise PreconditionError("tail_fraction must lie in (0, 1)")
    if traj.n_iters <= 10:
        raise PreconditionError("trajectory too short for a tail estimate")
    cutoff = traj.n_iters * (1.0 - tail_fraction)
    tail = traj.points[traj.indices >= cutoff]
    if len(tail) < 2:
        return 0.0
    worst = 0.0
    chunk = 256
    for i in range(0, len(tail), chunk):
        block = tail[i : i + chunk]
        d2 = np.sum((block[:, None, :] - tail[None, :, :]) ** 2, axis=-1)
        worst = max(worst, float(np.max(d2)))
    return float(np.sqrt(worst))


@dataclass
class DiagnosticsReport:
    """Bundle of convergence diagnostics for one run."""

    apt: list[tuple[float, float]]
    fejer: np.ndarray | None
    domain_distance: np.ndarray
    tail_oscillation: float
    final_residual: float
    averaged_final_residual: float

    def summary(self) -> dict:
        return {
            "apt_deviations": [[float(t), float(d)] for t, d in self.apt],
            "tail_oscillation": float(self.tail_oscillation),
            "final_residual": float(self.final_residual),
            "averaged_final_residual": float(self.averaged_final_residual),
            "domain_distance_final": float(self.domain_distance[-1]),
        }


def diagnostics(
    traj: Trajectory,
    program: RandomProgram,
    x_star=None,
    apt_window: float = 0.0,
    apt_t: tuple = (),
    flow_h: float = 0.01,
    flow_tol: float = 1e-8,
    tail_fraction: float = 0.1,
    residual_tol: float = 1e-8,
) -> DiagnosticsReport:
    """Compute the standard diagnostic bundle for a finished run."""
    apt = (
        apt_deviation(traj, program, apt_window, apt_t, flow_h, flow_tol)
        if apt_t
        else []
    )
    fej = fejer_series(traj, x_star) if x_star is not None else None
    dser = domain_distance_series(traj, program)
    osc = tail_oscillation(traj, tail_fraction)
    final_res = program.mean_a_distance_to_zero(
        program.domain_project(traj.final), tol=residual_tol
    )
    avg_res = program.mean_a_distance_to_zero(
        program.domain_project(traj.final_mean), tol=residual_tol
    )
    return DiagnosticsReport(
        apt=apt,
        fejer=fej,
        domain_distance=dser,
        tail_oscillation=osc,
        final_residual=final_res,
        averaged_final_residual=avg_res,
    )
