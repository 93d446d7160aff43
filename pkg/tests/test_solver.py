import numpy as np
import pytest

from stochfb.catalog import QuadraticGradient, rotation_quarter_turn, zero_operator
from stochfb.errors import DivergenceError, PreconditionError
from stochfb.program import RandomProgram
from stochfb.solver import Schedule, averaged, interpolate, run, step


def contraction_program():
    return RandomProgram([(1.0, QuadraticGradient(np.eye(2), [0.0, 0.0]))])


def test_schedule_validation():
    with pytest.raises(PreconditionError):
        Schedule(gamma0=0.0)
    with pytest.raises(PreconditionError):
        Schedule(exponent=0.5)
    with pytest.raises(PreconditionError):
        Schedule(exponent=1.1)
    with pytest.raises(PreconditionError):
        Schedule(shift=-1.0)


def test_schedule_values():
    sched = Schedule(gamma0=2.0, exponent=0.75, shift=1.0)
    assert sched.gamma(1) == pytest.approx(2.0 * 2.0**-0.75)
    gs = sched.gammas(10)
    assert gs.shape == (10,)
    assert np.all(np.diff(gs) < 0)


def test_run_deterministic_per_seed():
    prog1 = RandomProgram(
        [(0.5, QuadraticGradient(np.eye(2) * 2, [0.0, 0.0])),
         (0.5, QuadraticGradient(np.eye(2), [1.0, 0.0]))], seed=0)
    t1 = run(prog1, Schedule(), 200, [1.0, 1.0], seed=7)
    prog2 = RandomProgram(
        [(0.5, QuadraticGradient(np.eye(2) * 2, [0.0, 0.0])),
         (0.5, QuadraticGradient(np.eye(2), [1.0, 0.0]))], seed=0)
    t2 = run(prog2, Schedule(), 200, [1.0, 1.0], seed=7)
    assert np.array_equal(t1.points, t2.points)
    assert np.array_equal(t1.records, t2.records)
    t3 = run(prog2, Schedule(), 200, [1.0, 1.0], seed=8)
    assert not np.array_equal(t1.records, t3.records)


def test_deterministic_single_atom_matches_closed_form():
    # single quadratic atom: x_{n+1} = x_n / (1 + gamma_n)
    prog = contraction_program()
    sched = Schedule(gamma0=0.5)
    traj = run(prog, sched, 50, [1.0, 0.0], seed=0)
    x = np.array([1.0, 0.0])
    for n in range(1, 51):
        x = x / (1.0 + sched.gamma(n))
    assert np.allclose(traj.final, x, atol=1e-14)


def test_taus_are_cumulative_steps():
    traj = run(contraction_program(), Schedule(), 20, [1.0, 0.0], seed=0)
    assert traj.taus[0] == 0.0
    assert traj.taus[-1] == pytest.approx(np.sum(Schedule().gammas(20)))


def test_weighted_mean_matches_direct_sum():
    prog = contraction_program()
    sched = Schedule(gamma0=0.3)
    traj = run(prog, sched, 100, [2.0, -1.0], seed=3)
    gs = sched.gammas(100)
    direct = (gs[:, None] * traj.points[1:]).sum(axis=0) / gs.sum()
    assert np.allclose(traj.final_mean, direct, atol=1e-12)
    assert np.allclose(averaged(traj)[0], traj.points[0])


def test_interpolation_endpoints_and_midpoint():
    traj = run(contraction_program(), Schedule(), 10, [1.0, 0.0], seed=0)
    assert np.allclose(interpolate(traj, 0.0), traj.points[0])
    assert np.allclose(interpolate(traj, traj.taus[-1]), traj.final)
    t_mid = 0.5 * (traj.taus[1] + traj.taus[2])
    expect = 0.5 * (traj.points[1] + traj.points[2])
    assert np.allclose(interpolate(traj, t_mid), expect)
    with pytest.raises(PreconditionError):
        interpolate(traj, traj.taus[-1] + 1.0)


def test_thinning_keeps_stride_and_tail():
    traj = run(contraction_program(), Schedule(), 1000, [1.0, 0.0], seed=0,
               store_stride=100)
    assert traj.thinned
    assert traj.indices[0] == 0 and traj.indices[-1] == 1000
    # final 10% stored densely
    tail = traj.indices[traj.indices > 900]
    assert np.array_equal(tail, np.arange(901, 1001))
    with pytest.raises(PreconditionError):
        interpolate(traj, traj.taus[1] * 1.5)  # falls in a thinned gap
    assert traj.records.shape == (1000, 2)


def test_rotation_step_contracts_radius():
    prog = RandomProgram([(1.0, rotation_quarter_turn())])
    x = np.array([1.0, 0.0])
    gamma = 0.5
    y, _ = step(prog, gamma, x)
    assert np.linalg.norm(y) == pytest.approx(1.0 / np.sqrt(1 + gamma**2))


def test_divergence_guard():
    # forward step on -I with a huge step blows up monotonically
    unstable = QuadraticGradient(np.eye(1) * 100.0, [0.0])
    prog = RandomProgram([(1.0, zero_operator(1))], [(1.0, unstable)])
    with pytest.raises(DivergenceError):
        run(prog, Schedule(gamma0=1.0, exponent=0.51), 2000, [1.0], seed=0)
