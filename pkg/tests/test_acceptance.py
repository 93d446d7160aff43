"""End-to-end acceptance gate: eight numbered criteria, one test each.

Each test prints a single "criterion N: PASS/FAIL" line (visible under
pytest -s or on failure) in addition to its asserts.
"""

import filecmp
import time

import numpy as np
import scipy.linalg

from stochfb.catalog import (
    CubicGradient,
    DataLinearRegression,
    L1Subdifferential,
    NormalCone,
    QuadraticGradient,
    ScaledAtom,
    SkewLinear,
    SumWithQuadratic,
    rotation_quarter_turn,
    zero_operator,
)
from stochfb.flow import apt_deviation, integrate_flow, tail_oscillation
from stochfb.geometry import Affine, Ball, Box, Halfspace
from stochfb.operators import containment_tol
from stochfb.program import (
    RandomProgram,
    audit_b_growth,
    audit_linear_regularity,
    audit_resolvent_projection_gap,
)
from stochfb.scenarios import (
    prox_gradient_l1,
    projected_least_squares,
    run_scenario,
    scenario_config,
    scenario_oracle,
)
from stochfb.solver import run


def report(num, ok, detail=""):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def catalog_atoms():
    rng = np.random.default_rng(2024)
    m = rng.normal(size=(3, 3))
    Q = m @ m.T + 0.5 * np.eye(3)
    return [
        QuadraticGradient(Q, rng.normal(size=3)),
        L1Subdifferential(0.8, 3),
        NormalCone(Box([-1.0, -0.5, -2.0], [1.0, 0.5, 2.0])),
        NormalCone(Ball([0.3, 0.0, 0.0], 1.5)),
        NormalCone(Halfspace([1.0, 2.0, 0.0], 1.0)),
        NormalCone(Affine(rng.normal(size=3), rng.normal(size=(3, 2)))),
        SkewLinear([[0.0, 1.5, 0.0], [-1.5, 0.0, -0.3], [0.0, 0.3, 0.0]]),
        ScaledAtom(2.5, L1Subdifferential(0.4, 3)),
        SumWithQuadratic(QuadraticGradient(1.3 * np.eye(3), rng.normal(size=3)),
                         L1Subdifferential(0.6, 3)),
        DataLinearRegression(rng.normal(size=3), 1.0),
        CubicGradient(3),
    ]


def test_criterion_1_operator_laws():
    """Firm nonexpansiveness, resolvent identity, Yosida membership, and
    Yosida norm monotonicity for 1000 draws per catalog atom."""
    start = time.monotonic()
    rng = np.random.default_rng(11)
    for atom in catalog_atoms():
        for _ in range(1000):
            x = rng.uniform(-3.0, 3.0, atom.dimension)
            xp = rng.uniform(-3.0, 3.0, atom.dimension)
            g_small, g_big = sorted(rng.uniform(0.1, 2.0, 2))
            tol = containment_tol(x)
            jx = atom.resolvent(g_big, x)
            jxp = atom.resolvent(g_big, xp)
            # firm nonexpansiveness
            lhs = float(np.dot(jx - jxp, jx - jxp))
            rhs = float(np.dot(jx - jxp, x - xp))
            assert lhs <= rhs + tol, f"{atom!r}: firm nonexpansiveness"
            # resolvent identity x = J(x) + gamma * A_gamma(x)
            yos = (x - jx) / g_big
            assert np.linalg.norm(jx + g_big * yos - x) <= tol
            # Yosida membership A_gamma(x) in A(J(x))
            assert atom.value(jx).distance(yos) <= tol, f"{atom!r}: membership"
            # Yosida norm monotone nonincreasing in gamma
            yos_small = (x - atom.resolvent(g_small, x)) / g_small
            assert np.linalg.norm(yos) <= np.linalg.norm(yos_small) + tol
    elapsed = time.monotonic() - start
    report(1, elapsed < 10.0, f"(laws hold for 11 atoms, {elapsed:.1f}s)")


def test_criterion_2_rotation_counterexample():
    """Rotation iterates keep circulating while the weighted means vanish."""
    start = time.monotonic()
    cfg = scenario_config("rotation")
    oscs, means = [], []
    for seed in (1, 2, 3):
        prog = cfg.build_program(seed=seed)
        traj = run(prog, cfg.schedule, 100_000, cfg.x0, seed)
        oscs.append(tail_oscillation(traj, 0.1))
        means.append(float(np.linalg.norm(traj.final_mean)))
    elapsed = time.monotonic() - start
    ok = all(o > 0.1 for o in oscs) and all(m < 0.05 for m in means) \
        and elapsed < 30.0
    report(2, ok, f"(osc={min(oscs):.3f}, |mean|={max(means):.4f}, {elapsed:.1f}s)")


def test_criterion_3_demipositive_convergence():
    """Strongly monotone quadratic + l1: iterates reach the oracle point."""
    cfg = scenario_config("demipositive-quadratic")
    oracle = scenario_oracle("demipositive-quadratic")
    errs = []
    for seed in (1, 2, 3):
        prog = cfg.build_program(seed=seed)
        traj = run(prog, cfg.schedule, 100_000, cfg.x0, seed)
        errs.append(float(np.linalg.norm(traj.final - oracle)))
    ok = all(e < 0.05 for e in errs)
    report(3, ok, f"(max final error {max(errs):.4f})")


def test_criterion_4_constrained_scenario():
    """Random constraint projections: domain distance vanishes and the
    averaged iterate solves the constrained least-squares problem."""
    cfg = scenario_config("constrained-lsq")
    oracle = scenario_oracle("constrained-lsq")
    dds, errs = [], []
    for seed in (1, 2, 3):
        prog = cfg.build_program(seed=seed)
        traj = run(prog, cfg.schedule, 100_000, cfg.x0, seed)
        dds.append(prog.domain_distance(traj.final))
        errs.append(float(np.linalg.norm(traj.final_mean - oracle)))
    ok = all(d < 0.05 for d in dds) and all(e < 0.05 for e in errs)
    report(4, ok, f"(max dd {max(dds):.4f}, max avg error {max(errs):.4f})")


def test_criterion_5_apt_trend():
    """Interpolated-process deviations from the flow shrink along the run."""
    cfg = scenario_config("demipositive-quadratic")
    prog = cfg.build_program(seed=1)
    traj = run(prog, cfg.schedule, cfg.n_iters, cfg.x0, seed=1)
    devs = apt_deviation(traj, prog, window=2.0,
                         t_list=[5.0, 15.0, 30.0, 50.0, 65.0],
                         flow_h=cfg.flow_h, flow_tol=cfg.flow_tol)
    vals = [d for _, d in devs]
    inversions = sum(1 for a, b in zip(vals, vals[1:]) if b > a + 1e-12)
    ok = inversions <= 1 and vals[-1] < 0.1
    report(5, ok, f"(deviations {[round(v, 4) for v in vals]})")


def test_criterion_6_flow_oracles():
    """Flow integrator against closed forms, plus semigroup/nonexpansiveness."""
    tol_flow = 1e-8
    # scalar z' = -z
    scalar = RandomProgram([(1.0, QuadraticGradient(np.eye(1), [0.0]))])
    z1 = integrate_flow(scalar, [1.0], T=1.0, h=1e-3, tol=tol_flow).endpoint[0]
    ok_scalar = abs(z1 - np.exp(-1.0)) < 1e-3
    # plane rotation against the matrix exponential
    rot = RandomProgram([(1.0, rotation_quarter_turn())])
    T = np.pi / 2
    z0 = np.array([1.0, 0.0])
    end = integrate_flow(rot, z0, T=T, h=5e-4, tol=tol_flow).endpoint
    expected = scipy.linalg.expm(-rot.a_family[0][1].S * T) @ z0
    ok_rot = float(np.linalg.norm(end - expected)) < 1e-3
    # semigroup + nonexpansiveness on 50 seeded draws, times snapped to grid
    rng = np.random.default_rng(66)
    h = 0.01
    ok_props = True
    for _ in range(50):
        s = h * rng.integers(1, 30)
        t = h * rng.integers(1, 30)
        z0 = rng.uniform(-2, 2, 2)
        z0p = rng.uniform(-2, 2, 2)
        whole = integrate_flow(rot, z0, T=s + t, h=h, tol=tol_flow).endpoint
        first = integrate_flow(rot, z0, T=s, h=h, tol=tol_flow).endpoint
        relaunch = integrate_flow(rot, first, T=t, h=h, tol=tol_flow).endpoint
        ok_props &= float(np.linalg.norm(whole - relaunch)) <= 10 * tol_flow
        other = integrate_flow(rot, z0p, T=s + t, h=h, tol=tol_flow).endpoint
        ok_props &= float(np.linalg.norm(whole - other)) <= \
            float(np.linalg.norm(z0 - z0p)) + 10 * tol_flow
    ok = ok_scalar and ok_rot and ok_props
    report(6, ok, f"(scalar err {abs(z1 - np.exp(-1.0)):.1e}, "
                  f"rotation err {np.linalg.norm(end - expected):.1e})")


def test_criterion_7_audit_correctness():
    """Audits recover known geometry and reject superlinear growth."""
    # orthogonal halfspaces: regularity constant 1/sqrt(2)
    sets = [Halfspace([1.0, 0.0], 0.0), Halfspace([0.0, 1.0], 0.0)]
    rep = audit_linear_regularity(sets, [-2.0, -2.0], [2.0, 2.0], samples=4000)
    kappa = rep.estimates["kappa_hat"]
    ok_kappa = abs(kappa - 1.0 / np.sqrt(2.0)) < 0.02
    # cubic forward atom rejected with a witness
    cubic_prog = RandomProgram([(1.0, zero_operator(2))],
                               [(1.0, CubicGradient(2))])
    growth = audit_b_growth(cubic_prog, samples=2000, radius=10.0)
    ok_growth = (not growth.passed) and growth.witness is not None
    # resolvent/projection gap vanishes identically for normal cones
    cones = RandomProgram([(0.5, NormalCone(Box([-1.0, -1.0], [1.0, 1.0]))),
                           (0.5, NormalCone(Halfspace([1.0, 1.0], 0.0)))])
    grid = [np.array([2.0, 2.0]), np.array([-3.0, 0.5]), np.zeros(2)]
    gap = audit_resolvent_projection_gap(cones, grid, [1e-3, 1e-2, 1e-1])
    ok_gap = gap.estimates["max_ratio"] == 0.0
    ok = ok_kappa and ok_growth and ok_gap
    report(7, ok, f"(kappa {kappa:.4f}, cubic rejected {not growth.passed}, "
                  f"gap {gap.estimates['max_ratio']})")


def test_criterion_8_determinism(tmp_path):
    """Scenario re-runs with identical config produce byte-identical files."""
    identical = True
    for sid in ("rotation", "constrained-lsq", "lasso-random",
                "demipositive-quadratic"):
        overrides = {"n_iters": "2000", "seeds": "1,2"}
        d1 = tmp_path / f"{sid}_a"
        d2 = tmp_path / f"{sid}_b"
        run_scenario(sid, overrides, d1)
        run_scenario(sid, overrides, d2)
        names = sorted(p.name for p in d1.iterdir())
        assert names == sorted(p.name for p in d2.iterdir())
        match, mismatch, errors = filecmp.cmpfiles(d1, d2, names, shallow=False)
        identical &= not mismatch and not errors and len(match) == len(names)
    report(8, identical, "(all four scenarios byte-identical on re-run)")


def test_oracles_agree_with_each_other():
    """Cross-check: the two deterministic reference solvers agree on an
    unconstrained quadratic, guarding the oracles used above."""
    rng = np.random.default_rng(77)
    a = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    gram, rhs = a.T @ a / 30, a.T @ y / 30
    via_prox = prox_gradient_l1(gram, -rhs, 0.0)
    from stochfb.geometry import FullSpace
    via_proj = projected_least_squares([FullSpace(4)], a, y)
    direct = np.linalg.solve(gram, rhs)
    assert np.allclose(via_prox, direct, atol=1e-7)
    assert np.allclose(via_proj, direct, atol=1e-7)
