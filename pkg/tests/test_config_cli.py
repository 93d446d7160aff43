import json

import numpy as np
import pytest

from stochfb.cli import main
from stochfb.config import parse_config, validate
from stochfb.errors import ConfigError, PreconditionError
from stochfb.reporting import (
    read_trajectory_csv,
    reemit_trajectory_csv,
    write_trajectory_csv,
)
from stochfb.scenarios import apply_overrides, scenario_config
from stochfb.solver import run

MINIMAL = """
schema_version = 1

[[program.a_atoms]]
weight = 1.0
kind = "quadratic"
matrix = [[1.0]]
vector = [0.0]

[run]
x0 = [1.0]
"""


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.schedule.exponent == 0.75
    assert cfg.schedule.gamma0 == 1.0
    assert cfg.seeds == [1, 2, 3]
    assert cfg.n_iters == 1000
    prog = cfg.build_program()
    assert prog.dimension == 1


def test_bad_exponent_rejected():
    bad = MINIMAL + "\n[schedule]\nexponent = 0.4\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert any("exponent" in v for v in exc.value.violations)


def test_negative_weight_named_with_path():
    bad = MINIMAL.replace("weight = 1.0", "weight = -1.0")
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert any("a_atoms[0].weight" in v for v in exc.value.violations)


def test_unknown_keys_rejected_with_paths():
    with pytest.raises(ConfigError) as exc:
        validate({"schema_version": 1, "bogus": 1,
                  "program": {"a_atoms": [{"weight": 1.0, "kind": "l1",
                                           "lam": 0.1, "dim": 2, "spin": 3}]},
                  "run": {"x0": [0.0, 0.0]}})
    msgs = "\n".join(exc.value.violations)
    assert "<root>.bogus" in msgs
    assert "spin" in msgs


def test_syntax_error_reported():
    with pytest.raises(ConfigError) as exc:
        parse_config("= not toml at all [")
    assert any("syntax" in v for v in exc.value.violations)


def test_weights_must_sum_to_one():
    bad = MINIMAL + """
[[program.a_atoms]]
weight = 0.5
kind = "l1"
lam = 0.1
dim = 1
"""
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert any("sum" in v for v in exc.value.violations)


def test_unconstructible_atom_rejected():
    bad = MINIMAL.replace("matrix = [[1.0]]", "matrix = [[-5.0]]")
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert any("PSD" in v for v in exc.value.violations)


def test_apply_overrides():
    cfg = scenario_config("rotation")
    out = apply_overrides(cfg, {"n_iters": "50", "gamma0": "0.5",
                                "seeds": "9", "x0": "0.0,2.0"})
    assert out.n_iters == 50
    assert out.schedule.gamma0 == 0.5
    assert out.schedule.exponent == cfg.schedule.exponent
    assert out.seeds == [9]
    assert np.allclose(out.x0, [0.0, 2.0])
    with pytest.raises(PreconditionError):
        apply_overrides(cfg, {"nope": "1"})


def test_trajectory_csv_round_trip(tmp_path):
    cfg = apply_overrides(scenario_config("rotation"), {"n_iters": "40"})
    prog = cfg.build_program(seed=1)
    traj = run(prog, cfg.schedule, cfg.n_iters, cfg.x0, seed=1)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj, n_b=0)
    header, rows = read_trajectory_csv(path)
    assert header == ["n", "tau", "gamma", "x_0", "x_1", "sampled_index"]
    assert len(rows) == 41
    assert reemit_trajectory_csv(header, rows) == path.read_text()


def test_cli_run_writes_artifacts(tmp_path):
    cfg_path = tmp_path / "exp.toml"
    cfg_path.write_text(MINIMAL + "\n[schedule]\ngamma0 = 0.5\n")
    out = tmp_path / "out"
    rc = main(["run", str(cfg_path), "--out", str(out),
               "--override", "n_iters=100"])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seeds"] == [1, 2, 3]
    assert (out / "trajectory_seed1.csv").exists()
    assert (out / "domain_distance_seed2.csv").exists()


def test_cli_scenario_exit_status(tmp_path):
    # far too few iterations for the averaged residual: predicate fails
    rc = main(["scenario", "rotation", "--override", "n_iters=20",
               "--override", "seeds=1", "--out", str(tmp_path / "bad")])
    assert rc == 1
    summary = json.loads((tmp_path / "bad" / "summary.json").read_text())
    assert summary["pass"] is False


def test_cli_flow_endpoint(tmp_path):
    cfg_path = tmp_path / "exp.toml"
    cfg_path.write_text(MINIMAL)
    out = tmp_path / "flow"
    rc = main(["flow", str(cfg_path), "--z0", "1.0", "--T", "1.0",
               "--h", "0.001", "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "flow_summary.json").read_text())
    assert abs(summary["endpoint"][0] - np.exp(-1.0)) < 1e-3


def test_cli_audit_writes_reports(tmp_path):
    cfg_path = tmp_path / "exp.toml"
    cfg_path.write_text(MINIMAL)
    out = tmp_path / "audit"
    rc = main(["audit", str(cfg_path), "--out", str(out)])
    assert rc == 0
    names = {p.name for p in out.glob("audit_*.json")}
    assert "audit_zero-representation.json" in names
    assert "audit_linear-regularity.json" in names
    assert len(names) == 6


def test_cli_bad_config_exit_code(tmp_path):
    cfg_path = tmp_path / "bad.toml"
    cfg_path.write_text("schema_version = 2\n")
    rc = main(["run", str(cfg_path), "--out", str(tmp_path / "o")])
    assert rc == 2
