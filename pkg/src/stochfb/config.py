"""Experiment config documents: TOML schema, validation, construction.

Documents are strict: unknown keys are rejected with their path, and every
semantic violation names the offending field.
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field

import numpy as np

from .catalog import make_atom
from .errors import ConfigError
from .program import RandomProgram
from .solver import Schedule

SCHEMA_VERSION = 1

_ATOM_KEYS = {
    "quadratic": {"matrix", "vector"},
    "l1": {"lam", "dim"},
    "normal-cone": {"domain"},
    "skew": {"matrix"},
    "scaled": {"factor", "inner"},
    "sum-quadratic": {"matrix", "vector", "inner"},
    "linreg": {"a", "y"},
    "cubic": {"dim"},
}

_DOMAIN_KEYS = {
    "full": {"dim"},
    "box": {"lo", "hi"},
    "halfspace": {"normal", "offset"},
    "ball": {"center", "radius"},
    "affine": {"anchor", "basis"},
}


@dataclass
class ExperimentConfig:
    """Validated experiment description."""

    program_spec: dict
    schedule: Schedule
    n_iters: int
    x0: np.ndarray
    seeds: list[int]
    apt_window: float = 0.0
    apt_t: list[float] = field(default_factory=list)
    flow_h: float = 0.01
    flow_tol: float = 1e-8
    tail_fraction: float = 0.1
    store_stride: int = 1
    x_star: np.ndarray | None = None
    scenario: str = "custom"

    def build_program(self, seed: int = 0) -> RandomProgram:
        spec = self.program_spec
        a_family = [(a["weight"], make_atom(a["atom"])) for a in spec["a_atoms"]]
        b_family = [(b["weight"], make_atom(b["atom"])) for b in spec.get("b_atoms", [])]
        return RandomProgram(
            a_family,
            b_family,
            b_selection=spec.get("b_selection", "least-norm"),
            p=spec.get("p", 1),
            seed=seed,
        )


def _check_unknown(table: dict, allowed: set, path: str, errs: list):
    for key in table:
        if key not in allowed:
            errs.append(f"{path}.{key}: unknown key")


def _validate_atom_spec(entry: dict, path: str, errs: list) -> dict | None:
    if not isinstance(entry, dict):
        errs.append(f"{path}: expected a table")
        return None
    allowed = {"weight", "kind"} | set().union(*_ATOM_KEYS.values())
    weight = entry.get("weight")
    if weight is None or not isinstance(weight, (int, float)):
        errs.append(f"{path}.weight: required number")
        return None
    if weight < 0:
        errs.append(f"{path}.weight: must be nonnegative")
        return None
    atom = {k: v for k, v in entry.items() if k != "weight"}
    kind = atom.get("kind")
    if kind not in _ATOM_KEYS:
        errs.append(f"{path}.kind: unknown atom kind {kind!r}")
        return None
    _check_unknown(atom, _ATOM_KEYS[kind] | {"kind"}, path, errs)
    dom = atom.get("domain")
    if kind == "normal-cone":
        if not isinstance(dom, dict) or dom.get("type") not in _DOMAIN_KEYS:
            errs.append(f"{path}.domain.type: unknown or missing")
            return None
        _check_unknown(dom, _DOMAIN_KEYS[dom["type"]] | {"type"}, f"{path}.domain", errs)
        if dom.get("type") == "box":
            # TOML has no inf literal; accept "inf"/"-inf" strings
            for side in ("lo", "hi"):
                dom[side] = [
                    float(v) if not isinstance(v, str) else float(v) for v in dom[side]
                ]
    for nested in ("inner",):
        if nested in atom:
            inner = dict(atom[nested])
            inner.setdefault("weight", 1.0)
            got = _validate_atom_spec(inner, f"{path}.{nested}", errs)
            if got is None:
                return None
            atom[nested] = got["atom"]
    return {"weight": float(weight), "atom": atom}


def validate(doc: dict) -> ExperimentConfig:
    """Validate a parsed document; raises ConfigError listing violations."""
    errs: list[str] = []
    _check_unknown(doc, {"schema_version", "program", "schedule", "run", "diagnostics"},
                   "<root>", errs)
    if doc.get("schema_version") != SCHEMA_VERSION:
        errs.append(f"schema_version: must be {SCHEMA_VERSION}")

    prog = doc.get("program", {})
    _check_unknown(prog, {"p", "b_selection", "a_atoms", "b_atoms"}, "program", errs)
    p = prog.get("p", 1)
    if not isinstance(p, int) or p < 1:
        errs.append("program.p: must be an integer >= 1")
    b_sel = prog.get("b_selection", "least-norm")
    if b_sel != "least-norm":
        errs.append("program.b_selection: only 'least-norm' is supported")
    a_atoms = []
    raw_a = prog.get("a_atoms", [])
    if not raw_a:
        errs.append("program.a_atoms: at least one atom required")
    for i, entry in enumerate(raw_a):
        got = _validate_atom_spec(entry, f"program.a_atoms[{i}]", errs)
        if got is not None:
            a_atoms.append(got)
    b_atoms = []
    for i, entry in enumerate(prog.get("b_atoms", [])):
        got = _validate_atom_spec(entry, f"program.b_atoms[{i}]", errs)
        if got is not None:
            b_atoms.append(got)
    for fam, name in ((a_atoms, "a_atoms"), (b_atoms, "b_atoms")):
        if fam:
            total = sum(e["weight"] for e in fam)
            if abs(total - 1.0) > 1e-12:
                errs.append(f"program.{name}: weights sum to {total}, expected 1")

    sched_tbl = doc.get("schedule", {})
    _check_unknown(sched_tbl, {"gamma0", "exponent", "shift"}, "schedule", errs)
    gamma0 = sched_tbl.get("gamma0", 1.0)
    exponent = sched_tbl.get("exponent", 0.75)
    shift = sched_tbl.get("shift", 0.0)
    if not (isinstance(gamma0, (int, float)) and gamma0 > 0):
        errs.append("schedule.gamma0: must be positive")
    if not (isinstance(exponent, (int, float)) and 0.5 < exponent <= 1.0):
        errs.append("schedule.exponent: must lie in (1/2, 1]")
    if not (isinstance(shift, (int, float)) and shift >= 0):
        errs.append("schedule.shift: must be nonnegative")

    run_tbl = doc.get("run", {})
    _check_unknown(run_tbl, {"n_iters", "x0", "seeds", "store_stride", "x_star"},
                   "run", errs)
    n_iters = run_tbl.get("n_iters", 1000)
    if not (isinstance(n_iters, int) and n_iters >= 1):
        errs.append("run.n_iters: must be an integer >= 1")
    x0 = run_tbl.get("x0")
    if not isinstance(x0, list) or not x0:
        errs.append("run.x0: required list of numbers")
    seeds = run_tbl.get("seeds", [1, 2, 3])
    if not (isinstance(seeds, list) and seeds and all(isinstance(s, int) for s in seeds)):
        errs.append("run.seeds: must be a non-empty list of integers")
    stride = run_tbl.get("store_stride", 1)
    if not (isinstance(stride, int) and stride >= 1):
        errs.append("run.store_stride: must be an integer >= 1")
    x_star = run_tbl.get("x_star")
    if x_star is not None and not isinstance(x_star, list):
        errs.append("run.x_star: must be a list of numbers")

    diag = doc.get("diagnostics", {})
    _check_unknown(
        diag,
        {"apt_window", "apt_t", "flow_h", "flow_tol", "tail_fraction"},
        "diagnostics", errs,
    )
    apt_window = diag.get("apt_window", 0.0)
    apt_t = diag.get("apt_t", [])
    flow_h = diag.get("flow_h", 0.01)
    flow_tol = diag.get("flow_tol", 1e-8)
    tail_fraction = diag.get("tail_fraction", 0.1)
    if not (isinstance(tail_fraction, (int, float)) and 0 < tail_fraction < 1):
        errs.append("diagnostics.tail_fraction: must lie in (0, 1)")
    if not (isinstance(flow_h, (int, float)) and flow_h > 0):
        errs.append("diagnostics.flow_h: must be positive")

    if errs:
        raise ConfigError(errs)

    cfg = ExperimentConfig(
        program_spec={"p": p, "b_selection": b_sel, "a_atoms": a_atoms,
                      "b_atoms": b_atoms},
        schedule=Schedule(gamma0=float(gamma0), exponent=float(exponent),
                          shift=float(shift)),
        n_iters=n_iters,
        x0=np.asarray(x0, float),
        seeds=list(seeds),
        apt_window=float(apt_window),
        apt_t=[float(t) for t in apt_t],
        flow_h=float(flow_h),
        flow_tol=float(flow_tol),
        tail_fraction=float(tail_fraction),
        store_stride=stride,
        x_star=None if x_star is None else np.asarray(x_star, float),
    )
    # construction probe: every referenced atom must actually build
    try:
        cfg.build_program(seed=0)
    except Exception as exc:  # reported as a schema issue with context
        raise ConfigError([f"program: {exc}"])
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a TOML config document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"syntax: {exc}"])
    return validate(doc)
