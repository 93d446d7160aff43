"""Deterministic CSV/JSON artifact writers.

Floats are rendered with repr (shortest round-trip form), so identical
inputs produce byte-identical files and parsed files re-emit exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .solver import Trajectory


def fmt(v: float) -> str:
    return repr(float(v))


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def trajectory_header(dimension: int) -> list[str]:
    return ["n", "tau", "gamma"] + [f"x_{i}" for i in range(dimension)] + [
        "sampled_index"
    ]


def composite_index(record, n_b: int) -> int:
    """Single-integer encoding of the sampled (backward, forward) pair."""
    ia, ib = int(record[0]), int(record[1])
    if n_b <= 0:
        return ia
    return ia * n_b + ib


def write_trajectory_csv(path, traj: Trajectory, n_b: int) -> None:
    lines = [",".join(trajectory_header(traj.dimension))]
    for row, n in enumerate(traj.indices):
        n = int(n)
        idx = -1 if n == 0 else composite_index(traj.records[n - 1], n_b)
        cells = [str(n), fmt(traj.taus[row]), fmt(traj.gammas[row])]
        cells += [fmt(v) for v in traj.points[row]]
        cells.append(str(idx))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> tuple[list[str], list[list[float]]]:
    text = Path(path).read_text().strip().split("\n")
    header = text[0].split(",")
    rows = [[float(c) for c in line.split(",")] for line in text[1:]]
    return header, rows


def reemit_trajectory_csv(header: list[str], rows: list[list[float]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = [str(int(row[0])), fmt(row[1]), fmt(row[2])]
        cells += [fmt(v) for v in row[3:-1]]
        cells.append(str(int(row[-1])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_series_csv(path, index_name: str, values, index=None) -> None:
    values = np.asarray(values, float)
    if index is None:
        index = np.arange(len(values))
    lines = [f"{index_name},value"]
    for i, v in zip(index, values):
        key = str(int(i)) if float(i).is_integer() else fmt(i)
        lines.append(f"{key},{fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")
