"""Scenario files (JSON), trajectory and table CSVs.

Scenario layout::

    {
      "order": 2, "horizon": 1.0, "steps": 200,
      "set": {"kind": "moving_ball", "center": [{"linear": {"slope": 0.5, "offset": 0}}, 0.0],
              "radius": 1.0},
      "perturbation": {"kind": "affine", "A": [[0, 1], [-1, 0]], "growth_envelope": 1.0},
      "initial": {"x0": [0, 0], "u0": [0, 0]},
      "solver": {"quadrature": "left"}
    }

First-order files carry the state in ``initial.u0`` and may use the
``lifted`` perturbation kind and ``product``/``free`` set kinds, which is how
reduced problems are written out.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .dynamics import LiftedPerturbation, perturbation_from_spec
from .errors import DimensionMismatch, ScenarioError
from .geometry import set_from_spec
from .solver import QUADRATURES, FirstOrderScenario, SecondOrderScenario, TimeGrid, Trajectory


def _vector(value, field: str) -> np.ndarray:
    try:
        v = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(field, f"expected a list of numbers, got {value!r}") from None
    if v.ndim != 1 or v.size == 0:
        raise ScenarioError(field, "expected a non-empty list of numbers")
    if not np.all(np.isfinite(v)):
        raise ScenarioError(field, "entries must be finite")
    return v


def scenario_from_dict(data: dict):
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    order = data.get("order")
    if order not in (1, 2):
        raise ScenarioError("order", f"must be 1 or 2, got {order!r}")
    T = data.get("horizon")
    if not isinstance(T, (int, float)) or isinstance(T, bool) or not (T > 0 and math.isfinite(T)):
        raise ScenarioError("horizon", f"must be a positive number, got {T!r}")
    n = data.get("steps")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ScenarioError("steps", f"must be a positive integer, got {n!r}")
    quadrature = (data.get("solver") or {}).get("quadrature", "left")
    if quadrature not in QUADRATURES:
        raise ScenarioError("solver.quadrature", f"must be one of {QUADRATURES}, got {quadrature!r}")
    grid = TimeGrid(float(T), n)

    if "set" not in data:
        raise ScenarioError("set", "missing")
    set_ = set_from_spec(data["set"], "set", horizon=float(T))
    if "perturbation" not in data:
        raise ScenarioError("perturbation", "missing")
    f = perturbation_from_spec(data["perturbation"], "perturbation", dim=set_.dim,
                               allow_lifted=(order == 1))
    if f.dim != set_.dim:
        raise ScenarioError("perturbation", f"acts on R^{f.dim} but the set lives in R^{set_.dim}")
    initial = data.get("initial")
    if not isinstance(initial, dict) or "u0" not in initial:
        raise ScenarioError("initial.u0", "missing")
    u0 = _vector(initial["u0"], "initial.u0")
    if u0.shape[0] != set_.dim:
        raise ScenarioError("initial.u0", f"has length {u0.shape[0]}, the set lives in R^{set_.dim}")

    try:
        if order == 1:
            if not isinstance(f, LiftedPerturbation) and f.uses_velocity:
                raise ScenarioError("perturbation", "first-order perturbations cannot depend on a velocity")
            return FirstOrderScenario(set_, f, u0, grid, quadrature)
        if "x0" not in initial:
            raise ScenarioError("initial.x0", "missing (required for order 2)")
        x0 = _vector(initial["x0"], "initial.x0")
        if x0.shape != u0.shape:
            raise ScenarioError("initial.x0", f"has length {x0.shape[0]}, expected {u0.shape[0]}")
        return SecondOrderScenario(set_, f, x0, u0, grid, quadrature)
    except DimensionMismatch as exc:
        raise ScenarioError("initial", str(exc)) from None


def parse_scenario(path):
    """Read and fully validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(str(path), f"cannot read file: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(str(path), f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)


def scenario_to_dict(sc) -> dict:
    if isinstance(sc, SecondOrderScenario):
        set_spec, f_spec = sc.K.to_spec(), sc.f.to_spec()
        initial = {"x0": sc.x0.tolist(), "u0": sc.u0.tolist()}
    else:
        set_spec, f_spec = sc.set.to_spec(), sc.g.to_spec()
        initial = {"u0": sc.X0.tolist()}
    return {
        "order": sc.order,
        "horizon": sc.grid.T,
        "steps": sc.grid.n,
        "set": set_spec,
        "perturbation": f_spec,
        "initial": initial,
        "solver": {"quadrature": sc.quadrature},
    }


def write_scenario(sc, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=2) + "\n", encoding="utf-8")


def _fmt(v: float) -> str:
    return "%.17g" % v


def trajectory_header(traj: Trajectory) -> list[str]:
    d = traj.block
    if traj.order == 2:
        return ["t"] + [f"x_{k + 1}" for k in range(d)] + [f"u_{k + 1}" for k in range(d)]
    return ["t"] + [f"u_{k + 1}" for k in range(d)]


def write_trajectory(traj: Trajectory, path) -> None:
    """CSV, one row per node, 17 significant digits, LF line endings."""
    grid = traj.grid
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory_header(traj))
        for i in range(grid.n + 1):
            vals = traj.velocity[i] if traj.order == 1 else np.concatenate([traj.position[i], traj.velocity[i]])
            w.writerow([_fmt(grid.node(i))] + [_fmt(v) for v in vals])


def read_trajectory(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in row] for row in rows[1:]])


def write_table(header: list[str], rows: list[list], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
