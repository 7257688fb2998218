"""Verification instruments: normal-cone residuals, a-priori bound checks,
fine-grid reference solves and convergence studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import BoundsReport
from .errors import NonUniqueProjection
from .geometry import FEASIBILITY_TOL
from .solver import (
    FirstOrderScenario,
    SecondOrderScenario,
    Trajectory,
    _quadrature_node,
    reduce_second_to_first,
    solve,
)

EXACT_ERROR = 1e-13
_LADDER = (1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0)


@dataclass
class ResidualReport:
    """Per-step normal-cone membership margins (``<= tol`` means member)."""

    margins: np.ndarray
    residual_norms: np.ndarray
    tol: float
    flagged: list[int] = field(default_factory=list)

    @property
    def max_violation(self) -> float:
        return float(max(self.margins.max(initial=0.0), 0.0))

    @property
    def passed(self) -> bool:
        return not self.flagged

    def to_dict(self) -> dict:
        return {
            "steps": int(self.margins.shape[0]),
            "tol": self.tol,
            "max_violation": self.max_violation,
            "max_residual_norm": float(self.residual_norms.max(initial=0.0)),
            "flagged_steps": list(self.flagged),
        }


def _membership_margin(set_, t, ubar, xi, rng, n_samples, r) -> float:
    """``max_z <xi, z - ubar> - |xi| |z - ubar|^2 / (2r)`` over sampled ``z`` in the set.

    The prox inequality is scaled by ``|xi|`` so that nearly-zero residuals,
    whose direction is dominated by rounding, cannot produce large margins.
    """
    nxi = float(np.linalg.norm(xi))
    direction = xi / nxi
    _, scale = set_.sampling_region(t)
    inv2r = 0.0 if math.isinf(r) else 1.0 / (2.0 * r)
    dirs = rng.standard_normal((n_samples, ubar.shape[0]))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
    lengths = scale * 10.0 ** rng.uniform(-6.0, 0.0, n_samples)
    probes = [ubar + s * scale * direction for s in _LADDER]
    probes += list(ubar + lengths[:, None] * dirs)
    best = 0.0
    for p in probes:
        try:
            z = set_.project(t, p)
        except NonUniqueProjection:
            continue
        diff = z - ubar
        best = max(best, float(xi @ diff) - nxi * inv2r * float(diff @ diff))
    return best


def residual_normal_cone(traj: Trajectory, sc, tol: float = 1e-9, n_samples: int = 24,
                         rng_seed: int = 0) -> ResidualReport:
    """Check that every discrete residual lies in the proximal normal cone.

    For second-order scenarios the residual is ``-(u_{i+1}-u_i)/h - f(t_i, x_i, u_i)``
    at ``u_{i+1}`` in ``K(t_{i+1})``; for first-order ones the same with ``g`` and
    the full state.  The quadrature node follows the trajectory's quadrature.
    """
    grid = traj.grid
    h = grid.h
    rng = np.random.default_rng(rng_seed)
    if isinstance(sc, SecondOrderScenario):
        set_ = sc.K
        vals = traj.velocity
        pos = traj.position

        def force(i, tau):
            return sc.f.evaluate(tau, pos[i], vals[i])
    else:
        set_ = sc.set
        vals = traj.states

        def force(i, tau):
            return sc.g.field(tau, vals[i])

    r = set_.prox_radius
    margins = np.zeros(grid.n)
    norms = np.zeros(grid.n)
    for i in range(grid.n):
        t1 = grid.node(i + 1)
        tau = _quadrature_node(traj.quadrature, grid.node(i), h)
        ubar = vals[i + 1]
        xi = -(ubar - vals[i]) / h - force(i, tau)
        norms[i] = np.linalg.norm(xi)
        gap = set_.distance(t1, ubar)
        if gap > FEASIBILITY_TOL:
            margins[i] = math.inf
        elif norms[i] > tol:
            margins[i] = _membership_margin(set_, t1, ubar, xi, rng, n_samples, r)
    flagged = [int(i) for i in np.flatnonzero(margins > tol)]
    return ResidualReport(margins, norms, tol, flagged)


@dataclass
class BoundCheck:
    passed: bool
    worst_f_margin: float
    worst_du_margin: float
    f_margins: np.ndarray
    du_margins: np.ndarray

    def to_dict(self) -> dict:
        return {"passed": self.passed, "worst_f_margin": self.worst_f_margin,
                "worst_du_margin": self.worst_du_margin}


def bound_check(traj: Trajectory, bounds: BoundsReport, sc, slack: float = 1.05) -> BoundCheck:
    """Nodewise ``|g(t_i, X_i)| <= (1+l) beta(t_i) * slack`` and stepwise
    ``|(X_{i+1}-X_i)/h + g(t_i, X_i)| <= ((1+l) beta(t_i) + sup|a'|) * slack``.

    Margins are ``lhs - envelope * slack``; the check passes when none is positive.
    """
    if isinstance(sc, SecondOrderScenario):
        sc = reduce_second_to_first(sc)
    grid = traj.grid
    h = grid.h
    X = traj.states
    gvals = [sc.g.field(grid.node(i), X[i]) for i in range(grid.n + 1)]
    f_m = np.array([np.linalg.norm(gvals[i]) - bounds.envelope_f(grid.node(i)) * slack
                    for i in range(grid.n + 1)])
    du_m = np.array([
        np.linalg.norm((X[i + 1] - X[i]) / h + gvals[i])
        - bounds.envelope_du_step(grid.node(i), grid.node(i + 1)) * slack
        for i in range(grid.n)
    ])
    worst_f, worst_du = float(f_m.max()), float(du_m.max(initial=-math.inf))
    return BoundCheck(worst_f <= 0.0 and worst_du <= 0.0, worst_f, worst_du, f_m, du_m)


def fine_grid_oracle(sc, refine_factor: int) -> Trajectory:
    """Same scheme on a grid with ``n * refine_factor`` steps."""
    if int(refine_factor) != refine_factor or refine_factor < 2:
        raise ValueError("refine_factor must be an integer >= 2")
    return solve(sc.with_steps(sc.grid.n * int(refine_factor)))


def compare_with_oracle(traj: Trajectory, oracle: Trajectory) -> float:
    """Sup over shared nodes of the Euclidean state error."""
    m, rem = divmod(oracle.grid.n, traj.grid.n)
    if rem or m < 1 or oracle.grid.T != traj.grid.T:
        raise ValueError("oracle grid must refine the trajectory grid by an integer factor")
    diff = traj.states - oracle.states[::m]
    return float(np.max(np.linalg.norm(diff, axis=1)))


@dataclass
class ConvergenceRow:
    n: int
    h: float
    error: float
    ratio: float | None
    order: float | str | None


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    reference_n: int

    @property
    def errors(self) -> list[float]:
        return [r.error for r in self.rows]

    @property
    def orders(self) -> list[float | str]:
        return [r.order for r in self.rows[1:]]

    def is_exact(self) -> bool:
        return all(o == "exact" for o in self.orders)

    def min_order(self) -> float:
        numeric = [o for o in self.orders if not isinstance(o, str)]
        return min(numeric) if numeric else math.inf

    def is_monotone(self, tol: float = 1e-9) -> bool:
        e = self.errors
        return all(b <= a + tol for a, b in zip(e, e[1:]))

    def to_rows(self) -> list[list]:
        out = []
        for r in self.rows:
            out.append([r.n, r.h, r.error, "" if r.ratio is None else r.ratio,
                        "" if r.order is None else r.order])
        return out


def convergence_study(sc, levels: int = 4, refine_factor_for_reference: int = 8) -> ConvergenceTable:
    """Solve at ``n, 2n, ..., 2^(levels-1) n`` and measure against a reference
    solve with ``2^levels * refine_factor_for_reference * n`` steps."""
    if levels < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    if refine_factor_for_reference < 1:
        raise ValueError("refine_factor_for_reference must be >= 1")
    n = sc.grid.n
    ref_n = 2 ** levels * refine_factor_for_reference * n
    reference = solve(sc.with_steps(ref_n))
    rows: list[ConvergenceRow] = []
    for k in range(levels):
        nk = n * 2 ** k
        err = compare_with_oracle(solve(sc.with_steps(nk)), reference)
        ratio = order = None
        if rows:
            prev = rows[-1].error
            if err < EXACT_ERROR:
                order = "exact"
                ratio = math.inf if prev >= EXACT_ERROR else None
            else:
                ratio = prev / err
                order = math.log2(ratio)
        rows.append(ConvergenceRow(nk, sc.grid.T / nk, err, ratio, order))
    return ConvergenceTable(rows, ref_n)
