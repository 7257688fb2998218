"""Catching-up time stepping for first- and second-order sweeping processes.

First order:  ``X_{i+1} = P_{C(t_{i+1})}(X_i - Q_i)`` with ``Q_i ~ int g(s, X_i) ds``.
Second order: ``u_{i+1} = P_{K(t_{i+1})}(u_i - Q_i)``, ``x_{i+1} = x_i + h u_i``,
with ``Q_i ~ int f(s, x_i, u_i) ds`` (arguments frozen at the left node).

The second-order problem reduces to the first-order one on ``K(t) x R^d``
with state ``(u, x)`` and the lifted perturbation; with the same grid and
quadrature both routes produce the same nodes.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .dynamics import LiftedPerturbation, Perturbation
from .errors import DimensionMismatch, HorizonError, InfeasibleInitialState, NonUniqueProjection
from .geometry import FEASIBILITY_TOL, MovingSet, ProductSet

QUADRATURES = ("left", "midpoint")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_i = i*T/n`` on ``[0, T]``."""

    T: float
    n: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("step count n must be a positive integer")

    @property
    def h(self) -> float:
        return self.T / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.T / self.n

    def node(self, i: int) -> float:
        return i * self.T / self.n

    def refined(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.T, self.n * factor)


def _quadrature_node(quadrature: str, t: float, h: float) -> float:
    if quadrature == "left":
        return t
    if quadrature == "midpoint":
        return t + 0.5 * h
    raise ValueError(f"unknown quadrature {quadrature!r}; expected one of {QUADRATURES}")


@dataclass(frozen=True, eq=False)
class FirstOrderScenario:
    set: MovingSet
    g: Perturbation | LiftedPerturbation
    X0: np.ndarray
    grid: TimeGrid
    quadrature: str = "left"

    def __post_init__(self):
        X0 = np.asarray(self.X0, dtype=float)
        object.__setattr__(self, "X0", X0)
        if X0.shape != (self.set.dim,):
            raise DimensionMismatch(f"X0 has shape {X0.shape}, set lives in R^{self.set.dim}")
        if self.g.dim != self.set.dim:
            raise DimensionMismatch(f"perturbation acts on R^{self.g.dim}, set lives in R^{self.set.dim}")
        _quadrature_node(self.quadrature, 0.0, 1.0)
        d = self.set.distance(0.0, X0)
        if d > FEASIBILITY_TOL:
            raise InfeasibleInitialState("initial.u0", f"X0 lies at distance {d:.3e} from C(0)")

    order = 1

    def with_steps(self, n: int) -> "FirstOrderScenario":
        return dataclasses.replace(self, grid=TimeGrid(self.grid.T, n))

    def with_quadrature(self, quadrature: str) -> "FirstOrderScenario":
        return dataclasses.replace(self, quadrature=quadrature)


@dataclass(frozen=True, eq=False)
class SecondOrderScenario:
    K: MovingSet
    f: Perturbation
    x0: np.ndarray
    u0: np.ndarray
    grid: TimeGrid
    quadrature: str = "left"

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        u0 = np.asarray(self.u0, dtype=float)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "u0", u0)
        d = self.K.dim
        if u0.shape != (d,):
            raise DimensionMismatch(f"u0 has shape {u0.shape}, K lives in R^{d}")
        if x0.shape != (d,):
            raise DimensionMismatch(f"x0 has shape {x0.shape}, expected ({d},)")
        if self.f.dim != d:
            raise DimensionMismatch(f"perturbation acts on R^{self.f.dim}, K lives in R^{d}")
        _quadrature_node(self.quadrature, 0.0, 1.0)
        dist = self.K.distance(0.0, u0)
        if dist > FEASIBILITY_TOL:
            raise InfeasibleInitialState("initial.u0", f"u0 lies at distance {dist:.3e} from K(0)")

    order = 2

    def with_steps(self, n: int) -> "SecondOrderScenario":
        return dataclasses.replace(self, grid=TimeGrid(self.grid.T, n))

    def with_quadrature(self, quadrature: str) -> "SecondOrderScenario":
        return dataclasses.replace(self, quadrature=quadrature)


@dataclass(eq=False)
class Trajectory:
    """Node values of a solve.

    ``states`` has one row per node.  Second-order solves store the
    (velocity, position) state, so rows line up with the reduced problem.
    """

    grid: TimeGrid
    states: np.ndarray
    order: int = 1
    quadrature: str = "left"

    @property
    def block(self) -> int:
        return self.states.shape[1] // 2 if self.order == 2 else self.states.shape[1]

    @property
    def velocity(self) -> np.ndarray:
        return self.states[:, : self.block]

    @property
    def position(self) -> np.ndarray:
        if self.order != 2:
            raise AttributeError("first-order trajectories have no position block")
        return self.states[:, self.block:]

    def __len__(self) -> int:
        return self.states.shape[0]


def catching_up_first_order(sc: FirstOrderScenario, quadrature: str | None = None) -> Trajectory:
    quadrature = quadrature or sc.quadrature
    grid = sc.grid
    h = grid.h
    X = np.empty((grid.n + 1, sc.set.dim))
    X[0] = sc.X0
    for i in range(grid.n):
        tau = _quadrature_node(quadrature, grid.node(i), h)
        pre = X[i] - h * sc.g.field(tau, X[i])
        try:
            X[i + 1] = sc.set.project(grid.node(i + 1), pre)
        except NonUniqueProjection as exc:
            raise exc.at_step(i) from None
    return Trajectory(grid, X, order=1, quadrature=quadrature)


def catching_up_second_order(sc: SecondOrderScenario, quadrature: str | None = None) -> Trajectory:
    quadrature = quadrature or sc.quadrature
    grid = sc.grid
    h = grid.h
    d = sc.K.dim
    u = np.empty((grid.n + 1, d))
    x = np.empty((grid.n + 1, d))
    u[0], x[0] = sc.u0, sc.x0
    for i in range(grid.n):
        tau = _quadrature_node(quadrature, grid.node(i), h)
        pre = u[i] - h * sc.f.evaluate(tau, x[i], u[i])
        try:
            u[i + 1] = sc.K.project(grid.node(i + 1), pre)
        except NonUniqueProjection as exc:
            raise exc.at_step(i) from None
        x[i + 1] = x[i] + h * u[i]
    return Trajectory(grid, np.hstack([u, x]), order=2, quadrature=quadrature)


def solve(sc, quadrature: str | None = None) -> Trajectory:
    if isinstance(sc, SecondOrderScenario):
        return catching_up_second_order(sc, quadrature)
    return catching_up_first_order(sc, quadrature)


def reduce_second_to_first(sc: SecondOrderScenario) -> FirstOrderScenario:
    """``C(t) = K(t) x R^d``, ``g = lift(f)``, ``X0 = (u0, x0)``."""
    C = ProductSet.with_free_block(sc.K, sc.x0.shape[0])
    return FirstOrderScenario(C, LiftedPerturbation(sc.f), np.concatenate([sc.u0, sc.x0]),
                              sc.grid, sc.quadrature)


def interpolate(traj: Trajectory, t: float) -> np.ndarray:
    """Piecewise-affine interpolation of the node values; exact at nodes."""
    grid = traj.grid
    if not (0.0 <= t <= grid.T):
        raise HorizonError(f"time {t!r} is outside [0, {grid.T}]")
    nodes = grid.nodes
    i = min(int(np.searchsorted(nodes, t, side="right")) - 1, grid.n - 1)
    if t == nodes[i]:
        return traj.states[i].copy()
    if t == nodes[i + 1]:
        return traj.states[i + 1].copy()
    w = (t - nodes[i]) / (nodes[i + 1] - nodes[i])
    return (1.0 - w) * traj.states[i] + w * traj.states[i + 1]
