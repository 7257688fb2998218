"""Builtin benchmark scenarios used by the test suite and the example files."""

from __future__ import annotations

import numpy as np

from .dynamics import AffinePerturbation, ZeroPerturbation
from .geometry import BallComplement, Box, MovingBall, MovingHalfSpace, TranslatedBase
from .paths import Constant, Linear, Sinusoid
from .solver import FirstOrderScenario, SecondOrderScenario, TimeGrid


def half_line(n: int = 50, T: float = 1.0) -> SecondOrderScenario:
    """``K(t) = [t, inf)``, ``f = 0``: the exact solution is ``u(t) = t``."""
    K = MovingHalfSpace([1.0], Linear(1.0, 0.0), horizon=T)
    return SecondOrderScenario(K, ZeroPerturbation(1), [0.0], [0.0], TimeGrid(T, n))


def half_line_first_order(n: int = 50, T: float = 1.0) -> FirstOrderScenario:
    K = MovingHalfSpace([1.0], Linear(1.0, 0.0), horizon=T)
    return FirstOrderScenario(K, ZeroPerturbation(1), [0.0], TimeGrid(T, n))


def constant_convex(n: int = 50, T: float = 1.0) -> SecondOrderScenario:
    K = MovingBall([0.0, 0.0], 1.0, horizon=T)
    f = AffinePerturbation([[0.0, 0.5], [-0.5, 0.0]], B=[[-0.2, 0.0], [0.0, -0.2]], b=[-1.5, 0.0],
                           growth=1.5, lipschitz=0.5)
    return SecondOrderScenario(K, f, [0.0, 0.0], [0.5, 0.0], TimeGrid(T, n))


def moving_half_space(n: int = 50, T: float = 1.0) -> SecondOrderScenario:
    K = MovingHalfSpace([0.0, 1.0], Sinusoid(0.5, 2.0), horizon=T)
    f = AffinePerturbation([[-0.3, 0.0], [0.0, -0.3]], b=[0.0, 0.5], growth=0.5, lipschitz=0.3)
    return SecondOrderScenario(K, f, [0.0, 0.0], [0.2, 0.1], TimeGrid(T, n))


def moving_ball(n: int = 50, T: float = 1.0) -> SecondOrderScenario:
    """Smooth convex benchmark: a ball drifting away from the velocity."""
    K = MovingBall([Linear(0.6, 0.0), Sinusoid(0.3, 2.0)], 0.5, horizon=T)
    f = AffinePerturbation([[0.5, 0.0], [0.0, 0.5]], B=[[0.2, 0.0], [0.0, 0.2]],
                           growth=0.5, lipschitz=0.5)
    return SecondOrderScenario(K, f, [0.0, 0.0], [0.0, 0.0], TimeGrid(T, n))


def ball_complement(n: int = 50, T: float = 1.0) -> SecondOrderScenario:
    """Nonconvex benchmark: an obstacle ball sweeping into the velocity."""
    K = BallComplement([Linear(0.8, 0.0), Constant(0.0)], 1.0, horizon=T)
    f = AffinePerturbation([[0.1, 0.0], [0.0, 0.1]], growth=0.1, lipschitz=0.1)
    return SecondOrderScenario(K, f, [0.0, 0.0], [1.2, 0.3], TimeGrid(T, n))


def forced_affine(n: int = 50, T: float = 1.0) -> SecondOrderScenario:
    """Affine ``f`` plus sinusoidal forcing inside a static box."""
    K = Box([-1.0, -0.3], [1.0, 0.3], horizon=T)
    f = AffinePerturbation([[0.0, 1.0], [-1.0, 0.0]], B=[[-0.1, 0.0], [0.0, -0.1]],
                           forcing_coefficient=Sinusoid(1.0, 3.0), forcing_vector=[0.0, 2.0],
                           growth=2.0, lipschitz=1.0)
    return SecondOrderScenario(K, f, [0.0, 0.0], [0.0, 0.0], TimeGrid(T, n))


def translated_box(n: int = 50, T: float = 1.0) -> SecondOrderScenario:
    base = Box([-0.3, -0.3], [0.3, 0.3], horizon=T)
    K = TranslatedBase(base, [Sinusoid(0.5, 1.5), Linear(0.6, 0.0)], horizon=T)
    f = AffinePerturbation(np.eye(2) * 0.2, growth=0.2, lipschitz=0.2)
    return SecondOrderScenario(K, f, [0.0, 0.0], [0.25, 0.0], TimeGrid(T, n))


SECOND_ORDER_SUITE = {
    "constant_convex": constant_convex,
    "moving_half_space": moving_half_space,
    "moving_ball": moving_ball,
    "ball_complement": ball_complement,
    "forced_affine": forced_affine,
    "translated_box": translated_box,
    "half_line": half_line,
}


def suite(n: int = 50) -> dict[str, SecondOrderScenario]:
    return {name: make(n) for name, make in SECOND_ORDER_SUITE.items()}
