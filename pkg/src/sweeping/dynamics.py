"""Perturbation maps ``f(t, x, u)``, their hypothesis audits, the lift to the
product space and the a-priori solution bound.

A :class:`Perturbation` is evaluated either in the three-argument form
``f(t, x, u)`` (second-order problems, ``u`` the velocity) or in state form
``f(t, x)`` when ``u`` is omitted (first-order problems).  Its declared growth
envelope ``c(t)`` is the claim ``|f(t,x,u)| <= c(t) (1 + |x| + |u|)``.

The lift ``g(t, (u, x)) = (f(t, x, u), -u)`` turns the second-order problem
into a first-order one on ``K(t) x R^d``.  Product-space estimates for the
lift follow the sum norm ``|(a, b)| = |a| + |b|``, under which the envelopes
``c + 1`` and ``k + 1`` are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DimensionMismatch, ScenarioError, UnknownKind
from .paths import Constant, Modulus, ScalarPath, parse_path

_GROWTH_RTOL = 1e-12

SCALAR_MAPS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "zero": np.zeros_like,
    "identity": lambda v: v.copy(),
    "sin": np.sin,
    "tanh": np.tanh,
    "abs": np.abs,
    "square": np.square,
    "cube": lambda v: v ** 3,
}


def _vec(v, dim: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (dim,):
        raise DimensionMismatch(f"{name} must have shape ({dim},), got {v.shape}")
    return v


class Perturbation:
    kind = "abstract"
    uses_velocity = True

    def __init__(self, dim: int, growth=0.0, lipschitz=None):
        self.dim = int(dim)
        self.growth: ScalarPath = parse_path(growth)
        self.lipschitz: ScalarPath | None = None if lipschitz is None else parse_path(lipschitz)

    def evaluate(self, t: float, x, u=None) -> np.ndarray:
        x = _vec(x, self.dim, "x")
        if u is not None:
            u = _vec(u, self.dim, "u")
        return self._evaluate(t, x, u)

    def _evaluate(self, t, x, u) -> np.ndarray:
        raise NotImplementedError

    # first-order interface: the field over the state and its growth envelope
    def field(self, t: float, X) -> np.ndarray:
        return self.evaluate(t, X)

    def beta(self, t: float) -> float:
        return self.growth(t)

    def _spec_body(self) -> dict:
        return {}

    def to_spec(self) -> dict:
        spec = {"kind": self.kind, **self._spec_body(), "growth_envelope": self.growth.to_spec()}
        if self.lipschitz is not None:
            spec["lipschitz_envelope"] = self.lipschitz.to_spec()
        return spec

    def __repr__(self):
        return f"{type(self).__name__}({self.to_spec()})"


class ZeroPerturbation(Perturbation):
    kind = "zero"
    uses_velocity = False

    def __init__(self, dim: int, growth=0.0, lipschitz=0.0):
        super().__init__(dim, growth, lipschitz)

    def _evaluate(self, t, x, u):
        return np.zeros(self.dim)

    def _spec_body(self):
        return {"dim": self.dim}


class AffinePerturbation(Perturbation):
    """``A x + B u + b + s(t) w``; ``B`` is dropped in state form."""

    kind = "affine"

    def __init__(self, A, B=None, b=None, forcing_coefficient=None, forcing_vector=None,
                 growth=0.0, lipschitz=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        d = A.shape[0]
        if A.shape != (d, d):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        super().__init__(d, growth, lipschitz)
        self.A = A
        self.B = None if B is None else np.atleast_2d(np.asarray(B, dtype=float))
        if self.B is not None and self.B.shape != (d, d):
            raise DimensionMismatch(f"B must have shape ({d}, {d}), got {self.B.shape}")
        self.b = np.zeros(d) if b is None else _vec(b, d, "b")
        if (forcing_coefficient is None) != (forcing_vector is None):
            raise ValueError("forcing needs both a coefficient path and a vector")
        self.forcing_coefficient = None if forcing_coefficient is None else parse_path(forcing_coefficient)
        self.forcing_vector = None if forcing_vector is None else _vec(forcing_vector, d, "forcing vector")

    @property
    def uses_velocity(self):
        return self.B is not None

    def _evaluate(self, t, x, u):
        out = self.A @ x + self.b
        if u is not None and self.B is not None:
            out = out + self.B @ u
        if self.forcing_coefficient is not None:
            out = out + self.forcing_coefficient(t) * self.forcing_vector
        return out

    def _spec_body(self):
        body = {"A": self.A.tolist()}
        if self.B is not None:
            body["B"] = self.B.tolist()
        if np.any(self.b):
            body["b"] = self.b.tolist()
        if self.forcing_coefficient is not None:
            body["forcing"] = {"coefficient": self.forcing_coefficient.to_spec(),
                               "vector": self.forcing_vector.tolist()}
        return body


class TrigonometricForcing(Perturbation):
    """``sin(frequency * t + phase) * w``, independent of the state."""

    kind = "trigonometric_forcing"
    uses_velocity = False

    def __init__(self, vector, frequency: float = 1.0, phase: float = 0.0, growth=None, lipschitz=0.0):
        w = np.atleast_1d(np.asarray(vector, dtype=float))
        if growth is None:
            growth = float(np.linalg.norm(w))
        super().__init__(w.shape[0], growth, lipschitz)
        self.vector = w
        self.frequency = float(frequency)
        self.phase = float(phase)

    def _evaluate(self, t, x, u):
        return math.sin(self.frequency * t + self.phase) * self.vector

    def _spec_body(self):
        return {"vector": self.vector.tolist(), "frequency": self.frequency, "phase": self.phase}


class ComponentwiseNonlinear(Perturbation):
    """``wx * phi(x) + wu * psi(u)`` with ``phi, psi`` taken from :data:`SCALAR_MAPS`."""

    kind = "componentwise_nonlinear"

    def __init__(self, dim: int, x_map: str = "identity", u_map: str | None = None,
                 x_weight=1.0, u_weight=1.0, growth=0.0, lipschitz=None):
        super().__init__(dim, growth, lipschitz)
        for name in (x_map, u_map):
            if name is not None and name not in SCALAR_MAPS:
                raise ValueError(f"unknown scalar map {name!r}")
        self.x_map, self.u_map = x_map, u_map
        self.x_weight = np.broadcast_to(np.asarray(x_weight, dtype=float), (dim,)).copy()
        self.u_weight = np.broadcast_to(np.asarray(u_weight, dtype=float), (dim,)).copy()

    @property
    def uses_velocity(self):
        return self.u_map is not None

    def _evaluate(self, t, x, u):
        out = self.x_weight * SCALAR_MAPS[self.x_map](x)
        if u is not None and self.u_map is not None:
            out = out + self.u_weight * SCALAR_MAPS[self.u_map](u)
        return out

    def _spec_body(self):
        body = {"dim": self.dim, "x_map": self.x_map, "x_weight": self.x_weight.tolist()}
        if self.u_map is not None:
            body["u_map"] = self.u_map
            body["u_weight"] = self.u_weight.tolist()
        return body


class LiftedPerturbation:
    """``g(t, (u, x)) = (f(t, x, u), -u)`` on the (velocity, position) state.

    Growth and Lipschitz envelopes are ``c + 1`` and ``k + 1`` in the sum norm.
    """

    kind = "lifted"

    def __init__(self, source: Perturbation):
        self.source = source
        self.block = source.dim
        self.dim = 2 * source.dim
        self.growth = source.growth.shifted(1.0)
        self.lipschitz = None if source.lipschitz is None else source.lipschitz.shifted(1.0)

    def split(self, U) -> tuple[np.ndarray, np.ndarray]:
        U = _vec(U, self.dim, "state")
        return U[: self.block], U[self.block:]

    def evaluate(self, t: float, U) -> np.ndarray:
        u, x = self.split(U)
        return np.concatenate([self.source.evaluate(t, x, u), -u])

    field = evaluate

    def beta(self, t: float) -> float:
        return self.growth(t)

    def gamma(self, t: float) -> float | None:
        return None if self.lipschitz is None else self.lipschitz(t)

    def to_spec(self) -> dict:
        return {"kind": self.kind, "source": self.source.to_spec()}

    def __repr__(self):
        return f"LiftedPerturbation({self.source!r})"


def evaluate(f: Perturbation, t: float, x, u=None) -> np.ndarray:
    return f.evaluate(t, x, u)


def lift_perturbation(f: Perturbation) -> LiftedPerturbation:
    return LiftedPerturbation(f)


# -- audits --------------------------------------------------------------------

def _grid_times(grid) -> np.ndarray:
    return np.asarray(getattr(grid, "nodes", grid), dtype=float)


def _ball_points(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    """Uniform draws in the closed ball; every fourth draw sits on the sphere."""
    g = rng.standard_normal((n, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    rad = radius * rng.random((n, 1)) ** (1.0 / dim)
    rad[::4] = radius
    return g / norms * rad


@dataclass
class GrowthViolation:
    t: float
    x: np.ndarray
    u: np.ndarray | None
    norm: float
    bound: float

    def to_dict(self) -> dict:
        return {"t": self.t, "x": self.x.tolist(), "u": None if self.u is None else self.u.tolist(),
                "norm": self.norm, "bound": self.bound}


def _source_and_mode(f, state_form: bool):
    if isinstance(f, LiftedPerturbation):
        return f.source, "lifted"
    return f, "state" if state_form else "full"


def audit_growth(f, grid, n_samples: int, radius: float, rng_seed: int,
                 state_form: bool = False) -> list[GrowthViolation]:
    """Record every sample where the declared growth envelope fails.

    A lifted perturbation is sampled with the very same draws as its source
    (``x``, ``u`` in the ball of ``radius``) and measured in the sum norm.
    """
    src, mode = _source_and_mode(f, state_form)
    rng = np.random.default_rng(rng_seed)
    times = _grid_times(grid)
    ts = rng.choice(times, size=n_samples)
    xs = _ball_points(rng, n_samples, src.dim, radius)
    us = _ball_points(rng, n_samples, src.dim, radius)
    out = []
    for t, x, u in zip(ts, xs, us):
        t = float(t)
        if mode == "state":
            val = float(np.linalg.norm(src.evaluate(t, x)))
            bound = src.growth(t) * (1.0 + np.linalg.norm(x))
            rec_u = None
        else:
            val = float(np.linalg.norm(src.evaluate(t, x, u)))
            size = 1.0 + np.linalg.norm(x) + np.linalg.norm(u)
            if mode == "lifted":
                val += float(np.linalg.norm(u))
                bound = f.beta(t) * size
            else:
                bound = src.growth(t) * size
            rec_u = u
        if val > bound * (1.0 + _GROWTH_RTOL):
            out.append(GrowthViolation(t, x, rec_u, val, float(bound)))
    return out


def _pair_draws(rng, n_pairs, dim, eta):
    """Pairs in the eta-ball: global, x-local, u-local and jointly local pairs."""
    x = _ball_points(rng, n_pairs, dim, eta)
    u = _ball_points(rng, n_pairs, dim, eta)
    y = _ball_points(rng, n_pairs, dim, eta)
    v = _ball_points(rng, n_pairs, dim, eta)
    step = 1e-3 * eta * rng.standard_normal((n_pairs, dim))
    step2 = 1e-3 * eta * rng.standard_normal((n_pairs, dim))
    sel = np.arange(n_pairs) % 4
    y = np.where((sel == 1)[:, None] | (sel == 3)[:, None], x + step, y)
    y = np.where((sel == 2)[:, None], x, y)
    v = np.where((sel == 2)[:, None] | (sel == 3)[:, None], u + step2, v)
    v = np.where((sel == 1)[:, None], u, v)

    def clip(p):
        n = np.linalg.norm(p, axis=1, keepdims=True)
        return np.where(n > eta, p * (eta / np.maximum(n, 1e-300)), p)

    return x, u, clip(y), clip(v)


def audit_lipschitz(f, grid, eta: float, n_pairs: int, rng_seed: int,
                    state_form: bool = False) -> float:
    """Empirical lower estimate of the Lipschitz constant on the eta-ball.

    Ratios are ``|f(x,u) - f(y,v)| / (|x-y| + |u-v|)``.  For a lifted map the
    source's draws are reused and both sides carry the extra ``|u - v|``, so
    the lifted estimate never exceeds the source estimate plus one.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    src, mode = _source_and_mode(f, state_form)
    rng = np.random.default_rng(rng_seed)
    ts = rng.choice(_grid_times(grid), size=n_pairs)
    x, u, y, v = _pair_draws(rng, n_pairs, src.dim, eta)
    best = 0.0
    for t, xi, ui, yi, vi in zip(ts, x, u, y, v):
        t = float(t)
        dx = float(np.linalg.norm(xi - yi))
        if mode == "state":
            den = dx
            num = float(np.linalg.norm(src.evaluate(t, xi) - src.evaluate(t, yi)))
        else:
            du = float(np.linalg.norm(ui - vi))
            den = dx + du
            num = float(np.linalg.norm(src.evaluate(t, xi, ui) - src.evaluate(t, yi, vi)))
            if mode == "lifted":
                num += du
        if den > 0.0:
            best = max(best, num / den)
    return best


# -- a-priori bound ---------------------------------------------------------------

@dataclass
class BoundsReport:
    """The constant ``l`` and the envelopes ``(1+l) beta`` and ``(1+l) beta + |a'|``."""

    l: float
    beta: Callable[[float], float]
    modulus: Modulus

    def envelope_f(self, t: float) -> float:
        return (1.0 + self.l) * self.beta(t)

    def envelope_du(self, t: float) -> float:
        return self.envelope_f(t) + self.modulus.rate(t)

    def envelope_du_step(self, t0: float, t1: float) -> float:
        return self.envelope_f(t0) + self.modulus.rate_sup(t0, t1)


def a_priori_bound(sc, refine: int = 4) -> BoundsReport:
    """Compute ``l = |X0| + exp(2 int beta) * int (2 beta (1 + |X0|) + |a'|)``
    by composite Simpson on the scenario grid refined ``refine`` times."""
    grid = sc.grid
    n = grid.n * refine
    n += n % 2
    ts = np.arange(n + 1) * grid.T / n
    beta = np.array([sc.g.beta(t) for t in ts])
    rate = np.array([sc.set.modulus.rate(t) for t in ts])
    x0 = float(np.linalg.norm(sc.X0))
    int_beta = integrate.simpson(beta, x=ts)
    int_rest = integrate.simpson(2.0 * beta * (1.0 + x0) + rate, x=ts)
    l = x0 + math.exp(2.0 * int_beta) * int_rest
    return BoundsReport(float(l), sc.g.beta, sc.set.modulus)


# -- spec parsing ------------------------------------------------------------------

PERTURBATION_KINDS = ("zero", "affine", "trigonometric_forcing", "componentwise_nonlinear", "lifted")


def perturbation_from_spec(spec: dict, field: str = "perturbation", dim: int | None = None,
                           allow_lifted: bool = False):
    if not isinstance(spec, dict):
        raise ScenarioError(field, "expected an object")
    kind = spec.get("kind")
    if kind not in PERTURBATION_KINDS or (kind == "lifted" and not allow_lifted):
        raise UnknownKind(f"{field}.kind", f"unknown perturbation kind {kind!r}")
    if kind == "lifted":
        if "source" not in spec:
            raise ScenarioError(f"{field}.source", "missing")
        src_dim = None if dim is None else dim // 2
        return LiftedPerturbation(perturbation_from_spec(spec["source"], f"{field}.source", src_dim))
    kw = {}
    if "lipschitz_envelope" in spec:
        kw["lipschitz"] = parse_path(spec["lipschitz_envelope"], f"{field}.lipschitz_envelope")
    if "growth_envelope" in spec:
        kw["growth"] = parse_path(spec["growth_envelope"], f"{field}.growth_envelope")
    elif kind not in ("zero", "trigonometric_forcing"):
        raise ScenarioError(f"{field}.growth_envelope", "missing (required for this kind)")

    def need(key):
        if key not in spec:
            raise ScenarioError(f"{field}.{key}", "missing")
        return spec[key]

    try:
        if kind == "zero":
            return ZeroPerturbation(int(spec.get("dim", dim or 0)), **kw)
        if kind == "affine":
            forcing = spec.get("forcing")
            fc = fv = None
            if forcing is not None:
                fc = parse_path(forcing.get("coefficient"), f"{field}.forcing.coefficient")
                fv = forcing.get("vector")
            return AffinePerturbation(need("A"), spec.get("B"), spec.get("b"), fc, fv, **kw)
        if kind == "trigonometric_forcing":
            return TrigonometricForcing(need("vector"), spec.get("frequency", 1.0),
                                        spec.get("phase", 0.0), **kw)
        return ComponentwiseNonlinear(int(spec.get("dim", dim or 0)), spec.get("x_map", "identity"),
                                      spec.get("u_map"), spec.get("x_weight", 1.0),
                                      spec.get("u_weight", 1.0), **kw)
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(field, str(exc)) from None
