"""Moving closed sets in R^d: distances, metric projections and audits.

Every builtin kind has a closed-form distance and projection, an analytic
variation modulus and a prox radius (``math.inf`` for convex kinds).
Projection is only defined inside the uniqueness tube ``d(p, K(t)) < r``;
outside it :class:`~sweeping.errors.NonUniqueProjection` is raised instead of
picking one of several nearest points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, HorizonError, NonUniqueProjection, ScenarioError, UnknownKind
from .paths import (
    ArcLength,
    DeclaredModulus,
    Modulus,
    PathVariation,
    VectorPath,
    ZeroModulus,
    as_vector_path,
    parse_path,
    sum_moduli,
)

FEASIBILITY_TOL = 1e-9
_HORIZON_SLACK = 1e-12


def _snap_tol(p: np.ndarray) -> float:
    # points this close to the set are returned unchanged, which keeps
    # projection exactly idempotent despite rounding in the closed forms
    return 1e-14 * (1.0 + float(np.max(np.abs(p), initial=0.0)))


class MovingSet:
    """A time-indexed nonempty closed set ``K(t)`` in ``R^dim``.

    ``prox_radius`` and ``modulus`` default to the kind's analytic values;
    passing them overrides (declares) a value, which the audits then test.
    """

    kind = "abstract"

    def __init__(self, dim: int, *, prox_radius: float | None = None, modulus=None,
                 horizon: float | None = None):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self.dim = int(dim)
        self._declared_radius = None if prox_radius is None else float(prox_radius)
        if self._declared_radius is not None and not self._declared_radius > 0:
            raise ValueError("prox_radius must be positive")
        if modulus is not None and not isinstance(modulus, Modulus):
            modulus = DeclaredModulus(parse_path(modulus))
        self._declared_modulus = modulus
        self.horizon = None if horizon is None else float(horizon)

    # -- analytic defaults, overridden per kind
    def _natural_prox_radius(self) -> float:
        return math.inf

    def _natural_modulus(self) -> Modulus:
        return ZeroModulus()

    @property
    def prox_radius(self) -> float:
        if self._declared_radius is not None:
            return self._declared_radius
        return self._natural_prox_radius()

    @property
    def modulus(self) -> Modulus:
        if self._declared_modulus is not None:
            return self._declared_modulus
        return self._natural_modulus()

    @property
    def is_convex(self) -> bool:
        return math.isinf(self._natural_prox_radius())

    # -- argument checking
    def _check_time(self, t: float) -> None:
        if not math.isfinite(t) or t < -_HORIZON_SLACK:
            raise HorizonError(f"time {t!r} is outside the horizon")
        if self.horizon is not None and t > self.horizon * (1 + _HORIZON_SLACK) + _HORIZON_SLACK:
            raise HorizonError(f"time {t!r} is outside the horizon [0, {self.horizon}]")

    def _point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.ndim != 1 or p.shape[0] != self.dim:
            raise DimensionMismatch(f"expected a point of dimension {self.dim}, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("points must have finite coordinates")
        return p

    # -- public operations
    def distance(self, t: float, p) -> float:
        self._check_time(t)
        return self._distance(t, self._point(p))

    def contains(self, t: float, p, tol: float = FEASIBILITY_TOL) -> bool:
        return self.distance(t, p) <= tol

    def project(self, t: float, p) -> np.ndarray:
        self._check_time(t)
        p = self._point(p)
        d = self._distance(t, p)
        if d <= _snap_tol(p):
            return p.copy()
        r = self.prox_radius
        if d >= r:
            raise NonUniqueProjection(d, r)
        return self._project(t, p)

    def _distance(self, t: float, p: np.ndarray) -> float:
        raise NotImplementedError

    def _project(self, t: float, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sampling_region(self, t: float) -> tuple[np.ndarray, float]:
        """Center and half-width of a cube where audits draw their samples."""
        raise NotImplementedError

    # -- serialization
    def _spec_body(self) -> dict:
        raise NotImplementedError

    def to_spec(self) -> dict:
        spec = {"kind": self.kind, **self._spec_body()}
        if self._declared_radius is not None:
            spec["prox_radius"] = self._declared_radius
        if isinstance(self._declared_modulus, DeclaredModulus):
            spec["variation_modulus"] = self._declared_modulus.path.to_spec()
        return spec

    def with_overrides(self, **kw) -> "MovingSet":
        """Rebuild this set through its spec, replacing top-level spec entries."""
        spec = {**self.to_spec(), **kw}
        return set_from_spec(spec, horizon=self.horizon)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_spec()})"


class MovingHalfSpace(MovingSet):
    """``{u : <e, u> >= c(t)}``.  A non-unit normal is normalized together with ``c``."""

    kind = "moving_half_space"

    def __init__(self, normal, offset, **kw):
        raw = np.asarray(normal, dtype=float)
        super().__init__(raw.shape[0], **kw)
        scale = float(np.linalg.norm(raw))
        if scale == 0.0 or not math.isfinite(scale):
            raise ValueError("half-space normal must be a nonzero finite vector")
        self._raw_normal = raw.copy()
        self._raw_offset = parse_path(offset)
        if scale == 1.0:
            self.normal, self.offset = raw.copy(), self._raw_offset
        else:
            self.normal, self.offset = raw / scale, self._raw_offset.scaled(1.0 / scale)
        nz = np.flatnonzero(self.normal)
        # axis-aligned normals clamp one coordinate, so the result lies exactly on the boundary
        self._axis = int(nz[0]) if nz.size == 1 and abs(self.normal[nz[0]]) == 1.0 else None

    def _natural_modulus(self):
        return ZeroModulus() if self.offset.is_constant else PathVariation(self.offset)

    def _distance(self, t, p):
        return max(self.offset(t) - float(self.normal @ p), 0.0)

    def _project(self, t, p):
        c = self.offset(t)
        if self._axis is not None:
            q = p.copy()
            q[self._axis] = c * self.normal[self._axis]
            return q
        return p + (c - float(self.normal @ p)) * self.normal

    def sampling_region(self, t):
        return self.offset(t) * self.normal, 1.0

    def _spec_body(self):
        return {"normal": self._raw_normal.tolist(), "offset": self._raw_offset.to_spec()}


class MovingBall(MovingSet):
    """Closed ball ``B(m(t), R)``."""

    kind = "moving_ball"

    def __init__(self, center, radius: float, **kw):
        self.center = as_vector_path(center)
        super().__init__(self.center.dim, **kw)
        self.radius = float(radius)
        if not self.radius >= 0:
            raise ValueError("ball radius must be nonnegative")

    def _natural_modulus(self):
        return ZeroModulus() if self.center.is_constant else ArcLength(self.center)

    def _distance(self, t, p):
        return max(float(np.linalg.norm(p - self.center(t))) - self.radius, 0.0)

    def _project(self, t, p):
        m = self.center(t)
        v = p - m
        return m + self.radius * v / np.linalg.norm(v)

    def sampling_region(self, t):
        return self.center(t), 2.0 * max(self.radius, 0.5)

    def _spec_body(self):
        return {"center": self.center.to_spec(), "radius": self.radius}


class BallComplement(MovingSet):
    """``{u : |u - m(t)| >= R}``; prox-regular with radius exactly ``R``."""

    kind = "ball_complement"

    def __init__(self, center, radius: float, **kw):
        self.center = as_vector_path(center)
        super().__init__(self.center.dim, **kw)
        self.radius = float(radius)
        if not self.radius > 0:
            raise ValueError("ball_complement radius must be positive")

    def _natural_prox_radius(self):
        return self.radius

    def _natural_modulus(self):
        return ZeroModulus() if self.center.is_constant else ArcLength(self.center)

    def _distance(self, t, p):
        return max(self.radius - float(np.linalg.norm(p - self.center(t))), 0.0)

    def _project(self, t, p):
        m = self.center(t)
        v = p - m
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            raise NonUniqueProjection(self.radius, self.prox_radius, detail="point at the center")
        return m + self.radius * v / nv

    def sampling_region(self, t):
        return self.center(t), 2.0 * self.radius

    def _spec_body(self):
        return {"center": self.center.to_spec(), "radius": self.radius}


class Box(MovingSet):
    """Static axis-aligned box; ``None``/infinite bounds leave an axis open."""

    kind = "box"

    def __init__(self, lower: Sequence, upper: Sequence, **kw):
        lo = np.array([-math.inf if v is None else v for v in lower], dtype=float)
        hi = np.array([math.inf if v is None else v for v in upper], dtype=float)
        if lo.shape != hi.shape:
            raise DimensionMismatch("box bounds have different lengths")
        super().__init__(lo.shape[0], **kw)
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ValueError("box needs lower <= upper on every axis")
        self.lower, self.upper = lo, hi

    def _distance(self, t, p):
        return float(np.linalg.norm(p - np.clip(p, self.lower, self.upper)))

    def _project(self, t, p):
        return np.clip(p, self.lower, self.upper)

    def sampling_region(self, t):
        lo_f, hi_f = np.isfinite(self.lower), np.isfinite(self.upper)
        center = np.where(lo_f & hi_f, 0.5 * (self.lower + self.upper),
                          np.where(lo_f, self.lower, np.where(hi_f, self.upper, 0.0)))
        widths = np.where(lo_f & hi_f, self.upper - self.lower, 0.0)
        return center, max(float(np.max(widths)), 1.0)

    def _spec_body(self):
        def enc(a):
            return [None if math.isinf(v) else float(v) for v in a]
        return {"lower": enc(self.lower), "upper": enc(self.upper)}


class FreeSpace(MovingSet):
    """The whole space ``R^dim`` (the unconstrained factor of a product)."""

    kind = "free"

    def _distance(self, t, p):
        return 0.0

    def _project(self, t, p):
        return p.copy()

    def sampling_region(self, t):
        return np.zeros(self.dim), 1.0

    def _spec_body(self):
        return {"dim": self.dim}


class TranslatedBase(MovingSet):
    """``K0(t) + m(t)``."""

    kind = "translated_base"

    def __init__(self, base: MovingSet, translation, **kw):
        self.base = base
        self.translation = as_vector_path(translation)
        if self.translation.dim != base.dim:
            raise DimensionMismatch("translation and base set dimensions differ")
        super().__init__(base.dim, **kw)

    def _natural_prox_radius(self):
        return self.base.prox_radius

    def _natural_modulus(self):
        if self.translation.is_constant:
            return self.base.modulus
        return sum_moduli([self.base.modulus, ArcLength(self.translation)])

    def _distance(self, t, p):
        return self.base.distance(t, p - self.translation(t))

    def _project(self, t, p):
        m = self.translation(t)
        return self.base.project(t, p - m) + m

    def sampling_region(self, t):
        c, s = self.base.sampling_region(t)
        return c + self.translation(t), s

    def _spec_body(self):
        return {"base": self.base.to_spec(), "translation": self.translation.to_spec()}


class ProductSet(MovingSet):
    """Cartesian product of moving sets, with the Euclidean product norm.

    Squared distances add across blocks, projection acts blockwise and the
    prox radius is the minimum over blocks.
    """

    kind = "product"

    def __init__(self, blocks: Sequence[MovingSet], **kw):
        self.blocks = tuple(blocks)
        if not self.blocks:
            raise ValueError("a product needs at least one block")
        dims = [b.dim for b in self.blocks]
        super().__init__(sum(dims), **kw)
        edges = np.cumsum([0] + dims)
        self.slices = tuple(slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]))

    @classmethod
    def with_free_block(cls, block: MovingSet, free_dims: int, **kw) -> "ProductSet":
        blocks = [block] if free_dims == 0 else [block, FreeSpace(free_dims, horizon=block.horizon)]
        return cls(blocks, **kw)

    @property
    def constrained_block(self) -> MovingSet:
        return self.blocks[0]

    @property
    def free_dims(self) -> int:
        return sum(b.dim for b in self.blocks if isinstance(b, FreeSpace))

    def split(self, p) -> list[np.ndarray]:
        p = np.asarray(p, dtype=float)
        return [p[s] for s in self.slices]

    def _natural_prox_radius(self):
        return min(b.prox_radius for b in self.blocks)

    def _natural_modulus(self):
        return sum_moduli([b.modulus for b in self.blocks])

    def _distance(self, t, p):
        return math.sqrt(sum(b.distance(t, p[s]) ** 2 for b, s in zip(self.blocks, self.slices)))

    def project(self, t, p):
        self._check_time(t)
        p = self._point(p)
        d = self._distance(t, p)
        r = self.prox_radius
        if d >= r:
            raise NonUniqueProjection(d, r)
        return np.concatenate([b.project(t, p[s]) for b, s in zip(self.blocks, self.slices)])

    def sampling_region(self, t):
        regions = [b.sampling_region(t) for b in self.blocks]
        return np.concatenate([c for c, _ in regions]), max(s for _, s in regions)

    def _spec_body(self):
        return {"components": [b.to_spec() for b in self.blocks]}


# -- functional surface ------------------------------------------------------

def distance(set_: MovingSet, t: float, p) -> float:
    return set_.distance(t, p)


def project(set_: MovingSet, t: float, p) -> np.ndarray:
    return set_.project(t, p)


def product_project(ps: ProductSet, t: float, p) -> np.ndarray:
    if not isinstance(ps, ProductSet):
        raise TypeError("product_project needs a ProductSet")
    return ps.project(t, p)


def prox_margin(xbar, xi, x, r: float) -> float:
    """``<xi/|xi|, x - xbar> - |x - xbar|^2 / (2r)``; positive means violated."""
    xbar, xi, x = (np.asarray(v, dtype=float) for v in (xbar, xi, x))
    diff = x - xbar
    lhs = float(xi @ diff) / float(np.linalg.norm(xi))
    rhs = 0.0 if math.isinf(r) else float(diff @ diff) / (2.0 * r)
    return lhs - rhs


@dataclass
class ProxAuditReport:
    samples_checked: int
    worst_slack: float
    tol: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "samples_checked": self.samples_checked,
            "worst_slack": self.worst_slack,
            "tol": self.tol,
            "violations": [
                {"base_point": b.tolist(), "normal": n.tolist(), "test_point": x.tolist(),
                 "lhs": lhs, "rhs": rhs}
                for b, n, x, lhs, rhs in self.violations
            ],
        }


def prox_inequality_audit(set_: MovingSet, t: float, n_samples: int, rng_seed: int,
                          declared_radius: float | None = None, tol: float = 1e-12,
                          max_recorded: int = 50) -> ProxAuditReport:
    """Sample (base point, proximal normal, set point) triples and test the
    hypomonotonicity inequality of an ``r``-prox-regular set.

    Base points are projections of random outside points, so ``p - P(p)`` is a
    proximal normal by construction.  Half of the test points are projections
    (they land on the boundary, where the inequality is tight), the rest are
    raw samples, replaced by their projection when they miss the set.
    """
    r = set_.prox_radius if declared_radius is None else float(declared_radius)
    inv2r = 0.0 if math.isinf(r) else 1.0 / (2.0 * r)
    rng = np.random.default_rng(rng_seed)
    center, scale = set_.sampling_region(t)
    worst = -math.inf
    violations = []
    checked = 0
    for _ in range(100):
        if checked >= n_samples:
            break
        P = center + scale * rng.uniform(-1.0, 1.0, (n_samples, set_.dim))
        Q = center + scale * rng.uniform(-1.0, 1.0, (n_samples, set_.dim))
        raw = rng.random(n_samples) < 0.5
        for p, q, keep_raw in zip(P, Q, raw):
            if checked >= n_samples:
                break
            try:
                xbar = set_.project(t, p)
                x = q if keep_raw and set_.distance(t, q) == 0.0 else set_.project(t, q)
            except NonUniqueProjection:
                continue
            xi = p - xbar
            if not np.any(xi):
                continue
            nxi = math.sqrt(float(xi @ xi))
            diff = x - xbar
            lhs = float(xi @ diff) / nxi
            rhs = float(diff @ diff) * inv2r
            slack = lhs - rhs
            checked += 1
            worst = max(worst, slack)
            if slack > tol and len(violations) < max_recorded:
                violations.append((xbar, xi / nxi, x, lhs, rhs))
    return ProxAuditReport(checked, worst if checked else 0.0, tol, violations)


def variation_audit(set_: MovingSet, grid, probe_points, modulus: Modulus | None = None) -> float:
    """Worst ratio ``|d(u,K(t)) - d(u,K(s))| / |a(t) - a(s)|`` over grid pairs and probes.

    ``0/0`` counts as 0; a moving distance with a frozen modulus gives ``inf``.
    """
    modulus = set_.modulus if modulus is None else modulus
    times = np.asarray(getattr(grid, "nodes", grid), dtype=float)
    probes = [np.asarray(u, dtype=float) for u in probe_points]
    dist = np.array([[set_.distance(t, u) for u in probes] for t in times])
    a = np.array([modulus.value(t) for t in times])
    iu, ju = np.triu_indices(len(times), k=1)
    num = np.abs(dist[iu] - dist[ju])
    den = np.abs(a[iu] - a[ju])[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(num == 0.0, 0.0, np.where(den == 0.0, math.inf, num / den))
    return float(ratio.max(initial=0.0))


# -- spec parsing --------------------------------------------------------------

SET_KINDS = ("moving_half_space", "moving_ball", "box", "translated_base", "ball_complement",
             "product", "free")


def set_from_spec(spec: dict, field: str = "set", horizon: float | None = None) -> MovingSet:
    """Build a set from its JSON form; errors name the offending field."""
    if not isinstance(spec, dict):
        raise ScenarioError(field, "expected an object")
    kind = spec.get("kind")
    if kind not in SET_KINDS:
        raise UnknownKind(f"{field}.kind", f"unknown set kind {kind!r}")
    kw = {"horizon": horizon}
    if spec.get("prox_radius") is not None:
        kw["prox_radius"] = spec["prox_radius"]
    if spec.get("variation_modulus") is not None:
        kw["modulus"] = parse_path(spec["variation_modulus"], f"{field}.variation_modulus")

    def need(key):
        if key not in spec:
            raise ScenarioError(f"{field}.{key}", "missing")
        return spec[key]

    def vpath(key):
        comps = need(key)
        if not isinstance(comps, list) or not comps:
            raise ScenarioError(f"{field}.{key}", "expected a non-empty list of paths")
        return VectorPath([parse_path(c, f"{field}.{key}[{i}]") for i, c in enumerate(comps)])

    try:
        if kind == "moving_half_space":
            return MovingHalfSpace(need("normal"), parse_path(need("offset"), f"{field}.offset"), **kw)
        if kind == "moving_ball":
            return MovingBall(vpath("center"), need("radius"), **kw)
        if kind == "ball_complement":
            return BallComplement(vpath("center"), need("radius"), **kw)
        if kind == "box":
            return Box(need("lower"), need("upper"), **kw)
        if kind == "free":
            return FreeSpace(int(need("dim")), **kw)
        if kind == "translated_base":
            base = set_from_spec(need("base"), f"{field}.base", horizon)
            return TranslatedBase(base, vpath("translation"), **kw)
        comps = need("components")
        blocks = [set_from_spec(c, f"{field}.components[{i}]", horizon) for i, c in enumerate(comps)]
        return ProductSet(blocks, **kw)
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(field, str(exc)) from None
