"""Symbolic scalar motion paths and the variation moduli built from them.

Only a closed family of paths is supported (constant, linear, sinusoid) so
that derivatives, derivative suprema and total variations are available in
closed form.  A variation modulus ``a(t)`` bounds how fast the distance
function of a moving set can change: ``|d(u, K(t)) - d(u, K(s))| <= |a(t) - a(s)|``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import ScenarioError, UnknownKind


class ScalarPath:
    """A scalar function of time with closed-form calculus."""

    kind = "abstract"

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    def rate(self, t: float) -> float:
        raise NotImplementedError

    def rate_sup(self, t0: float, t1: float) -> float:
        """Upper bound (attained) of ``|rate|`` on ``[t0, t1]``."""
        raise NotImplementedError

    def variation(self, t: float) -> float:
        """Total variation on ``[0, t]``; nondecreasing in ``t``."""
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False

    def scaled(self, k: float) -> "ScalarPath":
        raise NotImplementedError

    def shifted(self, k: float) -> "ScalarPath":
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.to_spec() == other.to_spec()

    def __hash__(self) -> int:
        return hash(repr(self.to_spec()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_spec()[self.kind]})"


class Constant(ScalarPath):
    kind = "constant"

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, t):
        return self.value

    def rate(self, t):
        return 0.0

    def rate_sup(self, t0, t1):
        return 0.0

    def variation(self, t):
        return 0.0

    @property
    def is_constant(self):
        return True

    def scaled(self, k):
        return Constant(k * self.value)

    def shifted(self, k):
        return Constant(self.value + k)

    def to_spec(self):
        return {"constant": self.value}


class Linear(ScalarPath):
    kind = "linear"

    def __init__(self, slope: float, offset: float = 0.0):
        self.slope = float(slope)
        self.offset = float(offset)

    def __call__(self, t):
        return self.slope * t + self.offset

    def rate(self, t):
        return self.slope

    def rate_sup(self, t0, t1):
        return abs(self.slope)

    def variation(self, t):
        return abs(self.slope) * t

    @property
    def is_constant(self):
        return self.slope == 0.0

    def scaled(self, k):
        return Linear(k * self.slope, k * self.offset)

    def shifted(self, k):
        return Linear(self.slope, self.offset + k)

    def to_spec(self):
        return {"linear": {"slope": self.slope, "offset": self.offset}}


def _abs_cos_antiderivative(theta: float) -> float:
    # G(theta) = int_0^theta |cos s| ds, continuous and nondecreasing
    n = math.floor(theta / math.pi + 0.5)
    return 2.0 * n + (-1.0) ** n * math.sin(theta)


class Sinusoid(ScalarPath):
    """``offset + amplitude * sin(frequency * t + phase)``; frequency is angular."""

    kind = "sinusoid"

    def __init__(self, amplitude: float, frequency: float, phase: float = 0.0, offset: float = 0.0):
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.phase = float(phase)
        self.offset = float(offset)

    def __call__(self, t):
        return self.offset + self.amplitude * math.sin(self.frequency * t + self.phase)

    def rate(self, t):
        return self.amplitude * self.frequency * math.cos(self.frequency * t + self.phase)

    def rate_sup(self, t0, t1):
        peak = abs(self.amplitude * self.frequency)
        if peak == 0.0:
            return 0.0
        lo, hi = sorted((self.frequency * t0 + self.phase, self.frequency * t1 + self.phase))
        if math.ceil(lo / math.pi) <= math.floor(hi / math.pi):
            return peak
        return peak * max(abs(math.cos(lo)), abs(math.cos(hi)))

    def variation(self, t):
        g1 = _abs_cos_antiderivative(self.frequency * t + self.phase)
        g0 = _abs_cos_antiderivative(self.phase)
        return abs(self.amplitude) * abs(g1 - g0)

    @property
    def is_constant(self):
        return self.amplitude == 0.0 or self.frequency == 0.0

    def scaled(self, k):
        return Sinusoid(k * self.amplitude, self.frequency, self.phase, k * self.offset)

    def shifted(self, k):
        return Sinusoid(self.amplitude, self.frequency, self.phase, self.offset + k)

    def to_spec(self):
        return {
            "sinusoid": {
                "amplitude": self.amplitude,
                "frequency": self.frequency,
                "phase": self.phase,
                "offset": self.offset,
            }
        }


def parse_path(spec, field: str = "path") -> ScalarPath:
    """Build a path from ``3.0``, ``{"constant": 3.0}``, ``{"linear": {...}}``
    or ``{"sinusoid": {...}}``."""
    if isinstance(spec, ScalarPath):
        return spec
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Constant(spec)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ScenarioError(field, f"expected a number or a one-key path object, got {spec!r}")
    (kind, body), = spec.items()
    try:
        if kind == "constant":
            return Constant(body)
        if kind == "linear":
            return Linear(body["slope"], body.get("offset", 0.0))
        if kind == "sinusoid":
            return Sinusoid(
                body["amplitude"], body["frequency"], body.get("phase", 0.0), body.get("offset", 0.0)
            )
    except (KeyError, TypeError) as exc:
        raise ScenarioError(field, f"malformed {kind} path: {exc}") from None
    raise UnknownKind(f"{field}.kind", f"unknown path kind {kind!r}")


class VectorPath:
    """One scalar path per coordinate."""

    def __init__(self, components: Sequence):
        self.components = tuple(parse_path(c) for c in components)
        if not self.components:
            raise ValueError("a vector path needs at least one coordinate")

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def is_constant(self) -> bool:
        return all(c.is_constant for c in self.components)

    def __call__(self, t: float) -> np.ndarray:
        return np.array([c(t) for c in self.components])

    def rate(self, t: float) -> np.ndarray:
        return np.array([c.rate(t) for c in self.components])

    def speed(self, t: float) -> float:
        return float(np.linalg.norm(self.rate(t)))

    def speed_sup(self, t0: float, t1: float) -> float:
        # sqrt of summed per-coordinate suprema: a certified upper bound
        return math.sqrt(sum(c.rate_sup(t0, t1) ** 2 for c in self.components))

    def arc_length(self, t: float) -> float:
        moving = [c for c in self.components if not c.is_constant]
        if not moving or t == 0.0:
            return 0.0
        if len(moving) == 1:
            return moving[0].variation(t)
        if all(isinstance(c, Linear) for c in moving):
            return math.hypot(*(c.slope for c in moving)) * t
        value, _ = integrate.quad(self.speed, 0.0, t, epsabs=1e-14, epsrel=1e-13, limit=500)
        return value

    def to_spec(self) -> list:
        return [c.to_spec() for c in self.components]

    def __eq__(self, other):
        return isinstance(other, VectorPath) and self.components == other.components

    def __repr__(self):
        return f"VectorPath({list(self.components)})"


def as_vector_path(spec) -> VectorPath:
    return spec if isinstance(spec, VectorPath) else VectorPath(spec)


class Modulus:
    """Variation modulus ``a(t)``: value, ``|a'(t)|`` and its supremum on intervals."""

    def value(self, t: float) -> float:
        raise NotImplementedError

    def rate(self, t: float) -> float:
        raise NotImplementedError

    def rate_sup(self, t0: float, t1: float) -> float:
        raise NotImplementedError


class ZeroModulus(Modulus):
    def value(self, t):
        return 0.0

    def rate(self, t):
        return 0.0

    def rate_sup(self, t0, t1):
        return 0.0

    def __repr__(self):
        return "ZeroModulus()"


class PathVariation(Modulus):
    """Total variation of a scalar path (used for moving half-space offsets)."""

    def __init__(self, path: ScalarPath):
        self.path = path

    def value(self, t):
        return self.path.variation(t)

    def rate(self, t):
        return abs(self.path.rate(t))

    def rate_sup(self, t0, t1):
        return self.path.rate_sup(t0, t1)

    def __repr__(self):
        return f"PathVariation({self.path!r})"


class ArcLength(Modulus):
    """Arc length of a translation path."""

    def __init__(self, path: VectorPath):
        self.path = path

    def value(self, t):
        return self.path.arc_length(t)

    def rate(self, t):
        return self.path.speed(t)

    def rate_sup(self, t0, t1):
        return self.path.speed_sup(t0, t1)

    def __repr__(self):
        return f"ArcLength({self.path!r})"


class DeclaredModulus(Modulus):
    """A user-declared ``a(t)``; nothing is certified, audits will tell."""

    def __init__(self, path: ScalarPath):
        self.path = path

    def value(self, t):
        return self.path(t)

    def rate(self, t):
        return abs(self.path.rate(t))

    def rate_sup(self, t0, t1):
        return self.path.rate_sup(t0, t1)

    def __repr__(self):
        return f"DeclaredModulus({self.path!r})"


class SumModulus(Modulus):
    """Sum of nondecreasing moduli (every builtin modulus is nondecreasing)."""

    def __init__(self, parts: Sequence[Modulus]):
        self.parts = tuple(p for p in parts if not isinstance(p, ZeroModulus))

    def value(self, t):
        return sum(p.value(t) for p in self.parts)

    def rate(self, t):
        return sum(p.rate(t) for p in self.parts)

    def rate_sup(self, t0, t1):
        return sum(p.rate_sup(t0, t1) for p in self.parts)

    def __repr__(self):
        return f"SumModulus({list(self.parts)})"


def sum_moduli(parts: Sequence[Modulus]) -> Modulus:
    live = [p for p in parts if not isinstance(p, ZeroModulus)]
    if not live:
        return ZeroModulus()
    if len(live) == 1:
        return live[0]
    return SumModulus(live)
