import math

import numpy as np
import pytest
from scipy import integrate

from sweeping.errors import ScenarioError, UnknownKind
from sweeping.paths import (
    ArcLength,
    Constant,
    Linear,
    PathVariation,
    Sinusoid,
    SumModulus,
    VectorPath,
    ZeroModulus,
    parse_path,
    sum_moduli,
)

SINUSOIDS = [
    Sinusoid(1.0, 1.0),
    Sinusoid(0.5, 2.0, 0.3),
    Sinusoid(-1.3, 3.7, -2.0, 4.0),
    Sinusoid(2.0, -1.5, 1.0),
]


@pytest.mark.parametrize("path", SINUSOIDS)
@pytest.mark.parametrize("t", [0.0, 0.1, 1.0, 2.5, 7.3])
def test_sinusoid_variation_matches_quadrature(path, t):
    # independent oracle: adaptive quadrature of |derivative|
    if t == 0.0:
        assert path.variation(t) == 0.0
        return
    w, ph = path.frequency, path.phase
    ks = np.arange(-50, 50)
    kinks = ((ks + 0.5) * np.pi - ph) / w
    kinks = kinks[(kinks > 0) & (kinks < t)]
    expected, _ = integrate.quad(lambda s: abs(path.rate(s)), 0.0, t, limit=500, epsabs=1e-13,
                                 points=kinks if kinks.size else None)
    assert path.variation(t) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("path", SINUSOIDS + [Linear(-2.0, 1.0), Constant(3.0)])
@pytest.mark.parametrize("t0,t1", [(0.0, 0.1), (0.3, 0.35), (0.0, 5.0), (1.1, 2.9)])
def test_rate_sup_matches_dense_sampling(path, t0, t1):
    ts = np.linspace(t0, t1, 20001)
    dense = max(abs(path.rate(t)) for t in ts)
    sup = path.rate_sup(t0, t1)
    assert sup >= dense - 1e-12
    assert sup == pytest.approx(dense, rel=1e-6, abs=1e-12)


def test_linear_and_constant_calculus():
    p = Linear(2.0, 1.0)
    assert p(0.5) == 2.0
    assert p.variation(3.0) == 6.0
    assert Linear(-2.0).variation(3.0) == 6.0
    assert Constant(4.0).variation(10.0) == 0.0
    assert Constant(4.0).is_constant and not p.is_constant


def test_scaled_and_shifted():
    s = Sinusoid(1.0, 2.0, 0.5, 1.0)
    assert s.scaled(2.0)(0.7) == pytest.approx(2.0 * s(0.7))
    assert s.shifted(1.0)(0.7) == pytest.approx(s(0.7) + 1.0)
    assert Linear(1.0, 0.0).shifted(1.0)(2.0) == 3.0
    assert Constant(1.0).shifted(1.0) == Constant(2.0)


@pytest.mark.parametrize("components", [
    [Linear(1.0), Constant(0.0)],
    [Linear(0.6), Linear(-0.8)],
    [Sinusoid(0.5, 1.5), Linear(0.3)],
    [Sinusoid(0.3, 2.0), Sinusoid(1.0, 1.0, 1.0)],
])
def test_arc_length_against_quadrature(components):
    path = VectorPath(components)
    for t in (0.25, 1.0, 2.0):
        expected, _ = integrate.quad(lambda s: np.linalg.norm(path.rate(s)), 0.0, t,
                                     limit=500, epsabs=1e-13)
        assert path.arc_length(t) == pytest.approx(expected, abs=1e-10)


def test_arc_length_bounds_displacement(rng):
    path = VectorPath([Sinusoid(0.5, 1.5), Sinusoid(0.2, 3.0, 1.0)])
    for _ in range(50):
        s, t = sorted(rng.uniform(0, 3, 2))
        disp = np.linalg.norm(path(t) - path(s))
        assert disp <= path.arc_length(t) - path.arc_length(s) + 1e-12


def test_moduli_compose():
    a = PathVariation(Linear(2.0))
    b = ArcLength(VectorPath([Linear(3.0), Linear(4.0)]))
    total = sum_moduli([a, ZeroModulus(), b])
    assert isinstance(total, SumModulus)
    assert total.value(1.0) == pytest.approx(7.0)
    assert total.rate(0.3) == pytest.approx(7.0)
    assert total.rate_sup(0.0, 1.0) == pytest.approx(7.0)
    assert isinstance(sum_moduli([ZeroModulus()]), ZeroModulus)
    assert sum_moduli([a]) is a


def test_parse_path_forms():
    assert parse_path(2) == Constant(2.0)
    assert parse_path({"constant": 2}) == Constant(2.0)
    assert parse_path({"linear": {"slope": 1, "offset": 2}}) == Linear(1.0, 2.0)
    s = parse_path({"sinusoid": {"amplitude": 1, "frequency": 2}})
    assert s(math.pi / 4) == pytest.approx(1.0)
    for p in (Constant(1.0), Linear(1.0, 2.0), Sinusoid(1, 2, 3, 4)):
        assert parse_path(p.to_spec()) == p


def test_parse_path_errors():
    with pytest.raises(UnknownKind):
        parse_path({"cubic": {}}, "set.offset")
    with pytest.raises(ScenarioError, match="set.offset"):
        parse_path({"linear": {"offset": 1}}, "set.offset")
    with pytest.raises(ScenarioError):
        parse_path("fast")
