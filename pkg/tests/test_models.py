import math

import numpy as np
import pytest

from wavestab.models import BUILTIN_NAMES, DomainError, eulerian_view, make_builtin, potential

SAMPLE_V = {
    "power-law": [0.3, 1.0, 2.5],
    "kdv3": [-1.0, 0.5, 3.0],
    "boussinesq": [-0.7, 0.2, 1.5],
    "perfect-gas": [0.4, 1.0, 3.0],
    "nls-capillarity": [0.4, 1.0, 3.0],
    "constant-capillarity": [0.4, 1.0, 3.0],
    "synthetic-quadratic": [-1.0, 0.0, 2.0],
}


def _fd(fun, v, h=1e-5):
    return (fun(v + h) - fun(v - h)) / (2 * h)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_derivatives_consistent(name):
    m = make_builtin(name, gamma=3.0) if name in ("power-law", "boussinesq") else make_builtin(name)
    for v in SAMPLE_V[name]:
        assert m.df(v) == pytest.approx(_fd(m.f, v), rel=1e-7, abs=1e-8)
        assert m.d2f(v) == pytest.approx(_fd(m.df, v), rel=1e-7, abs=1e-8)
        assert m.dcap(v) == pytest.approx(_fd(m.cap, v), rel=1e-7, abs=1e-8)
        assert m.d2cap(v) == pytest.approx(_fd(m.dcap, v), rel=1e-7, abs=1e-8)
        assert m.cap(v) > 0


def test_closed_forms():
    m = make_builtin("power-law", gamma=2.0, sign=1.0)
    for v in (0.5, 2.0):
        assert m.p(v) == pytest.approx(3 * v * v, rel=1e-15)
        assert m.f(v) == pytest.approx(-v ** 3, rel=1e-15)
        assert m.cap(v) == 1.0
    g = make_builtin("perfect-gas")
    for v in (0.5, 2.0):
        assert g.p(v) == pytest.approx(1 / (2 * v), rel=1e-15)
        assert g.f(v) == pytest.approx(-0.5 * math.log(v), rel=1e-15, abs=1e-16)
        assert g.cap(v) == pytest.approx(v ** -5, rel=1e-15)
    b = make_builtin("boussinesq", gamma=3.0)
    assert b.p(0.7) == pytest.approx(0.7 - 0.7 ** 3, rel=1e-15)


def test_builtin_errors():
    with pytest.raises(ValueError):
        make_builtin("no-such-model")
    with pytest.raises(ValueError):
        make_builtin("power-law", gamma=1.0)


def test_potential_examples():
    k = make_builtin("kdv3")
    P = potential(k, 1.0, 0.0, 0.0)
    assert (P.W, P.dW, P.d2W) == pytest.approx((1.0, 3.0, 6.0))
    s = make_builtin("synthetic-quadratic")
    assert potential(s, 0.5, 0.0, -2.0).W == pytest.approx(0.25)


def test_kdv_critical_points():
    # 3v^2 - 60v - 60 = 0 (quadratic-formula oracle)
    k = make_builtin("kdv3")
    roots = np.roots([3.0, -60.0, -60.0])
    saddle, center = sorted(roots)
    assert saddle == pytest.approx(10 - math.sqrt(120))
    assert center == pytest.approx(10 + math.sqrt(120))
    for v in roots:
        assert abs(potential(k, v, -60.0, 60.0).dW) < 1e-10
    assert potential(k, saddle, -60.0, 60.0).d2W < 0
    assert potential(k, center, -60.0, 60.0).d2W > 0


def test_potential_domain():
    g = make_builtin("perfect-gas")
    with pytest.raises(DomainError):
        potential(g, -1.0, 0.0, 0.0)


def test_eulerian_view():
    n = eulerian_view(make_builtin("nls-capillarity"))
    for rho in (0.3, 1.0, 2.0):
        assert n.Cap(rho) == pytest.approx(1 / (4 * rho), rel=1e-14)
        assert n.F(rho) == pytest.approx(0.5 * rho * rho, rel=1e-14)
    c = eulerian_view(make_builtin("constant-capillarity", kappa=1.0))
    assert c.Cap(2.0) == pytest.approx(0.03125, rel=1e-15)
    with pytest.raises(ValueError):
        c.Cap(0.0)


@pytest.mark.parametrize("name", ["perfect-gas", "nls-capillarity", "constant-capillarity"])
def test_eulerian_identities(name):
    m = make_builtin(name)
    e = eulerian_view(m)
    for rho in (0.25, 0.8, 1.7):
        assert e.F(rho) == pytest.approx(rho * m.f(1 / rho), rel=1e-15, abs=1e-16)
        assert e.Cap(rho) == pytest.approx(rho ** -5 * m.cap(1 / rho), rel=1e-15)
