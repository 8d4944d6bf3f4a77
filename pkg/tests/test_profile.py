import math

import numpy as np
import pytest

from wavestab.models import W, make_builtin
from wavestab.profile import (
    AboveBarrier,
    NoOscillation,
    WaveParamsEK,
    WaveParamsQ,
    ek_to_qkdv,
    energy_window,
    find_turning_points,
    profile_integrals,
    reconstruct_profile,
)

SQ = make_builtin("synthetic-quadratic")
KDV = make_builtin("kdv3")
CENTER = 10 + math.sqrt(120)


def test_ek_to_qkdv_examples():
    assert ek_to_qkdv(WaveParamsEK(-2.5, 2.0, 1.0, 0.0)) == WaveParamsQ(2.0, 2.5, -1.0)
    assert ek_to_qkdv(WaveParamsEK(0.0, 0.0, 0.0, 0.0)) == WaveParamsQ(0.0, 0.0, -0.0)
    q = ek_to_qkdv(WaveParamsEK(-2.0, 1.0, -0.1, 0.0))
    assert (q.mu, q.lam, q.c) == pytest.approx((1.0, 2.0, -0.01), rel=1e-15)
    q = ek_to_qkdv(WaveParamsEK(0.3, 1.0, 2.0, 0.5))
    assert (q.mu, q.lam, q.c) == pytest.approx((0.875, 0.7, -4.0))


def test_synthetic_turning_points():
    tp = find_turning_points(SQ, WaveParamsQ(1.0, 0.0, -2.0))
    assert tp.v2 == pytest.approx(-1.0, abs=1e-12)
    assert tp.v3 == pytest.approx(1.0, abs=1e-12)
    assert tp.v0 == pytest.approx(0.0, abs=1e-12)


def _bisect(fun, a, b):
    fa = fun(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        if (fun(m) > 0) == (fa > 0):
            a, fa = m, fun(m)
        else:
            b = m
        if b - a < 1e-12 * max(1.0, abs(m)):
            break
    return 0.5 * (a + b)


def test_kdv_turning_points_bisection_oracle():
    w0 = float(W(KDV, CENTER, -60.0, 60.0))
    params = WaveParamsQ(w0 + 100.0, -60.0, 60.0)
    tp = find_turning_points(KDV, params)
    fun = lambda v: float(W(KDV, v, -60.0, 60.0)) - params.mu
    assert tp.v2 < tp.v0 < tp.v3
    assert tp.v0 == pytest.approx(CENTER, rel=1e-12)
    assert tp.v2 == pytest.approx(_bisect(fun, CENTER - 10, CENTER), rel=1e-11)
    assert tp.v3 == pytest.approx(_bisect(fun, CENTER, CENTER + 10), rel=1e-11)
    assert max(tp.res2, tp.res3) <= 1e-10


def test_turning_point_errors():
    w0 = float(W(KDV, CENTER, -60.0, 60.0))
    with pytest.raises(NoOscillation):
        find_turning_points(KDV, WaveParamsQ(w0 - 1.0, -60.0, 60.0))
    with pytest.raises(AboveBarrier):
        find_turning_points(KDV, WaveParamsQ(40.0, -60.0, 60.0))


@pytest.mark.parametrize("mu", [0.25, 1.0, 7.0])
def test_synthetic_integrals_exact(mu):
    params = WaveParamsQ(mu, 0.0, -2.0)
    I = profile_integrals(SQ, params, find_turning_points(SQ, params))
    assert I.period == pytest.approx(math.pi * math.sqrt(2), rel=1e-8)
    assert I.action == pytest.approx(math.pi * math.sqrt(2) * mu, rel=1e-8)
    assert I.mean == pytest.approx(0.0, abs=1e-8)
    # mean of v^2 over a period is mu / 2
    assert I.half_square == pytest.approx(0.25 * mu * I.period, rel=1e-8)


def test_trapezoid_rule_agrees():
    params = WaveParamsQ(-1000.0, -60.0, 60.0)
    tp = find_turning_points(KDV, params)
    a = profile_integrals(KDV, params, tp, rule="midpoint")
    b = profile_integrals(KDV, params, tp, rule="trapezoid")
    assert b.period == pytest.approx(a.period, rel=1e-9)
    assert b.action == pytest.approx(a.action, rel=1e-9)


def test_quadrature_halving():
    params = WaveParamsQ(-1000.0, -60.0, 60.0)
    tp = find_turning_points(KDV, params)
    a = profile_integrals(KDV, params, tp, delta_omega=1e-4)
    b = profile_integrals(KDV, params, tp, delta_omega=5e-5)
    assert b.period == pytest.approx(a.period, rel=1e-6)
    assert b.action == pytest.approx(a.action, rel=1e-6)


def test_action_derivative_is_period():
    params = WaveParamsQ(-1000.0, -60.0, 60.0)
    h = 1e-3
    th = []
    for mu in (params.mu + h, params.mu - h):
        p = WaveParamsQ(mu, params.lam, params.c)
        th.append(profile_integrals(KDV, p, find_turning_points(KDV, p)).action)
    period = profile_integrals(KDV, params, find_turning_points(KDV, params)).period
    assert (th[0] - th[1]) / (2 * h) == pytest.approx(period, rel=1e-5)


def test_synthetic_profile_closed_form():
    mu = 1.0
    params = WaveParamsQ(mu, 0.0, -2.0)
    tp = find_turning_points(SQ, params)
    prof = reconstruct_profile(SQ, params, tp, 4096)
    exact = -math.sqrt(mu) * np.cos(math.sqrt(2) * prof.x)
    assert np.max(np.abs(prof.v - exact)) <= 1e-6
    assert prof.x[-1] == pytest.approx(math.pi * math.sqrt(2), rel=1e-8)


@pytest.mark.parametrize("mu", [-4000.0, -1000.0, 0.0, 25.0])
def test_kdv_profile_properties(mu):
    params = WaveParamsQ(mu, -60.0, 60.0)
    tp = find_turning_points(KDV, params)
    I = profile_integrals(KDV, params, tp)
    prof = reconstruct_profile(KDV, params, tp, 4096)
    n = prof.v.size - 1
    span = tp.v3 - tp.v2
    assert prof.drift <= 1e-8 * (abs(mu) + 1)
    assert abs(prof.v[-1] - tp.v2) <= 1e-6 * span
    assert abs(prof.v[n // 2] - tp.v3) <= 1e-4 * span
    assert np.all(prof.vx[1:n // 2] > 0)
    # quadrature mean vs trapezoid mean of the samples
    trap = float(np.sum(0.5 * (prof.v[1:] + prof.v[:-1]) * np.diff(prof.x)))
    assert trap == pytest.approx(I.mean, rel=1e-4)
    assert I.cauchy_schwarz_margin > 0


def test_reconstruct_rejects_coarse_grid():
    params = WaveParamsQ(1.0, 0.0, -2.0)
    with pytest.raises(ValueError):
        reconstruct_profile(SQ, params, find_turning_points(SQ, params), 100)


def test_period_grows_toward_soliton():
    periods = []
    for mu in (0.0, 20.0, 28.0, 29.0, 29.06):
        params = WaveParamsQ(mu, -60.0, 60.0)
        periods.append(profile_integrals(KDV, params, find_turning_points(KDV, params)).period)
    assert all(b > a for a, b in zip(periods, periods[1:]))


def test_energy_window():
    w0, top = energy_window(KDV, -60.0, 60.0)
    assert w0 == pytest.approx(float(W(KDV, CENTER, -60.0, 60.0)), rel=1e-12)
    barrier = float(W(KDV, 10 - math.sqrt(120), -60.0, 60.0))
    # bisection on orbit existence stops just short of the soliton limit
    assert barrier * (1 - 1e-4) < top < barrier
