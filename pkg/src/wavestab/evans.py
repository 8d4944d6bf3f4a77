"""Co-periodic Evans functions and the Sturm discriminant along a computed profile.

All first-order systems are written in variables that make them traceless, so
every monodromy matrix has unit determinant.  Coefficients are taken at the
profile samples; the profile is sampled on a grid twice as fine as the
integration grid so that RK4 half steps land on samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .models import NonlinearModel, dW
from .profile import (
    ProfileSamples,
    TurningPoints,
    WaveParamsEK,
    WaveParamsQ,
    ek_to_qkdv,
    find_turning_points,
    profile_integrals,
    profile_rhs,
    reconstruct_profile,
)


@dataclass(frozen=True)
class Coefficients:
    """Stiffness K = cap(v) and potential q of the operator q h - (K h')' on a grid."""

    x: np.ndarray
    K: np.ndarray
    q: np.ndarray
    period: float


def operator_coefficients(model: NonlinearModel, params: WaveParamsQ, profile: ProfileSamples, shift: float | None = None) -> Coefficients:
    """Potential of the linearized operator along the profile.

    q = f''(v) + shift + cap''(v) v_x^2 / 2 - (cap'(v) v_x)_x, with ``shift``
    defaulting to the wave speed ``c``.  v_xx comes from the profile ODE.
    """
    v, vx = profile.v, profile.vx
    c = params.c if shift is None else shift
    K = model.cap(v) + 0.0 * v
    dK, d2K = model.dcap(v) + 0.0 * v, model.d2cap(v) + 0.0 * v
    vxx = (-dW(model, v, params.lam, params.c) - 0.5 * dK * vx * vx) / K
    q = model.d2f(v) + c + 0.5 * d2K * vx * vx - (d2K * vx * vx + dK * vxx)
    return Coefficients(profile.x, K, q, float(profile.x[-1]))


def _monodromy(A0: np.ndarray, A1: np.ndarray, r: np.ndarray, period: float) -> np.ndarray:
    """Fundamental matrices at x = period for F' = (A0(x) + r A1) F, batched over r.

    ``A0`` has shape (2 n + 1, d, d) on the sample grid; RK4 uses step
    period / n with half steps on odd samples.
    """
    n = (A0.shape[0] - 1) // 2
    d = A0.shape[1]
    h = period / n
    r = np.asarray(r, dtype=float)
    F = np.broadcast_to(np.eye(d), (r.size, d, d)).copy()
    rA1 = r[:, None, None] * A1[None]
    for i in range(n):
        Aa = A0[2 * i][None] + rA1
        Am = A0[2 * i + 1][None] + rA1
        Ab = A0[2 * i + 2][None] + rA1
        k1 = Aa @ F
        k2 = Am @ (F + 0.5 * h * k1)
        k3 = Am @ (F + 0.5 * h * k2)
        k4 = Ab @ (F + h * k3)
        F = F + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(F)):
            raise OverflowError("fundamental matrix overflow; reduce r_max")
    return F


def _qkdv_system(co: Coefficients):
    n = co.K.size
    A0 = np.zeros((n, 3, 3))
    A0[:, 0, 1] = 1.0 / co.K
    A0[:, 1, 0] = co.q
    A0[:, 1, 2] = -1.0
    A1 = np.zeros((3, 3))
    A1[2, 0] = 1.0
    return A0, A1


def _ekl_system(co: Coefficients, j: float):
    # state (v, K v', w, a v); z v = (w - j v)', z w = (a v - j w)'
    n = co.K.size
    A0 = np.zeros((n, 4, 4))
    A0[:, 0, 1] = 1.0 / co.K
    A0[:, 1, 0] = co.q
    A0[:, 1, 3] = -1.0
    A0[:, 2, 1] = j / co.K
    A0[:, 3, 1] = j * j / co.K
    A1 = np.zeros((4, 4))
    A1[2, 0] = 1.0
    A1[3, 0] = j
    A1[3, 2] = 1.0
    return A0, A1


def _sturm_system(co: Coefficients):
    n = co.K.size
    A0 = np.zeros((n, 2, 2))
    A0[:, 0, 1] = 1.0 / co.K
    A0[:, 1, 0] = co.q
    A1 = np.zeros((2, 2))
    A1[1, 0] = -1.0
    return A0, A1


@dataclass(frozen=True)
class EvansScan:
    r: np.ndarray
    values: np.ndarray
    sign_changes: int
    cumulative_sign_changes: np.ndarray
    power: int
    fit_coeff: float
    fit_slope: float
    fit_window: tuple[float, float]
    tail_sign: int
    det_drift: float
    noise: float

    @property
    def r_max(self) -> float:
        return float(self.r[-1])


def default_r_max(co: Coefficients) -> float:
    return 10.0 * (float(np.max(np.abs(co.q))) + 1.0) ** 2


def _r_grid(r_max: float, n_grid: int, decades: float) -> np.ndarray:
    return r_max * np.logspace(-decades, 0.0, n_grid)


def _evans_values(A0, A1, r, period):
    F = _monodromy(A0, A1, r, period)
    eye = np.eye(A0.shape[1])
    return np.linalg.det(F - eye), np.abs(np.linalg.det(F) - 1.0)


def _fit(r: np.ndarray, vals: np.ndarray, power: int, floor: np.ndarray):
    """Coefficient of r^power over the lowest two decades where the log-log slope is ``power``."""
    good = np.abs(vals) > floor
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.diff(np.log(np.abs(vals))) / np.diff(np.log(r))
    ok = good[:-1] & good[1:] & (vals[:-1] * vals[1:] > 0) & (np.abs(slopes - power) < 0.1)
    run_start, run_len = None, 0
    for k, flag in enumerate(ok):
        if flag:
            if run_start is None:
                run_start = k
            run_len += 1
            if run_len >= 4:
                break
        else:
            run_start, run_len = None, 0
    if run_start is None or run_len < 4:
        return math.nan, math.nan, (math.nan, math.nan)
    lo = r[run_start]
    idx = [run_start]
    for k in range(run_start, ok.size):
        if not ok[k] or r[k + 1] > 100.0 * lo:
            break
        idx.append(k + 1)
    rw, vw = r[idx], vals[idx]
    slope = float(np.polyfit(np.log(rw), np.log(np.abs(vw)), 1)[0])
    coeff = float(np.mean(vw / rw ** power))
    return coeff, slope, (float(rw[0]), float(rw[-1]))


def _noise_floor(r: np.ndarray, vals: np.ndarray, power: int) -> np.ndarray:
    """Envelope of the discretization artifact, a lower power of r than ``power``.

    The artifact's exponent is read off the two smallest r; if they already
    follow r**power no artifact is visible and the floor is zero.
    """
    a, b = abs(vals[0]), abs(vals[1])
    if a == 0.0 or b == 0.0:
        return np.full(r.size, 1e-300)
    k = round(math.log(b / a) / math.log(r[1] / r[0]))
    if k >= power:
        return np.full(r.size, 1e-300)
    k = max(k, 1)
    return 10.0 * a * (r / r[0]) ** k


def _scan(A0, A1, period, power, r_max, n_grid, decades):
    r = _r_grid(r_max, n_grid, decades)
    vals, drift = _evans_values(A0, A1, r, period)
    keep = drift <= 1e-6
    if not keep[0]:
        raise OverflowError("monodromy determinant drift at the smallest r; refine the profile grid")
    # beyond the first violation of det F = 1 the determinant is cancellation noise
    stop = int(np.argmin(keep)) if not np.all(keep) else r.size
    r, vals, drift = r[:stop], vals[:stop], drift[:stop]
    floor = _noise_floor(r, vals, power)
    signs = np.where(np.abs(vals) > floor, np.sign(vals), 0.0)
    flips, last, count = np.zeros(r.size, dtype=int), 0.0, 0
    for k, s in enumerate(signs):
        if s != 0:
            if last != 0 and s != last:
                count += 1
            last = s
        flips[k] = count
    coeff, slope, window = _fit(r, vals, power, floor)
    return EvansScan(
        r=r,
        values=vals,
        sign_changes=count,
        cumulative_sign_changes=flips,
        power=power,
        fit_coeff=coeff,
        fit_slope=slope,
        fit_window=window,
        tail_sign=int(np.sign(vals[-1])),
        det_drift=float(np.max(drift)),
        noise=float(floor[0]),
    )


def evans_scan_qkdv(
    profile: ProfileSamples,
    model: NonlinearModel,
    params: WaveParamsQ,
    r_max: float | None = None,
    n_grid: int = 121,
    decades: float = 12.0,
) -> EvansScan:
    """d(r) = det(F(period; r) - I) for (q h - (K h')')' = r h on r in (0, r_max].

    The profile must be sampled with an even number of steps; the scan
    integrates with half that many RK4 steps.  ``fit_coeff`` estimates the
    coefficient of r^3, to be compared with det Hess theta.
    """
    co = operator_coefficients(model, params, profile)
    _check_even(co)
    A0, A1 = _qkdv_system(co)
    r_max = default_r_max(co) if r_max is None else r_max
    return _scan(A0, A1, co.period, 3, r_max, n_grid, decades)


def evans_scan_ekl(
    profile: ProfileSamples,
    model: NonlinearModel,
    ekparams: WaveParamsEK,
    r_max: float | None = None,
    n_grid: int = 121,
    decades: float = 12.0,
) -> EvansScan:
    """D(r) for the Lagrangian Euler-Korteweg linearization; r^4 coefficient vs det Hess Theta.

    ``profile`` is the reduced profile at the mapped parameters.  The second
    equation uses the Hessian of the energy alone (no speed shift).
    """
    params = ek_to_qkdv(ekparams)
    co = operator_coefficients(model, params, profile, shift=0.0)
    _check_even(co)
    A0, A1 = _ekl_system(co, ekparams.j)
    r_max = default_r_max(co) if r_max is None else r_max
    return _scan(A0, A1, co.period, 4, r_max, n_grid, decades)


def _check_even(co: Coefficients) -> None:
    if (co.K.size - 1) % 2:
        raise ValueError("profile must be sampled with an even number of steps")


@dataclass(frozen=True)
class DiscriminantEval:
    r: np.ndarray
    T: np.ndarray
    T0_residual: float
    dT0: float
    det_drift: float


def sturm_discriminant(
    profile: ProfileSamples,
    model: NonlinearModel,
    params: WaveParamsQ,
    r_list=(),
    step: float | None = None,
) -> DiscriminantEval:
    """Trace of the monodromy of (K v')' = (q - r) v, with T'(0) by central difference."""
    co = operator_coefficients(model, params, profile)
    _check_even(co)
    A0, A1 = _sturm_system(co)
    if step is None:
        step = 1e-3 * (float(np.max(np.abs(co.q))) + 1.0) * 1e-3
    rs = np.concatenate([[0.0, step, -step], np.asarray(r_list, dtype=float)])
    F = _monodromy(A0, A1, rs, co.period)
    T = F[:, 0, 0] + F[:, 1, 1]
    drift = float(np.max(np.abs(F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0] - 1.0)))
    if drift > 1e-6:
        raise ArithmeticError(f"monodromy determinant drift {drift:.2e}; refine the profile grid")
    return DiscriminantEval(
        r=rs[3:],
        T=T[3:],
        T0_residual=abs(float(T[0]) - 2.0),
        dT0=float((T[1] - T[2]) / (2.0 * step)),
        det_drift=drift,
    )


def sample_profile(model: NonlinearModel, params: WaveParamsQ, n_steps: int = 4096, hint=None) -> tuple[TurningPoints, ProfileSamples]:
    """Turning points and an RK4 profile with an even step count."""
    tp = find_turning_points(model, params, hint)
    period = profile_integrals(model, params, tp).period
    n_steps += n_steps % 2
    return tp, reconstruct_profile(model, params, tp, n_steps, period)



def sturm_adaptive(
    model: NonlinearModel,
    params: WaveParamsQ,
    r_list=(),
    step: float | None = None,
    tp: TurningPoints | None = None,
    rtol: float = 1e-12,
) -> DiscriminantEval:
    """Discriminant with the profile and the monodromy integrated together by DOP853.

    Adaptive steps follow stiff stretches of the profile (strongly varying
    capillarity) that a uniform grid resolves only slowly.
    """
    if tp is None:
        tp = find_turning_points(model, params)
    period = profile_integrals(model, params, tp).period
    rhs = profile_rhs(model, params)
    c = params.c
    if step is None:
        # scale of q from the extreme points of the orbit, where v_x = 0
        qs = [abs(float(model.d2f(v) + c - model.dcap(v) * rhs(v, 0.0)[1])) for v in (tp.v2, tp.v3, tp.v0)]
        step = 1e-6 * (max(qs) + 1.0)
    rs = np.concatenate([[0.0, step, -step], np.asarray(r_list, dtype=float)])
    m = rs.size

    def f(x, y):
        v, vx = y[0], y[1]
        _, vxx = rhs(v, vx)
        K = float(model.cap(v))
        dK, d2K = float(model.dcap(v)), float(model.d2cap(v))
        q = float(model.d2f(v)) + c + 0.5 * d2K * vx * vx - (d2K * vx * vx + dK * vxx)
        F = y[2:].reshape(m, 2, 2)
        dF = np.empty_like(F)
        dF[:, 0, :] = F[:, 1, :] / K
        dF[:, 1, :] = (q - rs)[:, None] * F[:, 0, :]
        return np.concatenate([[vx, vxx], dF.ravel()])

    y0 = np.concatenate([[tp.v2, 0.0], np.tile(np.eye(2).ravel(), m)])
    sol = solve_ivp(f, (0.0, period), y0, method="DOP853", rtol=rtol, atol=1e-14)
    if not sol.success:
        raise ArithmeticError(f"discriminant integration failed: {sol.message}")
    F = sol.y[2:, -1].reshape(m, 2, 2)
    T = F[:, 0, 0] + F[:, 1, 1]
    drift = float(np.max(np.abs(F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0] - 1.0)))
    if drift > 1e-6:
        raise ArithmeticError(f"monodromy determinant drift {drift:.2e}")
    return DiscriminantEval(
        r=rs[3:],
        T=T[3:],
        T0_residual=abs(float(T[0]) - 2.0),
        dT0=float((T[1] - T[2]) / (2.0 * step)),
        det_drift=drift,
    )
