"""Value, gradient and Hessian of the abbreviated action.

For the reduced problem ``theta(mu, lam, c)`` the gradient is exact:
``(Upsilon, -int v, int v^2/2)``.  Second derivatives come from finite
differences.  The Euler-Korteweg action is
``Theta(mu, lam, j, sigma) = theta(lam - sigma^2/2, j*sigma - mu, -j^2)``
and its derivatives follow by the chain rule.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass, field, replace

import numpy as np

from .models import NonlinearModel
from .profile import (
    ProfileIntegrals,
    TurningPoints,
    WaveError,
    WaveParamsEK,
    WaveParamsQ,
    ek_to_qkdv,
    find_turning_points,
    profile_integrals,
)


@dataclass(frozen=True)
class Numerics:
    delta_nu: float = 1e-4
    relative_step: bool = True
    delta_omega: float = 1e-4
    rule: str = "midpoint"
    hessian: str = "grad-fd"
    hint: tuple[float, float] | None = None

    def steps(self, point: np.ndarray) -> np.ndarray:
        if self.relative_step:
            return self.delta_nu * np.maximum(1.0, np.abs(point))
        return np.full(point.shape, self.delta_nu)


class StencilError(WaveError):
    """A finite-difference displacement left the wave-existence region."""


@dataclass(frozen=True)
class ThetaPoint:
    value: float
    grad: np.ndarray
    integrals: ProfileIntegrals
    turning: TurningPoints


def theta_point(model: NonlinearModel, params: WaveParamsQ, num: Numerics = Numerics()) -> ThetaPoint:
    tp = find_turning_points(model, params, num.hint)
    I = profile_integrals(model, params, tp, num.delta_omega, num.rule)
    grad = np.array([I.period, -I.mean, I.half_square])
    return ThetaPoint(I.action, grad, I, tp)


@dataclass(frozen=True)
class ActionJet3:
    params: WaveParamsQ
    value: float
    grad: np.ndarray
    hess: np.ndarray
    fd_grad: np.ndarray
    asym_residual: float
    limit_zone: str | None
    integrals: ProfileIntegrals
    turning: TurningPoints
    noise_flag: bool = False

    @property
    def grad_mismatch(self) -> float:
        """Relative gap between the quadrature gradient and its FD estimate."""
        return float(np.max(np.abs(self.fd_grad - self.grad) / np.maximum(np.abs(self.grad), 1e-300)))


@dataclass(frozen=True)
class ActionJet4:
    params: WaveParamsEK
    value: float
    grad: np.ndarray
    hess: np.ndarray
    source: str
    underlying: ActionJet3
    direct_hess: np.ndarray | None = None
    source_gap: float | None = field(default=None)

    @property
    def limit_zone(self) -> str | None:
        return self.underlying.limit_zone


def _displaced(model, params: WaveParamsQ, point, num):
    try:
        return theta_point(model, WaveParamsQ(*point), num)
    except WaveError as exc:
        names = ("mu", "lam", "c")
        shift = np.asarray(point) - params.as_array()
        k = int(np.argmax(np.abs(shift)))
        sign = "+" if shift[k] > 0 else "-"
        raise StencilError(f"stencil point {names[k]}{sign}{abs(shift[k]):.3g} failed: {exc}") from exc


def _map(executor: Executor | None, fn, items):
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


def action_jet_qkdv(
    model: NonlinearModel,
    params: WaveParamsQ,
    num: Numerics = Numerics(),
    executor: Executor | None = None,
) -> ActionJet3:
    """Action jet of the reduced problem at ``params`` in the ordering (mu, lam, c)."""
    centre = theta_point(model, params, num)
    x0 = params.as_array()
    h = num.steps(x0)
    eye = np.eye(3)
    if num.hessian == "grad-fd":
        pts = [x0 + s * h[k] * eye[k] for k in range(3) for s in (1.0, -1.0)]
    elif num.hessian == "second-diff":
        pts = [x0 + s * h[k] * eye[k] for k in range(3) for s in (1.0, -1.0)]
        for a in range(3):
            for b in range(a + 1, 3):
                for sa in (1.0, -1.0):
                    for sb in (1.0, -1.0):
                        pts.append(x0 + sa * h[a] * eye[a] + sb * h[b] * eye[b])
    else:
        raise ValueError(f"unknown hessian method {num.hessian!r}")
    # stencil points stay on the centre's branch of a multi-well potential
    local = replace(num, hint=(centre.turning.v2, centre.turning.v3))
    vals = _map(executor, lambda p: _displaced(model, params, p, local), pts)
    plus, minus = vals[0:6:2], vals[1:6:2]
    fd_grad = np.array([(plus[k].value - minus[k].value) / (2 * h[k]) for k in range(3)])
    if num.hessian == "grad-fd":
        raw = np.column_stack([(plus[k].grad - minus[k].grad) / (2 * h[k]) for k in range(3)])
    else:
        raw = np.empty((3, 3))
        for k in range(3):
            raw[k, k] = (plus[k].value - 2 * centre.value + minus[k].value) / h[k] ** 2
        it = iter(vals[6:])
        for a in range(3):
            for b in range(a + 1, 3):
                pp, pm, mp, mm = (next(it).value for _ in range(4))
                raw[a, b] = raw[b, a] = (pp - pm - mp + mm) / (4 * h[a] * h[b])
    norm = np.linalg.norm(raw)
    asym = float(np.linalg.norm(raw - raw.T) / norm) if norm > 0 else 0.0
    hess = 0.5 * (raw + raw.T)
    noise = 1e-13 * np.max(np.abs(centre.grad)) / np.min(h)
    noise_flag = bool(np.any((np.abs(hess) < 10 * noise) & (np.abs(hess) > 0)))
    return ActionJet3(
        params=params,
        value=centre.value,
        grad=centre.grad,
        hess=hess,
        fd_grad=fd_grad,
        asym_residual=asym,
        limit_zone=centre.turning.limit_zone,
        integrals=centre.integrals,
        turning=centre.turning,
        noise_flag=noise_flag,
    )


def _chain(grad3: np.ndarray, hess3: np.ndarray | None, j: float, sigma: float):
    """Gradient and Hessian of Theta in (mu, lam, j, sigma) from theta's jet."""
    # rows: derivatives of (lam - sigma^2/2, j sigma - mu, -j^2)
    J = np.array(
        [
            [0.0, 1.0, 0.0, -sigma],
            [-1.0, 0.0, sigma, j],
            [0.0, 0.0, -2.0 * j, 0.0],
        ]
    )
    grad4 = J.T @ grad3
    if hess3 is None:
        return grad4, None
    t_mu, t_lam, t_c = grad3
    hess4 = J.T @ hess3 @ J
    hess4[3, 3] -= t_mu
    hess4[2, 3] += t_lam
    hess4[3, 2] += t_lam
    hess4[2, 2] -= 2.0 * t_c
    return grad4, hess4


def action_jet_ek(
    model: NonlinearModel,
    params: WaveParamsEK,
    num: Numerics = Numerics(),
    source: str = "chain",
    executor: Executor | None = None,
) -> ActionJet4:
    """Action jet of the Euler-Korteweg problem in the ordering (mu, lam, j, sigma).

    ``source`` is ``chain`` (default), ``direct`` (central differences of the
    exact four-gradient in the practical variables) or ``both``.
    """
    if source not in ("chain", "direct", "both"):
        raise ValueError(f"unknown source {source!r}")
    mapped = ek_to_qkdv(params)
    jet3 = action_jet_qkdv(model, mapped, num, executor)
    grad4, chain_hess = _chain(jet3.grad, jet3.hess, params.j, params.sigma)
    direct = None
    if source in ("direct", "both"):
        direct = _direct_hessian(model, params, num, executor)
    hess = chain_hess if source != "direct" else direct
    gap = None
    if direct is not None:
        scale = np.maximum(np.abs(chain_hess), 1e-300)
        gap = float(np.max(np.abs(direct - chain_hess) / scale))
    return ActionJet4(
        params=params,
        value=jet3.value,
        grad=grad4,
        hess=hess,
        source=source,
        underlying=jet3,
        direct_hess=direct,
        source_gap=gap,
    )


def _direct_hessian(model, params: WaveParamsEK, num: Numerics, executor) -> np.ndarray:
    x0 = params.as_array()
    h = num.steps(x0)
    eye = np.eye(4)
    pts = [x0 + s * h[k] * eye[k] for k in range(4) for s in (1.0, -1.0)]

    def grad_at(x):
        q = ek_to_qkdv(WaveParamsEK(*x))
        try:
            g3 = theta_point(model, q, num).grad
        except WaveError as exc:
            raise StencilError(f"direct stencil point {tuple(x)} failed: {exc}") from exc
        return _chain(g3, None, x[2], x[3])[0]

    grads = _map(executor, grad_at, pts)
    raw = np.column_stack([(grads[2 * k] - grads[2 * k + 1]) / (2 * h[k]) for k in range(4)])
    return 0.5 * (raw + raw.T)


def eta(jet3: ActionJet3, j: float) -> float:
    """(2 theta_c theta_mu - theta_lam^2) / (4 j^2 theta_mu)."""
    return eta_from_grad(jet3.grad, j)


def eta_from_grad(grad: np.ndarray, j: float) -> float:
    t_mu, t_lam, t_c = (float(x) for x in grad)
    if j == 0:
        raise ValueError("eta is undefined for j = 0")
    if t_mu <= 0:
        raise ValueError("theta_mu must be positive")
    num = 2.0 * t_c * t_mu - t_lam ** 2
    if num <= 0:
        raise ValueError("inconsistent gradient: 2 theta_c theta_mu - theta_lam^2 must be positive")
    return num / (4.0 * j * j * t_mu)
