"""Nonlinearity catalog: bulk energy f, capillarity cap, and the profile potential.

A model is the pair (f, cap) entering the energy density
``e(v, v_y) = f(v) + 0.5 * cap(v) * v_y**2``.  The pressure is ``p = -f'``.
All derivatives are closed form.  The additive constant of ``f`` is pinned to
zero; any linear part is absorbed by the Lagrange multiplier ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Scalar = Callable[[np.ndarray], np.ndarray]


class DomainError(ValueError):
    """Evaluation outside the admissible interval of a model."""


@dataclass(frozen=True)
class NonlinearModel:
    name: str
    f: Scalar
    df: Scalar
    d2f: Scalar
    cap: Scalar
    dcap: Scalar
    d2cap: Scalar
    domain: tuple[float, float]
    params: dict = field(default_factory=dict)

    def p(self, v):
        return -self.df(v)

    def dp(self, v):
        return -self.d2f(v)

    def contains(self, v) -> bool:
        lo, hi = self.domain
        v = np.asarray(v, dtype=float)
        return bool(np.all((v > lo) & (v < hi)))

    def check(self, v) -> None:
        if not self.contains(v):
            raise DomainError(f"{self.name}: v outside domain {self.domain}")
        if np.any(np.asarray(self.cap(v)) <= 0.0):
            raise DomainError(f"{self.name}: capillarity not positive")


@dataclass(frozen=True)
class PotentialEval:
    W: float
    dW: float
    d2W: float


@dataclass(frozen=True)
class EulerianModel:
    """Energy in density variables: F(rho) = rho f(1/rho), Cap(rho) = rho**-5 cap(1/rho)."""

    base: NonlinearModel

    def F(self, rho):
        rho = _positive(rho)
        return rho * self.base.f(1.0 / rho)

    def Cap(self, rho):
        rho = _positive(rho)
        return rho ** -5 * self.base.cap(1.0 / rho)


def _positive(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise DomainError("density must be positive")
    return rho


def eulerian_view(model: NonlinearModel) -> EulerianModel:
    return EulerianModel(model)


def W(model: NonlinearModel, v, lam: float, c: float):
    return -model.f(v) - 0.5 * c * v * v + lam * v


def dW(model: NonlinearModel, v, lam: float, c: float):
    return model.p(v) - c * v + lam


def d2W(model: NonlinearModel, v, lam: float, c: float):
    return model.dp(v) - c


def potential(model: NonlinearModel, v: float, lam: float, c: float) -> PotentialEval:
    """Value and first two derivatives of W(v) = -f(v) - c v^2/2 + lam v."""
    model.check(v)
    return PotentialEval(
        float(W(model, v, lam, c)), float(dW(model, v, lam, c)), float(d2W(model, v, lam, c))
    )


def _const(value: float) -> Scalar:
    return lambda v: value + 0.0 * np.asarray(v, dtype=float)


_REAL_LINE = (-math.inf, math.inf)
_HALF_LINE = (0.0, math.inf)


def _power_domain(gamma: float) -> tuple[float, float]:
    return _REAL_LINE if float(gamma).is_integer() else _HALF_LINE


def _power_law(gamma: float, sign: float) -> NonlinearModel:
    # p = e (g+1) v^g, f = -e v^(g+1)
    g, e = float(gamma), float(sign)
    return NonlinearModel(
        name="power-law",
        f=lambda v: -e * v ** (g + 1),
        df=lambda v: -e * (g + 1) * v ** g,
        d2f=lambda v: -e * (g + 1) * g * v ** (g - 1),
        cap=_const(1.0),
        dcap=_const(0.0),
        d2cap=_const(0.0),
        domain=_power_domain(g),
        params={"gamma": g, "sign": e},
    )


def _boussinesq(gamma: float) -> NonlinearModel:
    # p = v - v^g
    g = float(gamma)
    return NonlinearModel(
        name="boussinesq",
        f=lambda v: -0.5 * v * v + v ** (g + 1) / (g + 1),
        df=lambda v: -v + v ** g,
        d2f=lambda v: -1.0 + g * v ** (g - 1),
        cap=_const(1.0),
        dcap=_const(0.0),
        d2cap=_const(0.0),
        domain=_power_domain(g),
        params={"gamma": g},
    )


def _perfect_gas() -> NonlinearModel:
    # p = 1/(2v), cap = v^-5 (constant Eulerian capillarity)
    return NonlinearModel(
        name="perfect-gas",
        f=lambda v: -0.5 * np.log(v),
        df=lambda v: -0.5 / v,
        d2f=lambda v: 0.5 / (v * v),
        cap=lambda v: v ** -5.0,
        dcap=lambda v: -5.0 * v ** -6.0,
        d2cap=lambda v: 30.0 * v ** -7.0,
        domain=_HALF_LINE,
    )


def _shallow_water(name: str, cap: Scalar, dcap: Scalar, d2cap: Scalar, params=None) -> NonlinearModel:
    # f = 1/(2v), p = 1/(2v^2)
    return NonlinearModel(
        name=name,
        f=lambda v: 0.5 / v,
        df=lambda v: -0.5 / (v * v),
        d2f=lambda v: 1.0 / (v * v * v),
        cap=cap,
        dcap=dcap,
        d2cap=d2cap,
        domain=_HALF_LINE,
        params=params or {},
    )


def _nls() -> NonlinearModel:
    return _shallow_water(
        "nls-capillarity",
        cap=lambda v: 0.25 * v ** -4.0,
        dcap=lambda v: -v ** -5.0,
        d2cap=lambda v: 5.0 * v ** -6.0,
    )


def _constant_cap(kappa: float) -> NonlinearModel:
    k = float(kappa)
    if k <= 0:
        raise ValueError("capillarity constant must be positive")
    return _shallow_water(
        "constant-capillarity", _const(k), _const(0.0), _const(0.0), {"kappa": k}
    )


def _synthetic_quadratic() -> NonlinearModel:
    # f = 0; with c = -2, lam = 0 the potential is W = v^2
    return NonlinearModel(
        name="synthetic-quadratic",
        f=_const(0.0),
        df=_const(0.0),
        d2f=_const(0.0),
        cap=_const(1.0),
        dcap=_const(0.0),
        d2cap=_const(0.0),
        domain=_REAL_LINE,
    )


BUILTIN_NAMES = (
    "power-law",
    "kdv3",
    "boussinesq",
    "perfect-gas",
    "nls-capillarity",
    "constant-capillarity",
    "synthetic-quadratic",
)


def make_builtin(name: str, gamma: float | None = None, sign: float = 1.0, kappa: float = 1.0) -> NonlinearModel:
    """Build a catalog model.

    ``power-law`` needs ``gamma`` (>= 2) and ``sign`` (+1 focusing, -1
    defocusing); ``boussinesq`` needs ``gamma``; ``constant-capillarity``
    takes the constant ``kappa``.
    """
    if name in ("power-law", "boussinesq"):
        if gamma is None or not math.isfinite(gamma) or gamma < 2:
            raise ValueError(f"{name}: exponent gamma >= 2 required, got {gamma}")
    if name == "power-law":
        if sign not in (1, -1, 1.0, -1.0):
            raise ValueError("sign must be +1 or -1")
        return _power_law(gamma, sign)
    if name == "kdv3":
        m = _power_law(2.0, 1.0)
        return NonlinearModel(**{**m.__dict__, "name": "kdv3"})
    if name == "boussinesq":
        return _boussinesq(gamma)
    if name == "perfect-gas":
        return _perfect_gas()
    if name == "nls-capillarity":
        return _nls()
    if name == "constant-capillarity":
        return _constant_cap(kappa)
    if name == "synthetic-quadratic":
        return _synthetic_quadratic()
    raise ValueError(f"unknown model {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
