"""Reduced profile equation: turning points, period-type integrals, profile ODE.

The profile solves ``0.5 * cap(v) * v_x**2 + W(v; lam, c) = mu``.  A periodic
orbit oscillates in a well of W between a trough ``v2`` and a crest ``v3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .models import NonlinearModel, W, d2W, dW


class WaveError(ValueError):
    """No periodic wave at the requested parameters."""


class NoWell(WaveError):
    pass


class NoOscillation(WaveError):
    pass


class AboveBarrier(WaveError):
    pass


class NonSimpleRoot(WaveError):
    pass


@dataclass(frozen=True)
class WaveParamsQ:
    mu: float
    lam: float
    c: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.lam, self.c])


@dataclass(frozen=True)
class WaveParamsEK:
    mu: float
    lam: float
    j: float
    sigma: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.lam, self.j, self.sigma])


def ek_to_qkdv(p: WaveParamsEK) -> WaveParamsQ:
    """Map Euler-Korteweg wave parameters to the reduced-profile triple."""
    return WaveParamsQ(p.lam - 0.5 * p.sigma ** 2, p.j * p.sigma - p.mu, -p.j ** 2)


@dataclass(frozen=True)
class TurningPoints:
    v2: float
    v3: float
    v0: float
    res2: float
    res3: float
    limit_zone: str | None = None


@dataclass(frozen=True)
class ProfileIntegrals:
    period: float
    action: float
    mean: float
    half_square: float

    @property
    def cauchy_schwarz_margin(self) -> float:
        """Upsilon * int v^2 - (int v)^2, positive for any nonconstant profile."""
        return self.period * 2.0 * self.half_square - self.mean ** 2


@dataclass(frozen=True)
class ProfileSamples:
    x: np.ndarray
    v: np.ndarray
    vx: np.ndarray
    drift: float


def _scan_grid(model: NonlinearModel, hint: tuple[float, float] | None) -> np.ndarray:
    lo, hi = model.domain
    if hint is not None:
        a, b = max(hint[0], lo), min(hint[1], hi)
        if not a < b:
            raise NoWell(f"hint bracket {hint} does not meet the domain {model.domain}")
        return np.linspace(a, b, 4001)[1:-1] if (a == lo or b == hi) else np.linspace(a, b, 4001)
    pos = np.logspace(-8, 8, 3000)
    if lo == 0.0 and hi == math.inf:
        return pos
    if lo == -math.inf and hi == math.inf:
        return np.concatenate([-pos[::-1], [0.0], pos])
    grid = np.linspace(lo, hi, 6002)[1:-1]
    return grid


def _roots_of_dW(model, lam, c, grid):
    """Brackets of W' = 0 on the grid, classified as centers or saddles."""
    g = dW(model, grid, lam, c)
    centers, saddles = [], []
    for k in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]:
        a, b = grid[k], grid[k + 1]
        if g[k] == 0.0 and k > 0:
            continue
        if g[k] == 0.0:
            root = a
        elif g[k + 1] == 0.0:
            root = b
        else:
            root = brentq(lambda v: float(dW(model, v, lam, c)), a, b, xtol=1e-300, rtol=1e-15, maxiter=400)
        curv = float(d2W(model, root, lam, c))
        (centers if curv > 0 else saddles).append(root)
    return centers, saddles


def _newton_polish(fun, dfun, x, a, b, steps=3):
    for _ in range(steps):
        d = float(dfun(x))
        if d == 0.0:
            break
        nxt = x - float(fun(x)) / d
        if not a <= nxt <= b:
            break
        if nxt == x:
            break
        x = nxt
    return x


def _march(model, params, v0, grid, direction):
    """First root of W = mu moving away from v0; None if the orbit is unbounded."""
    mu, lam, c = params.mu, params.lam, params.c
    if direction > 0:
        pts = grid[grid > v0]
    else:
        pts = grid[grid < v0][::-1]
    if pts.size == 0:
        return None
    excess = W(model, pts, lam, c) - mu
    hits = np.nonzero(excess >= 0.0)[0]
    if hits.size == 0:
        return None
    k = hits[0]
    inner = v0 if k == 0 else pts[k - 1]
    outer = pts[k]
    fun = lambda v: float(W(model, v, lam, c)) - mu
    a, b = min(inner, outer), max(inner, outer)
    root = brentq(fun, a, b, xtol=1e-300, rtol=1e-15, maxiter=400)
    return _newton_polish(fun, lambda v: dW(model, v, lam, c), root, a, b)


def find_turning_points(
    model: NonlinearModel,
    params: WaveParamsQ,
    hint: tuple[float, float] | None = None,
) -> TurningPoints:
    """Trough, crest and well center of the orbit at energy ``params.mu``.

    Centers are bracketed by a sign change of W' with W'' > 0 on a scan grid
    (restricted to ``hint`` if given).  Among admissible centers the deepest
    well is chosen.  The orbit may enclose interior saddles whose level is
    below ``mu``; it must stay bounded inside the domain.
    """
    mu, lam, c = params.mu, params.lam, params.c
    if not all(math.isfinite(x) for x in (mu, lam, c)):
        raise ValueError("wave parameters must be finite")
    scan = _scan_grid(model, hint)
    centers, saddles = _roots_of_dW(model, lam, c, scan)
    if not centers:
        raise NoWell(f"no center of W in {hint or model.domain} for lam={lam}, c={c}")
    centers.sort(key=lambda v: float(W(model, v, lam, c)))
    if mu <= float(W(model, centers[0], lam, c)):
        raise NoOscillation(f"mu={mu} is not above the well minimum")
    march_grid = _scan_grid(model, None) if hint is not None else scan
    failure = None
    for v0 in centers:
        if mu <= float(W(model, v0, lam, c)):
            continue
        v2 = _march(model, params, v0, march_grid, -1)
        v3 = _march(model, params, v0, march_grid, +1)
        if v2 is None or v3 is None:
            failure = AboveBarrier(f"mu={mu} exceeds the barrier of the well at v0={v0:.6g}")
            continue
        return _finish(model, params, v0, v2, v3, saddles)
    raise failure or NoOscillation(f"mu={mu} admits no bounded orbit")


def _finish(model, params, v0, v2, v3, saddles):
    mu, lam, c = params.mu, params.lam, params.c
    w0 = float(W(model, v0, lam, c))
    width = v3 - v2
    slope_scale = (mu - w0) / width if width > 0 else 0.0
    for v in (v2, v3):
        if abs(float(dW(model, v, lam, c))) < 1e-8 * slope_scale or width <= 0:
            raise NonSimpleRoot(f"turning point v={v:.6g} is (nearly) a critical point of W")
    scale = abs(mu) + 1.0
    res2 = abs(float(W(model, v2, lam, c)) - mu) / scale
    res3 = abs(float(W(model, v3, lam, c)) - mu) / scale
    zone = None
    if width < 1e-6 * max(abs(v0), 1.0):
        zone = "harmonic"
    elif any(min(abs(v2 - s), abs(v3 - s)) < 1e-6 * max(abs(s), 1.0) for s in saddles):
        zone = "soliton"
    return TurningPoints(float(v2), float(v3), float(v0), res2, res3, zone)


_TAYLOR_SWITCH = 1e-5


def _nodes(delta_omega: float, rule: str):
    n = max(int(round(math.pi / delta_omega)), 2)
    h = math.pi / n
    if rule == "midpoint":
        omega = -0.5 * math.pi + (np.arange(n) + 0.5) * h
        weights = np.full(n, h)
    elif rule == "trapezoid":
        omega = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n + 1)
        weights = np.full(n + 1, h)
        weights[[0, -1]] *= 0.5
    else:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    return omega, weights


def _substitution(model, params, tp, delta_omega, rule):
    """Nodes v, weights, and the desingularized quotient G on the omega grid."""
    mu, lam, c = params.mu, params.lam, params.c
    v2, v3 = tp.v2, tp.v3
    half = 0.5 * (v3 - v2)
    omega, wts = _nodes(delta_omega, rule)
    # distances to both ends without cancellation
    s2 = 2.0 * half * np.sin(0.25 * math.pi + 0.5 * omega) ** 2
    s3 = 2.0 * half * np.sin(0.25 * math.pi - 0.5 * omega) ** 2
    v = np.where(omega < 0.0, v2 + s2, v3 - s3)
    with np.errstate(divide="ignore", invalid="ignore"):
        G = (mu - W(model, v, lam, c)) / (s2 * s3)
    width = v3 - v2
    near2 = s2 < _TAYLOR_SWITCH * width
    near3 = s3 < _TAYLOR_SWITCH * width
    if np.any(near2):
        a1, a2 = float(dW(model, v2, lam, c)), float(d2W(model, v2, lam, c))
        G[near2] = (-a1 - 0.5 * a2 * s2[near2]) / s3[near2]
    if np.any(near3):
        b1, b2 = float(dW(model, v3, lam, c)), float(d2W(model, v3, lam, c))
        G[near3] = (b1 - 0.5 * b2 * s3[near3]) / s2[near3]
    if not np.all(np.isfinite(G)):
        raise FloatingPointError("non-finite quadrature integrand")
    if np.any(G <= 0.0):
        raise WaveError("integrand quotient G is not positive; turning points inconsistent")
    return v, wts, G, s2 * s3


def profile_integrals(
    model: NonlinearModel,
    params: WaveParamsQ,
    tp: TurningPoints,
    delta_omega: float = 1e-4,
    rule: str = "midpoint",
) -> ProfileIntegrals:
    """Period, action, mean and half-square integrals over one period."""
    v, wts, G, prod = _substitution(model, params, tp, delta_omega, rule)
    cap = model.cap(v)
    dx = np.sqrt(cap / (2.0 * G)) * wts
    period = 2.0 * float(np.sum(dx))
    action = 2.0 * float(np.sum(np.sqrt(2.0 * cap * G) * prod * wts))
    mean = 2.0 * float(np.sum(v * dx))
    half_square = float(np.sum(v * v * dx))
    return ProfileIntegrals(period, action, mean, half_square)


def profile_rhs(model: NonlinearModel, params: WaveParamsQ):
    """Right-hand side of cap(v) v'' = -W'(v) - cap'(v) v'^2 / 2 as a first-order system."""
    lam, c = params.lam, params.c
    p, cap, dcap = model.p, model.cap, model.dcap

    def rhs(v, vx):
        return vx, (-(p(v) - c * v + lam) - 0.5 * dcap(v) * vx * vx) / cap(v)

    return rhs


def reconstruct_profile(
    model: NonlinearModel,
    params: WaveParamsQ,
    tp: TurningPoints,
    n_steps: int = 4096,
    period: float | None = None,
) -> ProfileSamples:
    """Sample one period of the profile by classical RK4 started at the trough."""
    if n_steps < 256:
        raise ValueError("n_steps must be at least 256")
    if period is None:
        period = profile_integrals(model, params, tp).period
    rhs = profile_rhs(model, params)
    h = period / n_steps
    v = np.empty(n_steps + 1)
    vx = np.empty(n_steps + 1)
    y, yx = tp.v2, 0.0
    v[0], vx[0] = y, yx
    lo, hi = model.domain
    for k in range(n_steps):
        k1 = rhs(y, yx)
        k2 = rhs(y + 0.5 * h * k1[0], yx + 0.5 * h * k1[1])
        k3 = rhs(y + 0.5 * h * k2[0], yx + 0.5 * h * k2[1])
        k4 = rhs(y + h * k3[0], yx + h * k3[1])
        y = y + h * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0
        yx = yx + h * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0
        if not lo < y < hi:
            raise WaveError(f"profile left the domain at step {k + 1}")
        v[k + 1], vx[k + 1] = y, yx
    energy = 0.5 * model.cap(v) * vx ** 2 + W(model, v, params.lam, params.c)
    drift = float(np.max(np.abs(energy - params.mu)))
    if drift > 1e-6 * (abs(params.mu) + 1.0):
        raise WaveError(f"first-integral drift {drift:.3g} too large; increase n_steps")
    x = np.linspace(0.0, period, n_steps + 1)
    return ProfileSamples(x, v, vx, drift)


def energy_window(
    model: NonlinearModel,
    lam: float,
    c: float,
    cap: float = 1e3,
    hint: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Levels (W0, mu_max) between which the deepest well carries periodic orbits.

    ``mu_max`` is the lowest barrier, found by bisection on orbit existence;
    for a confining well the search stops at ``W0 + cap * max(1, |W0|)``.
    """
    centers, _ = _roots_of_dW(model, lam, c, _scan_grid(model, hint))
    if not centers:
        raise NoWell(f"no center of W for lam={lam}, c={c}")
    w0 = min(float(W(model, v, lam, c)) for v in centers)
    ceiling = w0 + cap * max(1.0, abs(w0))

    def exists(mu):
        try:
            find_turning_points(model, WaveParamsQ(mu, lam, c), hint)
            return True
        except WaveError:
            return False

    if exists(ceiling):
        return w0, ceiling
    lo, hi = w0, ceiling
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        lo, hi = (mid, hi) if exists(mid) else (lo, mid)
    return w0, lo
