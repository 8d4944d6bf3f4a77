"""Whitham modulation matrices and a small-matrix eigenvalue solver.

Eigenvalues come from the characteristic polynomial, solved in closed form
(quadratic, trigonometric/Cardano cubic, resolvent-cubic quartic) and polished
by Newton steps.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .action import ActionJet3, ActionJet4

HYPERBOLIC_TOL = 1e-6

_P3 = np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
_P4 = np.array(
    [
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ]
)


class SingularHessian(ArithmeticError):
    pass


@dataclass(frozen=True)
class ModulationResult:
    matrix: np.ndarray
    eigenvalues: list[complex]
    hyperbolic: bool
    residual: float

    def as_row(self) -> dict:
        row = {}
        for k, z in enumerate(self.eigenvalues):
            row[f"re{k + 1}"] = z.real
            row[f"im{k + 1}"] = z.imag
        row["hyperbolic"] = self.hyperbolic
        return row


def char_poly(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first (Faddeev-LeVerrier)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    coeffs = [1.0]
    B = np.eye(n)
    for k in range(1, n + 1):
        AB = M @ B
        ck = -np.trace(AB) / k
        coeffs.append(ck)
        B = AB + ck * np.eye(n)
    return np.array(coeffs)


def _quadratic(b: complex, c: complex) -> list[complex]:
    disc = b * b - 4 * c
    if abs(disc) <= 1e-14 * (abs(b * b) + abs(4 * c)):
        disc = 0j
    d = cmath.sqrt(disc)
    # avoid cancellation between -b and the root
    q = -0.5 * (b + d) if (b.conjugate() * d).real >= 0 else -0.5 * (b - d)
    if q == 0:
        return [0j, 0j]
    return [q, c / q]


def _cubic(a: float, b: float, c: float) -> list[complex]:
    # x^3 + a x^2 + b x + c; depressed t^3 + p t + q with x = t - a/3
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    # rounding of p and q from cancelling terms; a double root sits at disc = 0
    eq = 1e-14 * (abs(2.0 * a ** 3 / 27.0) + abs(a * b / 3.0) + abs(c))
    ep = 1e-14 * (abs(b) + a * a / 3.0)
    if abs(disc) <= abs(q) * eq + (p / 3.0) ** 2 * ep:
        disc = 0.0
    if p < 0 and disc <= 0:
        # three real roots
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
        th = math.acos(arg) / 3.0
        return [complex(m * math.cos(th - 2.0 * math.pi * k / 3.0) + shift) for k in range(3)]
    s = math.sqrt(max(disc, 0.0))
    u = math.copysign(abs(-q / 2.0 - math.copysign(s, q)) ** (1.0 / 3.0), -q / 2.0 - math.copysign(s, q))
    t1 = u - p / (3.0 * u) if u != 0 else 0.0
    rest = _quadratic(complex(t1), complex(t1 * t1 + p))
    return [complex(t1 + shift)] + [z + shift for z in rest]


def _quartic(a: float, b: float, c: float, d: float) -> list[complex]:
    # depressed y^4 + p y^2 + q y + r with x = y - a/4
    p = b - 3.0 * a * a / 8.0
    q = c - a * b / 2.0 + a ** 3 / 8.0
    r = d - a * c / 4.0 + a * a * b / 16.0 - 3.0 * a ** 4 / 256.0
    shift = -a / 4.0
    if abs(q) <= 1e-14 * max(1.0, abs(p), abs(r)):
        # biquadratic
        zs = _quadratic(complex(p), complex(r))
        roots = []
        for z in zs:
            w = cmath.sqrt(z)
            roots += [w, -w]
        return [y + shift for y in roots]
    # resolvent cubic m^3 + p m^2 + (p^2/4 - r) m - q^2/8; pick the largest real root
    res = _cubic(p, p * p / 4.0 - r, -q * q / 8.0)
    m = max((z.real for z in res if abs(z.imag) <= 1e-12 * (1 + abs(z))), default=max(z.real for z in res))
    m = max(m, 1e-300)
    s = math.sqrt(2.0 * m)
    roots = _quadratic(complex(s), complex(p / 2.0 + m - q / (2.0 * s)))
    roots += _quadratic(complex(-s), complex(p / 2.0 + m + q / (2.0 * s)))
    return [y + shift for y in roots]


def _polish(coeffs: np.ndarray, z: complex, steps: int = 2) -> complex:
    dcoeffs = np.polyder(coeffs)
    for _ in range(steps):
        pz = np.polyval(coeffs, z)
        dz = np.polyval(dcoeffs, z)
        if dz == 0:
            break
        cand = z - pz / dz
        if abs(np.polyval(coeffs, cand)) < abs(pz):
            z = cand
    return complex(z)


def _pair_conjugates(roots: list[complex], scale: float) -> list[complex]:
    tol = 1e-10 * scale
    out = [complex(z.real, 0.0) if abs(z.imag) <= tol else z for z in roots]
    cplx = sorted([z for z in out if z.imag != 0.0], key=lambda z: (z.real, abs(z.imag)))
    real = sorted([z for z in out if z.imag == 0.0], key=lambda z: z.real)
    paired = []
    while cplx:
        z = cplx.pop(0)
        k = min(range(len(cplx)), key=lambda i: abs(cplx[i] - z.conjugate())) if cplx else None
        if k is None:
            paired.append(complex(z.real, 0.0))
            continue
        w = cplx.pop(k)
        re, im = 0.5 * (z.real + w.real), 0.5 * (abs(z.imag) + abs(w.imag))
        paired += [complex(re, im), complex(re, -im)]
    return sorted(real + paired, key=lambda z: (z.real, z.imag))


def spectrum_small(M) -> list[complex]:
    """Eigenvalues of a real 2x2, 3x3 or 4x4 matrix, with multiplicity."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or n not in (2, 3, 4):
        raise ValueError("spectrum_small handles square matrices of size 2, 3 or 4")
    coeffs = char_poly(M)
    if n == 2:
        roots = _quadratic(complex(coeffs[1]), complex(coeffs[2]))
    elif n == 3:
        roots = _cubic(*coeffs[1:])
    else:
        roots = _quartic(*coeffs[1:])
    roots = [_polish(coeffs, z) for z in roots]
    scale = max(1.0, float(np.max(np.abs(M))))
    return _pair_conjugates(roots, scale)


def _result(M: np.ndarray) -> ModulationResult:
    eig = spectrum_small(M)
    scale = max(1.0, max(abs(z) for z in eig))
    hyper = all(abs(z.imag) <= HYPERBOLIC_TOL * scale for z in eig)
    eye = np.eye(M.shape[0])
    # smallest singular value of M - z I is the best eigenpair residual
    resid = max(float(np.linalg.svd(M - z * eye, compute_uv=False)[-1]) for z in eig)
    return ModulationResult(M, eig, hyper, resid)


def _solve(H: np.ndarray, P: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise SingularHessian("action Hessian is singular; modulation matrix undefined")
    return np.linalg.solve(H, P)


def modulation_matrix_from_hessian(hess: np.ndarray, shift: float) -> ModulationResult:
    """shift * I + hess^-1 P for the 3x3 or 4x4 pattern matrix P."""
    hess = np.asarray(hess, dtype=float)
    P = _P3 if hess.shape == (3, 3) else _P4
    return _result(shift * np.eye(P.shape[0]) + _solve(hess, P))


def modulation_matrix_qkdv(jet3: ActionJet3, c: float) -> ModulationResult:
    return modulation_matrix_from_hessian(jet3.hess, c)


def modulation_matrix_ekl(jet4: ActionJet4, j: float) -> ModulationResult:
    return modulation_matrix_from_hessian(jet4.hess, -j)
