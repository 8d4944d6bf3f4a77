"""Signatures, minors, constraint matrices and stability verdicts.

Reduced problem (ordering mu, lam, c):
  * spectrally unstable when det Hess theta > 0;
  * orbitally stable when theta_mumu != 0, det != 0 and n(Hess theta) = 1.

Euler-Korteweg (ordering mu, lam, j, sigma):
  * spectrally unstable when det Hess Theta < 0;
  * orbitally stable in Lagrangian (resp. Eulerian) coordinates when
    Theta_lamlam (resp. Theta_mumu) != 0, det != 0 and n(Hess Theta) = 2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .action import ActionJet3, ActionJet4, eta_from_grad

DEFAULT_TOL = 1e-6


def jacobi_eigenvalues(H, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations, ascending."""
    A = np.array(H, dtype=float)
    n = A.shape[0]
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = math.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= 1e-15 * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-30 * abs(A[q, q] - A[p, p]) or apq == 0.0:
                    A[p, q] = A[q, p] = 0.0
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                cs = 1.0 / math.hypot(1.0, t)
                sn = t * cs
                R = np.eye(n)
                R[p, p] = R[q, q] = cs
                R[p, q] = sn
                R[q, p] = -sn
                A = R.T @ A @ R
    return np.sort(np.diag(A))


@dataclass(frozen=True)
class SignatureResult:
    n_neg: int
    n_zero: int
    n_pos: int
    method: str
    eigenvalues: tuple[float, ...]
    tol: float
    sylvester_agrees: bool | None = None


def leading_minors(H) -> list[float]:
    H = np.asarray(H, dtype=float)
    return [float(np.linalg.det(H[:k, :k])) for k in range(1, H.shape[0] + 1)]


def _minor_scales(H) -> list[float]:
    # Hadamard-type bound: product of the full row norms
    rows = np.linalg.norm(np.asarray(H, dtype=float), axis=1)
    return [float(np.prod(rows[:k])) for k in range(1, len(rows) + 1)]


def _equilibrate(H: np.ndarray) -> np.ndarray:
    d = np.abs(np.diag(H))
    scale = np.where(d > 0, 1.0 / np.sqrt(np.where(d > 0, d, 1.0)), 1.0)
    return H * scale[:, None] * scale[None, :]


def sylvester_count(minors) -> int:
    seq = [1.0] + list(minors)
    return sum(1 for a, b in zip(seq[:-1], seq[1:]) if a * b < 0)


def signature(H, tol: float = DEFAULT_TOL, equilibrate: bool = False) -> SignatureResult:
    """Inertia of a symmetric matrix (dimension <= 4).

    Eigenvalues within ``tol * ||H||`` of zero count as zero.  With
    ``equilibrate`` the count is taken on D H D, D = diag(|H_ii|^-1/2), which
    has the same inertia but a scale-free tolerance.
    """
    H = np.asarray(H, dtype=float)
    norm = np.linalg.norm(H)
    if norm > 0 and np.linalg.norm(H - H.T) > 1e-8 * norm:
        raise ValueError("matrix is not symmetric")
    H = 0.5 * (H + H.T)
    M = _equilibrate(H) if equilibrate else H
    ev = jacobi_eigenvalues(M)
    cut = tol * np.linalg.norm(M)
    n_neg = int(np.sum(ev < -cut))
    n_pos = int(np.sum(ev > cut))
    agrees = None
    minors = leading_minors(M)
    scales = _minor_scales(M)
    if n_neg + n_pos == len(ev) and all(abs(m) > tol * s for m, s in zip(minors, scales)):
        agrees = sylvester_count(minors) == n_neg
    return SignatureResult(n_neg, len(ev) - n_neg - n_pos, n_pos, "eigen", tuple(float(x) for x in ev), tol, agrees)


def condition_number(H) -> float:
    ev = np.abs(jacobi_eigenvalues(H))
    lo = float(np.min(ev))
    if lo < 1e-30:
        return math.inf
    return float(np.max(ev)) / lo


def _neg_schur(H: np.ndarray, pivot: int, rest: list[int]) -> np.ndarray:
    """Minus the Schur complement: entries -(H_ab H_pp - H_pb H_ap) / H_pp."""
    p = pivot
    out = np.empty((len(rest), len(rest)))
    for i, a in enumerate(rest):
        for k, b in enumerate(rest):
            out[i, k] = -(H[a, b] * H[p, p] - H[p, b] * H[a, p]) / H[p, p]
    return out


@dataclass(frozen=True)
class ConstraintMatrices:
    c_q: np.ndarray | None
    C_E: np.ndarray | None
    C_L: np.ndarray | None
    pivot_q: float
    pivot_E: float | None
    pivot_L: float | None
    valid_q: bool
    valid_E: bool
    valid_L: bool


# Reduced ordering (mu, lam, c); EK ordering (mu, lam, j, sigma).
_Q_REST = [1, 2]
_E_REST = [1, 2, 3]  # (lam, j, sigma)
_L_REST = [0, 3, 2]  # (mu, sigma, j)


def constraint_matrices(jet3: ActionJet3 | np.ndarray, jet4: ActionJet4 | np.ndarray | None = None, tol: float = DEFAULT_TOL) -> ConstraintMatrices:
    """Constraint matrices of the reduced (c_q) and Euler-Korteweg (C_E, C_L) problems."""
    h3 = np.asarray(getattr(jet3, "hess", jet3), dtype=float)
    scale3 = np.linalg.norm(h3)
    valid_q = abs(h3[0, 0]) > tol * scale3
    c_q = _neg_schur(h3, 0, _Q_REST) if valid_q else None
    C_E = C_L = None
    pE = pL = None
    valid_E = valid_L = False
    if jet4 is not None:
        h4 = np.asarray(getattr(jet4, "hess", jet4), dtype=float)
        scale4 = np.linalg.norm(h4)
        pE, pL = float(h4[0, 0]), float(h4[1, 1])
        valid_E = abs(pE) > tol * scale4
        valid_L = abs(pL) > tol * scale4
        C_E = _neg_schur(h4, 0, _E_REST) if valid_E else None
        C_L = _neg_schur(h4, 1, _L_REST) if valid_L else None
    return ConstraintMatrices(c_q, C_E, C_L, float(h3[0, 0]), pE, pL, valid_q, valid_E, valid_L)


@dataclass
class StabilityReport:
    kind: str
    minors: list[float]
    minor_signs: list[int]
    n_hess: int
    n_zero: int
    signatures: dict[str, int | None]
    condition_number: float
    verdict_spectral: str
    verdicts_orbital: dict[str, str]
    conditions: list[str]
    stability_index: int | None
    residuals: dict[str, float] = field(default_factory=dict)
    limit_zone: str | None = None
    table_consistent: bool = True

    def to_json(self) -> dict:
        out = asdict(self)
        out["condition_number"] = _finite_or_str(self.condition_number)
        out["residuals"] = {k: _finite_or_str(v) for k, v in self.residuals.items()}
        return out


def _finite_or_str(x):
    return x if math.isfinite(x) else str(x)


def _signs(values, scales, tol) -> list[int]:
    return [0 if abs(v) <= tol * s else (1 if v > 0 else -1) for v, s in zip(values, scales)]


def _n_or_none(M, tol) -> int | None:
    if M is None:
        return None
    sig = signature(M, tol, equilibrate=True)
    return sig.n_neg if sig.n_zero == 0 else None


def verdict_qkdv(jet3: ActionJet3, tol: float = DEFAULT_TOL) -> StabilityReport:
    """Spectral and orbital verdicts for a reduced-problem wave."""
    H = jet3.hess
    minors = leading_minors(H)
    signs = _signs(minors, _minor_scales(H), tol)
    sig = signature(H, tol, equilibrate=True)
    n = sig.n_neg
    cm = constraint_matrices(H, None, tol)
    spectral = "Unstable" if signs[2] > 0 else "NotExcluded"
    conditions: list[str] = []
    if signs[0] == 0 or signs[2] == 0 or sig.n_zero:
        orbital = "Degenerate"
    elif n == 1:
        orbital = "Stable"
        conditions.append("s")
    else:
        orbital = "NotConcluded"
    s1, s2, s3 = signs
    if s1 > 0 and s2 != 0 and s3 < 0:
        conditions.append("s1")
    if s1 < 0 and s2 < 0 and s3 < 0:
        conditions.append("s2")
    if s1 > 0 and s2 < 0 and s3 < 0:
        conditions.append("johnson")
    if s1 > 0 and s2 > 0 and s3 > 0 and n == 0:
        conditions.append("INCONSISTENT")
        orbital = "NotConcluded"
    consistent = 0 in signs or sylvester_count(signs) == n
    residuals = identity_report(jet3, None, cm, 0.0, tol)
    return StabilityReport(
        kind="qkdv",
        minors=minors,
        minor_signs=signs,
        n_hess=n,
        n_zero=sig.n_zero,
        signatures={"hess": n, "c_q": _n_or_none(cm.c_q, tol)},
        condition_number=condition_number(H),
        verdict_spectral=spectral,
        verdicts_orbital={"qkdv": orbital},
        conditions=conditions,
        stability_index=n - 1 if not sig.n_zero else None,
        residuals=residuals,
        limit_zone=jet3.limit_zone,
        table_consistent=consistent,
    )


# EK leading minors are taken in the ordering (lam, mu, j, sigma).
EK_MINOR_ORDER = [1, 0, 2, 3]


def verdict_ek(jet4: ActionJet4, tol: float = DEFAULT_TOL) -> StabilityReport:
    """Spectral and orbital verdicts for an Euler-Korteweg wave."""
    H = jet4.hess
    Hm = H[np.ix_(EK_MINOR_ORDER, EK_MINOR_ORDER)]
    minors = leading_minors(Hm)
    signs = _signs(minors, _minor_scales(Hm), tol)
    sig = signature(H, tol, equilibrate=True)
    n = sig.n_neg
    cm = constraint_matrices(jet4.underlying, jet4, tol)
    det_sign = signs[3]
    spectral = "Unstable" if det_sign < 0 else "NotExcluded"
    conditions = []
    verdicts = {}
    for label, pivot_ok, tag in (("ekl", cm.valid_L, "S_L"), ("eke", cm.valid_E, "S_E")):
        if not pivot_ok or det_sign == 0 or sig.n_zero:
            verdicts[label] = "Degenerate"
        elif n == 2:
            verdicts[label] = "Stable"
            conditions.append(tag)
        else:
            verdicts[label] = "NotConcluded"
    consistent = 0 in signs or sylvester_count(signs) == n
    return StabilityReport(
        kind="ek",
        minors=minors,
        minor_signs=signs,
        n_hess=n,
        n_zero=sig.n_zero,
        signatures={
            "hess": n,
            "hess_theta": _n_or_none(jet4.underlying.hess, tol),
            "C_E": _n_or_none(cm.C_E, tol),
            "C_L": _n_or_none(cm.C_L, tol),
        },
        condition_number=condition_number(H),
        verdict_spectral=spectral,
        verdicts_orbital=verdicts,
        conditions=conditions,
        stability_index=n - 2 if not sig.n_zero else None,
        residuals=identity_report(jet4.underlying, jet4, cm, jet4.params.j, tol),
        limit_zone=jet4.limit_zone,
        table_consistent=consistent,
    )


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def identity_report(
    jet3: ActionJet3,
    jet4: ActionJet4 | None,
    cm: ConstraintMatrices,
    j: float,
    tol: float = DEFAULT_TOL,
) -> dict[str, float]:
    """Named residuals of the algebraic identities linking the two Hessians.

    ``det_c_q``: theta_mumu det c_q = det Hess theta.  ``det_C_E`` and
    ``det_C_L``: pivot times det C equals -det Hess Theta.  ``det_hess_ek``:
    det Hess Theta in terms of the reduced gradient and Hessian.
    ``n_identity`` is the integer n(Hess Theta) - 1 - n(Hess theta - eta J)
    and ``cauchy_schwarz`` the relative margin of 2 theta_c theta_mu - theta_lam^2.
    """
    h3 = jet3.hess
    det3 = float(np.linalg.det(h3))
    out: dict[str, float] = {}
    if cm.valid_q:
        out["det_c_q"] = _rel(h3[0, 0] * np.linalg.det(cm.c_q), det3)
    t_mu, t_lam, t_c = (float(x) for x in jet3.grad)
    cs = 2.0 * t_c * t_mu - t_lam ** 2
    out["cauchy_schwarz"] = cs / (2.0 * abs(t_c) * t_mu)
    if jet4 is None:
        return out
    h4 = jet4.hess
    det4 = float(np.linalg.det(h4))
    if cm.valid_E:
        out["det_C_E"] = _rel(cm.pivot_E * np.linalg.det(cm.C_E), -det4)
    if cm.valid_L:
        out["det_C_L"] = _rel(cm.pivot_L * np.linalg.det(cm.C_L), -det4)
    m2 = h3[0, 0] * h3[1, 1] - h3[0, 1] ** 2
    out["det_hess_ek"] = _rel(det4, cs * m2 - 4.0 * j * j * t_mu * det3)
    if j != 0 and cs > 0:
        J = np.zeros((3, 3))
        J[2, 2] = 1.0
        shifted = h3 - eta_from_grad(jet3.grad, j) * J
        s4 = signature(h4, tol, equilibrate=True)
        s3 = signature(shifted, tol, equilibrate=True)
        if s4.n_zero == 0 and s3.n_zero == 0:
            out["n_identity"] = float(s4.n_neg - 1 - s3.n_neg)
    return out
