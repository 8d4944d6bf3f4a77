"""Randomized cross-checks over feasible points of every built-in model.

Points are drawn in Euler-Korteweg form (mu, lam, j, sigma) so that both the
reduced and the four-parameter identities apply.  The reduced parameters are
mu' = lam - sigma^2/2, lam' = j sigma - mu and c = -j^2; each model gets a box
of (j, lam') with a well, and mu' is drawn inside its energy window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .action import Numerics, action_jet_ek
from .evans import evans_scan_qkdv, sample_profile, sturm_adaptive
from .models import BUILTIN_NAMES, NonlinearModel, make_builtin
from .profile import WaveError, WaveParamsEK, WaveParamsQ, ek_to_qkdv, energy_window
from .stability import verdict_ek

IDENTITY_TOL = 1e-6
GRADIENT_TOL = 1e-5
STURM_T0_TOL = 1e-6
EVANS_TOL = 0.02
# relative FD step for validation; sampled points include narrow energy windows
# where the O(h^2) error of the default 1e-4 step reaches 4e-5
VALIDATION_NUMERICS = Numerics(delta_nu=1e-5)
# |Upsilon_mu| below this (relative) counts as isochronous and carries no sign
ISOCHRONOUS_TOL = 1e-6


def _shallow_lam(j, u):
    # the minimum of 1/(2 v^2) + j^2 v is 1.5 j^(4/3); lam' below minus that admits a well
    return -(1.2 + 1.3 * u) * 1.5 * j ** (4.0 / 3.0)


# model name -> (builder kwargs, j range, lam'(j, u) for u uniform in [0, 1])
MODEL_BOXES = {
    "power-law": ({"gamma": 3.0, "sign": 1.0}, (0.3, 1.5), lambda j, u: -1.0 + 2.0 * u),
    "kdv3": ({}, (0.5, 1.5), lambda j, u: -1.0 + u),
    "boussinesq": ({"gamma": 2.0}, (0.1, 1.0), lambda j, u: -0.1 + 0.6 * u),
    "perfect-gas": ({}, (0.5, 1.5), lambda j, u: -(1.2 + 1.3 * u) * math.sqrt(2.0) * j),
    "nls-capillarity": ({}, (0.5, 1.5), _shallow_lam),
    "constant-capillarity": ({"kappa": 1.0}, (0.5, 1.5), _shallow_lam),
    "synthetic-quadratic": ({}, (0.5, 2.0), lambda j, u: -1.0 + 2.0 * u),
}


@dataclass
class CheckTally:
    """Pass count and the extreme observed value (largest, or smallest for margins)."""

    passed: int = 0
    total: int = 0
    worst: float | None = None
    smaller_is_worse: bool = False

    def add(self, ok: bool, value: float) -> None:
        self.total += 1
        self.passed += int(ok)
        if self.worst is None:
            self.worst = value
        else:
            self.worst = min(self.worst, value) if self.smaller_is_worse else max(self.worst, value)

    @property
    def ok(self) -> bool:
        return self.passed == self.total


@dataclass
class ModelValidation:
    model: str
    points: list[WaveParamsEK] = field(default_factory=list)
    checks: dict[str, CheckTally] = field(default_factory=dict)
    sturm_signs: list[int] = field(default_factory=list)

    def tally(self, name: str, smaller_is_worse: bool = False) -> CheckTally:
        return self.checks.setdefault(name, CheckTally(smaller_is_worse=smaller_is_worse))

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.checks.values())

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "points": len(self.points),
            "upsilon_mu_signs": {"positive": self.sturm_signs.count(1), "negative": self.sturm_signs.count(-1)},
            "checks": {k: {"passed": t.passed, "total": t.total, "worst": t.worst} for k, t in sorted(self.checks.items())},
            "ok": self.ok,
        }


def sample_points(model_name: str, rng: np.random.Generator, n_points: int, max_tries: int = 20) -> tuple[NonlinearModel, list[WaveParamsEK]]:
    kwargs, (jlo, jhi), lam_of = MODEL_BOXES[model_name]
    model = make_builtin(model_name, **kwargs)
    pts: list[WaveParamsEK] = []
    tries = 0
    while len(pts) < n_points and tries < max_tries * n_points:
        tries += 1
        j = float(rng.uniform(jlo, jhi)) * (1.0 if rng.uniform() < 0.5 else -1.0)
        sigma = float(rng.uniform(-0.5, 0.5))
        lam_r = float(lam_of(abs(j), rng.uniform()))
        t = float(rng.uniform(0.1, 0.9))
        try:
            w0, top = energy_window(model, lam_r, -j * j, cap=20.0)
        except WaveError:
            continue
        mu_r = w0 + t * (top - w0)
        pts.append(WaveParamsEK(j * sigma - lam_r, mu_r + 0.5 * sigma * sigma, j, sigma))
    return model, pts


def validate_model(
    model_name: str,
    seed: int,
    n_points: int,
    num: Numerics = VALIDATION_NUMERICS,
    evans: bool = False,
    sturm: bool = True,
) -> ModelValidation:
    """Identity, gradient, Sturm and (optionally) Evans checks at random feasible points."""
    rng = np.random.default_rng([seed, BUILTIN_NAMES.index(model_name)])
    model, pts = sample_points(model_name, rng, n_points)
    out = ModelValidation(model_name, pts)
    if len(pts) < n_points:
        out.tally("sampling").add(False, float(n_points - len(pts)))
    for ep in pts:
        try:
            jet = action_jet_ek(model, ep, num)
        except WaveError:
            out.tally("jet").add(False, math.inf)
            continue
        report = verdict_ek(jet)
        res = report.residuals
        for key in ("det_c_q", "det_C_E", "det_C_L", "det_hess_ek"):
            if key in res:
                out.tally(key).add(res[key] <= IDENTITY_TOL, res[key])
        if "n_identity" in res:
            out.tally("n_identity").add(res["n_identity"] == 0.0, abs(res["n_identity"]))
        margin = res["cauchy_schwarz"]
        out.tally("cauchy_schwarz", smaller_is_worse=True).add(margin > 0, margin)
        jet3 = jet.underlying
        out.tally("gradient").add(jet3.grad_mismatch <= GRADIENT_TOL, jet3.grad_mismatch)
        q = ek_to_qkdv(ep)
        ups_mu = float(jet3.hess[0, 0])
        if sturm:
            try:
                d = sturm_adaptive(model, q)
            except ArithmeticError:
                out.tally("sturm_T0").add(False, math.inf)
                continue
            out.tally("sturm_T0").add(d.T0_residual <= STURM_T0_TOL, d.T0_residual)
            if abs(ups_mu) * max(1.0, abs(q.mu)) <= ISOCHRONOUS_TOL * jet3.grad[0]:
                out.tally("sturm_isochronous").add(True, abs(d.dT0))
            else:
                same = np.sign(d.dT0) == np.sign(ups_mu)
                out.tally("sturm_sign").add(bool(same), 0.0 if same else 1.0)
                out.sturm_signs.append(int(np.sign(ups_mu)))
        if evans:
            _, prof = sample_profile(model, q)
            scan = evans_scan_qkdv(prof, model, q)
            det3 = float(np.linalg.det(jet3.hess))
            err = abs(scan.fit_coeff - det3) / abs(det3)
            out.tally("evans_fit").add(bool(err <= EVANS_TOL), err)
            tail_ok = scan.tail_sign == -1
            out.tally("evans_tail").add(tail_ok, 0.0 if tail_ok else 1.0)
    return out


def validate(seed: int, n_points: int, models=BUILTIN_NAMES, num: Numerics = VALIDATION_NUMERICS, evans: bool = False) -> list[ModelValidation]:
    return [validate_model(m, seed, n_points, num, evans=evans) for m in models]
