"""The seven reproduction cases: model, fixed parameters, sweep variable and range."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .models import NonlinearModel, make_builtin
from .profile import WaveParamsEK, WaveParamsQ


@dataclass(frozen=True)
class CaseDefinition:
    name: str
    model: str
    gamma: float | None
    sign: float
    kind: str  # "qkdv" or "ek"
    fixed: dict[str, float]
    sweep: str
    start: float
    stop: float
    count: int
    delta_nu: float
    expected: dict = field(default_factory=dict)
    notes: str = ""

    def build_model(self) -> NonlinearModel:
        return make_builtin(self.model, gamma=self.gamma, sign=self.sign)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def base_params(self) -> WaveParamsQ | WaveParamsEK:
        vals = dict(self.fixed)
        vals[self.sweep] = float("nan")
        if self.kind == "qkdv":
            return WaveParamsQ(vals["mu"], vals["lam"], vals["c"])
        return WaveParamsEK(vals["mu"], vals["lam"], vals["j"], vals["sigma"])


# Sweep ranges stay a little inside the existence interval of the wave family
# at the fixed parameters (harmonic limit at one end, barrier at the other).
CASES: dict[str, CaseDefinition] = {
    c.name: c
    for c in (
        CaseDefinition(
            "kdv", "kdv3", None, 1.0, "qkdv", {"lam": -60.0, "c": 60.0}, "mu", -5200.0, 28.0, 40, 0.005,
            expected={"minor_signs": [1, -1, -1], "n_hess": 1, "orbital": "Stable", "conditions": ["s1", "johnson"]},
            notes="mu ranges over (-5229.07, 29.07): well at v=20.95, barrier at v=-0.95",
        ),
        CaseDefinition(
            "mkdv-focusing", "power-law", 3.0, 1.0, "qkdv", {"lam": -500.0, "c": 1000.0}, "mu", -70000.0, 120.0, 40, 0.05,
            expected={"minor_signs": [1, -1, -1], "n_hess": 1, "orbital": "Stable"},
            notes="deepest well at v=16.06; mu below the saddle level 125 keeps orbits inside the right well",
        ),
        CaseDefinition(
            "mkdv-defocusing", "power-law", 3.0, -1.0, "qkdv", {"lam": -60.0, "c": -100.0}, "mu", -18.0, 330.0, 40, 0.005,
            expected={"minor_signs": [1, 1, -1], "n_hess": 1, "orbital": "Stable"},
            notes="well at v=0.609 (W=-18.2), barrier 335",
        ),
        CaseDefinition(
            "gkdv4", "power-law", 4.0, 1.0, "qkdv", {"lam": -500.0, "c": 1000.0}, "mu", -13200.0, 120.0, 40, 0.005,
            expected={"minor_signs": [1, -1, -1], "n_hess": 1, "orbital": "Stable", "conditions": ["johnson"]},
            notes="mu ranges over (-13233, 125)",
        ),
        CaseDefinition(
            "nls", "nls-capillarity", None, 1.0, "ek", {"mu": 2.5, "j": 1.0, "sigma": 0.0}, "lam", -3.32, -2.13, 30, 1e-5,
            expected={"minor_signs": [1, -1, 1, 1], "n_hess": 2, "orbital_ekl": "Stable", "orbital_eke": "Stable"},
            notes="mu = +2.5: with mu = -2.5 no periodic wave exists for any lam; lam ranges over (-3.328, -2.125)",
        ),
        CaseDefinition(
            "boussinesq", "boussinesq", 2.0, 1.0, "ek", {"mu": -2.0, "j": -0.1, "sigma": 0.0}, "lam", -1.15, 1.0, 40, 0.5e-4,
            expected={"det_crossing_period": 3.68, "n_hess_before": 2, "n_hess_after": 3},
            notes="lam ranges over (-1.161, 3.353); the sweep stops at 1.0 (period 3.96) to resolve the transition",
        ),
        CaseDefinition(
            "perfect-gas", "perfect-gas", None, 1.0, "ek", {"mu": 2.5, "j": -1.0, "sigma": 0.0}, "lam", -2.68, -1.35, 30, 0.5e-4,
            expected={"n_hess": 2, "orbital_ekl": "Stable", "orbital_eke": "Stable"},
            notes="mu = +2.5 for the same reason as nls; lam ranges over (-2.689, -1.283); det Hess Theta changes sign near period 24, so the sweep stops at period 15",
        ),
    )
}


def get_case(name: str) -> CaseDefinition:
    try:
        return CASES[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; choose from {', '.join(CASES)}") from None
