"""Point evaluation and parameter sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .action import ActionJet3, ActionJet4, Numerics, action_jet_ek, action_jet_qkdv
from .models import NonlinearModel
from .modulation import ModulationResult, SingularHessian, modulation_matrix_ekl, modulation_matrix_qkdv
from .profile import WaveError, WaveParamsEK, WaveParamsQ
from .stability import StabilityReport, verdict_ek, verdict_qkdv

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointResult:
    value: float
    params: WaveParamsQ | WaveParamsEK
    period: float
    theta: float
    jet: ActionJet3 | ActionJet4
    report: StabilityReport
    modulation: ModulationResult | None = None

    @property
    def advisory(self) -> str | None:
        if self.modulation is not None and not self.modulation.hyperbolic:
            return "sideband-unstable"
        return None


def evaluate_point(
    model: NonlinearModel,
    params: WaveParamsQ | WaveParamsEK,
    num: Numerics = Numerics(),
    modulate: bool = False,
    value: float = float("nan"),
    epsilon: float = 1e-10,
) -> PointResult:
    """Jet, verdicts and optional modulation matrix at one parameter point.

    Turning points whose relative residual |W - mu| exceeds ``epsilon`` are rejected.
    """
    if isinstance(params, WaveParamsQ):
        jet = action_jet_qkdv(model, params, num)
        report = verdict_qkdv(jet)
        integrals = jet.integrals
        mod_fn = lambda: modulation_matrix_qkdv(jet, params.c)
    else:
        jet = action_jet_ek(model, params, num)
        report = verdict_ek(jet)
        integrals = jet.underlying.integrals
        mod_fn = lambda: modulation_matrix_ekl(jet, params.j)
    tp = jet.turning if isinstance(jet, ActionJet3) else jet.underlying.turning
    if max(tp.res2, tp.res3) > epsilon:
        raise WaveError(f"turning-point residual {max(tp.res2, tp.res3):.2e} exceeds {epsilon:.1e}")
    mod = None
    if modulate:
        try:
            mod = mod_fn()
        except SingularHessian as exc:
            log.warning("modulation skipped at %s: %s", params, exc)
    return PointResult(value, params, integrals.period, integrals.action, jet, report, mod)


def with_value(base, var: str, value: float):
    return replace(base, **{var: float(value)})


def run_sweep(
    model: NonlinearModel,
    base: WaveParamsQ | WaveParamsEK,
    var: str,
    values,
    num: Numerics = Numerics(),
    workers: int = 1,
    modulate: bool = False,
    epsilon: float = 1e-10,
) -> tuple[list[PointResult], list[tuple[float, str]]]:
    """Evaluate every sweep value; infeasible points are skipped with their reason.

    Results keep sweep order regardless of ``workers``.
    """
    values = [float(v) for v in np.asarray(values, dtype=float)]

    def one(v):
        try:
            return evaluate_point(model, with_value(base, var, v), num, modulate, v, epsilon)
        except WaveError as exc:
            return f"{type(exc).__name__}: {exc}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(one, values))
    else:
        outs = [one(v) for v in values]
    results, skipped = [], []
    for v, out in zip(values, outs):
        if isinstance(out, str):
            log.info("skipped %s=%.17g (%s)", var, v, out)
            skipped.append((v, out))
        else:
            results.append(out)
    return results, skipped
