"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible wave or
empty sweep, 3 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

from . import report
from .action import Numerics
from .cases import CASES, get_case
from .config import ConfigError, RunConfig, load_config
from .evans import evans_scan_ekl, evans_scan_qkdv, sample_profile, sturm_adaptive
from .models import BUILTIN_NAMES
from .modulation import SingularHessian
from .profile import WaveError, WaveParamsQ, ek_to_qkdv
from .sweep import evaluate_point, run_sweep
from .validate import validate

log = logging.getLogger("wavestab")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VALIDATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _meta(cfg: RunConfig) -> dict:
    return {
        "model": {"name": cfg.model_name, "gamma": cfg.gamma, "sign": cfg.sign, "kappa": cfg.kappa},
        "fixed": cfg.params,
        "numerics": asdict(cfg.numerics),
        "step_convention": "relative" if cfg.numerics.relative_step else "absolute",
    }


def _need_config(args) -> RunConfig:
    if not args.config:
        raise UsageError("--config is required for this command")
    cfg = load_config(args.config)
    return cfg


def _out_dir(args, default: str) -> str:
    return args.out or default


def _single_params(cfg: RunConfig):
    if cfg.sweep is not None:
        raise UsageError("this command takes a single point; remove the sweep keys")
    return cfg.base_params()


def cmd_analyze(args) -> int:
    cfg = _need_config(args)
    params = _single_params(cfg)
    res = evaluate_point(cfg.build_model(), params, cfg.numerics.numerics(), cfg.modulate, epsilon=cfg.numerics.epsilon)
    out = {
        "params": asdict(params),
        "period": res.period,
        "theta": res.theta,
        "gradient": res.jet.grad,
        "hessian": res.jet.hess,
        "report": res.report.to_json(),
    }
    if res.modulation is not None:
        out["modulation"] = res.modulation.as_row()
    out.update(_meta(cfg))
    d = _out_dir(args, cfg.out_dir)
    os.makedirs(d, exist_ok=True)
    report.write_json(os.path.join(d, f"{cfg.name}.json"), out)
    R = res.report
    print(f"period={res.period:.10g} minors={[f'{m:.6g}' for m in R.minors]} n={R.n_hess} "
          f"spectral={R.verdict_spectral} orbital={R.verdicts_orbital} conditions={R.conditions}")
    return EXIT_OK


def _sweep_cfg(cfg: RunConfig, args, modulate: bool, name: str) -> int:
    if cfg.sweep is None:
        raise UsageError("sweep needs [parameters] sweep, start, stop and count")
    values = np.linspace(cfg.sweep.start, cfg.sweep.stop, cfg.sweep.count)
    results, skipped = run_sweep(
        cfg.build_model(), cfg.base_params(), cfg.sweep.var, values, cfg.numerics.numerics(),
        workers=args.workers, modulate=modulate, epsilon=cfg.numerics.epsilon,
    )
    d = _out_dir(args, cfg.out_dir)
    report.write_sweep_outputs(d, name, cfg.kind, cfg.sweep.var, results, skipped, _meta(cfg), modulate)
    print(f"{len(results)} points written to {os.path.join(d, name + '.csv')}; {len(skipped)} skipped")
    if not results:
        log.error("no feasible point in the sweep")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _need_config(args)
    return _sweep_cfg(cfg, args, cfg.modulate, cfg.name)


def cmd_modulate(args) -> int:
    cfg = _need_config(args)
    if cfg.sweep is not None:
        return _sweep_cfg(cfg, args, True, cfg.name)
    params = cfg.base_params()
    res = evaluate_point(cfg.build_model(), params, cfg.numerics.numerics(), True, epsilon=cfg.numerics.epsilon)
    if res.modulation is None:
        raise SingularHessian("modulation matrix undefined at this point")
    n = len(res.modulation.eigenvalues)
    header = ["period"] + [f"eig{k}_{part}" for k in range(1, n + 1) for part in ("re", "im")] + ["hyperbolic"]
    row = [res.period] + [x for z in res.modulation.eigenvalues for x in (z.real, z.imag)] + [res.modulation.hyperbolic]
    d = _out_dir(args, cfg.out_dir)
    os.makedirs(d, exist_ok=True)
    report.write_csv(os.path.join(d, f"{cfg.name}_modulation.csv"), header, [[report.fmt(x) for x in row]])
    print(f"eigenvalues={res.modulation.eigenvalues} hyperbolic={res.modulation.hyperbolic}")
    return EXIT_OK


def cmd_evans(args) -> int:
    cfg = _need_config(args)
    params = _single_params(cfg)
    model = cfg.build_model()
    num = cfg.numerics
    point = evaluate_point(model, params, num.numerics(), epsilon=num.epsilon)
    det_hess = float(np.linalg.det(point.jet.hess))
    extra: dict = {"params": asdict(params)}
    if isinstance(params, WaveParamsQ):
        _, prof = sample_profile(model, params, num.rk4_steps)
        scan = evans_scan_qkdv(prof, model, params, r_max=num.r_max)
        disc = sturm_adaptive(model, params)
        extra["sturm"] = {"T0_residual": disc.T0_residual, "dT0": disc.dT0, "upsilon_mu": float(point.jet.hess[0, 0])}
    else:
        q = ek_to_qkdv(params)
        _, prof = sample_profile(model, q, num.rk4_steps)
        scan = evans_scan_ekl(prof, model, params, r_max=num.r_max)
    d = _out_dir(args, cfg.out_dir)
    os.makedirs(d, exist_ok=True)
    name = f"{cfg.name}_evans"
    report.write_csv(os.path.join(d, f"{name}.csv"), report.EVANS_HEADER, report.evans_rows(scan))
    summary = report.evans_summary(scan, det_hess, extra)
    report.write_json(os.path.join(d, f"{name}.json"), summary)
    with open(os.path.join(d, f"{name}.gp"), "w", encoding="utf-8") as fh:
        fh.write(report.gnuplot_evans(name))
    report.plot_evans(os.path.join(d, f"{name}.png"), name, scan, det_hess)
    print(f"fit_coeff={scan.fit_coeff:.6g} det_hess={det_hess:.6g} "
          f"rel_err={summary['fit_relative_error']:.3g} sign_changes={scan.sign_changes} tail_sign={scan.tail_sign}")
    return EXIT_OK


def cmd_validate(args) -> int:
    models = args.models.split(",") if args.models else list(BUILTIN_NAMES)
    unknown = [m for m in models if m not in BUILTIN_NAMES]
    if unknown:
        raise UsageError(f"unknown model(s): {', '.join(unknown)}")
    results = validate(args.seed, args.points, models, evans=args.evans)
    d = _out_dir(args, "out")
    os.makedirs(d, exist_ok=True)
    report.write_json(os.path.join(d, "validation.json"), {"seed": args.seed, "points": args.points, "models": [r.as_dict() for r in results]})
    ok = True
    for r in results:
        for name, t in sorted(r.checks.items()):
            status = "PASS" if t.ok else "FAIL"
            ok &= t.ok
            print(f"{status} {r.model:22s} {name:18s} {t.passed}/{t.total} worst={t.worst:.3g}")
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_reproduce(args) -> int:
    case = get_case(args.case)
    num = Numerics(delta_nu=case.delta_nu, relative_step=False)
    results, skipped = run_sweep(case.build_model(), case.base_params(), case.sweep, case.values(), num, workers=args.workers, modulate=True)
    meta = {
        "model": {"name": case.model, "gamma": case.gamma, "sign": case.sign},
        "fixed": case.fixed,
        "delta_nu": case.delta_nu,
        "step_convention": "absolute",
        "expected": case.expected,
        "notes": case.notes,
    }
    d = _out_dir(args, "out")
    summary = report.write_sweep_outputs(d, case.name, case.kind, case.sweep, results, skipped, meta, True)
    print(f"{case.name}: {summary['points']} points, minor signs {summary['minor_signs']}, "
          f"det sign changes at period {summary['det_sign_changes_at_period']}")
    return EXIT_OK if results else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, default=1, help="concurrent sweep points")
    common.add_argument("--seed", type=int, default=1, help="seed for randomized validation")
    common.add_argument("-v", "--verbose", action="store_true")
    p = _Parser(prog="wavestab", description="Co-periodic stability of periodic traveling waves from the action Hessian.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analyze", parents=[common], help="verdicts at one parameter point").set_defaults(fn=cmd_analyze)
    sub.add_parser("sweep", parents=[common], help="sweep one parameter").set_defaults(fn=cmd_sweep)
    sub.add_parser("evans", parents=[common], help="Evans function scan at one point").set_defaults(fn=cmd_evans)
    sub.add_parser("modulate", parents=[common], help="modulation matrix eigenvalues").set_defaults(fn=cmd_modulate)
    v = sub.add_parser("validate", parents=[common], help="randomized identity and cross-pipeline checks")
    v.add_argument("--points", type=int, default=20, help="points per model")
    v.add_argument("--models", help="comma-separated model names (default: all)")
    v.add_argument("--evans", action="store_true", help="also run Evans scans (reduced problem)")
    v.set_defaults(fn=cmd_validate)
    r = sub.add_parser("reproduce", parents=[common], help="run one of the reference cases")
    r.add_argument("case", choices=sorted(CASES))
    r.set_defaults(fn=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.workers < 1:
        print("wavestab: error: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except (UsageError, ConfigError, KeyError) as exc:
        print(f"wavestab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WaveError, SingularHessian) as exc:
        print(f"wavestab: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
