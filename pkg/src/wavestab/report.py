"""CSV, JSON, gnuplot and PNG output for sweeps and scans."""

from __future__ import annotations

import csv
import json
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evans import EvansScan  # noqa: E402
from .sweep import PointResult  # noqa: E402

RESIDUAL_KEYS = ("det_c_q", "cauchy_schwarz", "det_C_E", "det_C_L", "det_hess_ek", "n_identity")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def sweep_header(kind: str, modulate: bool) -> list[str]:
    if kind == "qkdv":
        cols = ["sweep_value", "mu", "lam", "c", "period", "theta", "m1", "m2", "m3", "n_hess", "n_c_q", "spectral", "orbital"]
        n_eig = 3
    else:
        cols = ["sweep_value", "mu", "lam", "j", "sigma", "period", "theta", "M1", "M2", "M3", "M4",
                "n_hess", "n_hess_theta", "n_C_E", "n_C_L", "spectral", "orbital_ekl", "orbital_eke"]
        n_eig = 4
    cols += ["conditions", "condition_number", *RESIDUAL_KEYS, "limit_zone"]
    if modulate:
        for k in range(1, n_eig + 1):
            cols += [f"eig{k}_re", f"eig{k}_im"]
        cols += ["hyperbolic", "advisory"]
    return cols


def sweep_row(r: PointResult, kind: str, modulate: bool) -> list[str]:
    R = r.report
    p = r.params
    if kind == "qkdv":
        row = [r.value, p.mu, p.lam, p.c, r.period, r.theta, *R.minors, R.n_hess,
               R.signatures.get("c_q"), R.verdict_spectral, R.verdicts_orbital["qkdv"]]
        n_eig = 3
    else:
        s = R.signatures
        row = [r.value, p.mu, p.lam, p.j, p.sigma, r.period, r.theta, *R.minors, R.n_hess,
               s.get("hess_theta"), s.get("C_E"), s.get("C_L"), R.verdict_spectral,
               R.verdicts_orbital["ekl"], R.verdicts_orbital["eke"]]
        n_eig = 4
    row += [";".join(R.conditions), R.condition_number, *(R.residuals.get(k) for k in RESIDUAL_KEYS), R.limit_zone]
    if modulate:
        if r.modulation is None:
            row += [None] * (2 * n_eig + 1)
        else:
            for z in r.modulation.eigenvalues:
                row += [z.real, z.imag]
            row.append(r.modulation.hyperbolic)
        row.append(r.advisory)
    return [fmt(x) for x in row]


def write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def det_crossings(results: list[PointResult]) -> list[float]:
    """Periods where the last leading minor (the determinant) changes sign, by linear interpolation."""
    out = []
    for a, b in zip(results, results[1:]):
        da, db = a.report.minors[-1], b.report.minors[-1]
        if da * db < 0:
            out.append(a.period + (b.period - a.period) * da / (da - db))
    return out


def sweep_summary(name: str, kind: str, var: str, results: list[PointResult], skipped, meta: dict) -> dict:
    def count(key):
        out: dict[str, int] = {}
        for r in results:
            k = key(r)
            out[k] = out.get(k, 0) + 1
        return dict(sorted(out.items()))

    summary = {
        "name": name,
        "kind": kind,
        "sweep_variable": var,
        "points": len(results),
        "skipped": [{"value": v, "reason": why} for v, why in skipped],
        "period_range": [min((r.period for r in results), default=None), max((r.period for r in results), default=None)],
        "minor_signs": count(lambda r: ",".join(str(s) for s in r.report.minor_signs)),
        "n_hess": count(lambda r: str(r.report.n_hess)),
        "spectral": count(lambda r: r.report.verdict_spectral),
        "limit_zone_points": sum(1 for r in results if r.report.limit_zone),
        "det_sign_changes_at_period": det_crossings(results),
        "max_identity_residual": max(
            (v for r in results for k, v in r.report.residuals.items() if k not in ("cauchy_schwarz", "n_identity")),
            default=0.0,
        ),
        "min_cauchy_schwarz_margin": min((r.report.residuals.get("cauchy_schwarz", math.inf) for r in results), default=None),
    }
    for label in (("qkdv",) if kind == "qkdv" else ("ekl", "eke")):
        summary[f"orbital_{label}"] = count(lambda r, label=label: r.report.verdicts_orbital[label])
    mods = [r.modulation for r in results if r.modulation is not None]
    if mods:
        summary["modulation_hyperbolic"] = sum(1 for m in mods if m.hyperbolic)
        summary["sideband_advisories"] = sum(1 for m in mods if not m.hyperbolic)
    summary.update(meta)
    return summary


def _minor_labels(kind: str) -> list[str]:
    return ["m1", "m2", "m3"] if kind == "qkdv" else ["M1", "M2", "M3", "M4"]


def gnuplot_sweep(name: str, kind: str, header: list[str]) -> str:
    col = {h: k + 1 for k, h in enumerate(header)}
    panels = [("condition_number", "condition number", True)] + [(m, m, False) for m in _minor_labels(kind)]
    rows = 2 if len(panels) <= 4 else 3
    lines = [
        f"# condition number and leading minors against the period for {name}",
        "set datafile separator ','",
        "set terminal pngcairo size 1000,800",
        f"set output '{name}_gnuplot.png'",
        f"set multiplot layout {rows},2",
        "set key off",
        "set xlabel 'period'",
    ]
    for key, title, logscale in panels:
        lines.append("set logscale y" if logscale else "unset logscale y")
        lines.append(f"set title '{title}'")
        lines.append(f"plot '{name}.csv' using {col['period']}:{col[key]} with linespoints pt 7 ps 0.5")
    lines += ["unset multiplot", ""]
    return "\n".join(lines)


def _save(fig, path: str) -> None:
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def plot_sweep(path: str, name: str, kind: str, results: list[PointResult]) -> None:
    labels = _minor_labels(kind)
    rows = 2 if kind == "qkdv" else 3
    fig, axes = plt.subplots(rows, 2, figsize=(10, 4 * rows))
    axes = axes.ravel()
    per = np.array([r.period for r in results])
    cond = np.array([r.report.condition_number for r in results])
    axes[0].semilogy(per, cond, ".-")
    axes[0].set_title("condition number")
    for k, lab in enumerate(labels):
        ax = axes[k + 1]
        ax.plot(per, [r.report.minors[k] for r in results], ".-")
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_title(lab)
    for ax in axes[len(labels) + 1:]:
        ax.set_visible(False)
    for ax in axes:
        ax.set_xlabel("period")
    fig.suptitle(name)
    fig.tight_layout()
    _save(fig, path)


def evans_rows(scan: EvansScan) -> list[list[str]]:
    return [[fmt(r), fmt(v), fmt(int(n))] for r, v, n in zip(scan.r, scan.values, scan.cumulative_sign_changes)]


EVANS_HEADER = ["r", "value", "cumulative_sign_changes"]


def evans_summary(scan: EvansScan, det_hess: float, extra: dict) -> dict:
    rel = abs(scan.fit_coeff - det_hess) / abs(det_hess) if det_hess else math.nan
    out = {
        "power": scan.power,
        "fit_coeff": scan.fit_coeff,
        "fit_slope": scan.fit_slope,
        "fit_window": list(scan.fit_window),
        "det_hess": det_hess,
        "fit_relative_error": rel,
        "sign_changes": scan.sign_changes,
        "tail_sign": scan.tail_sign,
        "r_max": scan.r_max,
        "det_drift": scan.det_drift,
        "noise_floor_at_r_min": scan.noise,
    }
    out.update(extra)
    return out


def gnuplot_evans(name: str) -> str:
    return "\n".join(
        [
            f"# |Evans function| against r for {name}; positive values in column 2 are drawn separately",
            "set datafile separator ','",
            "set terminal pngcairo size 800,600",
            f"set output '{name}_gnuplot.png'",
            "set logscale xy",
            "set xlabel 'r'",
            "set ylabel '|value|'",
            f"plot '{name}.csv' using 1:($2>0?$2:1/0) with points pt 7 title 'positive', \\",
            f"     '{name}.csv' using 1:($2<0?-$2:1/0) with points pt 6 title 'negative'",
            "",
        ]
    )


def plot_evans(path: str, name: str, scan: EvansScan, det_hess: float) -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    pos = scan.values > 0
    ax.loglog(scan.r[pos], scan.values[pos], "o", ms=3, label="positive")
    ax.loglog(scan.r[~pos], -scan.values[~pos], "o", ms=3, mfc="none", label="negative")
    ax.loglog(scan.r, abs(det_hess) * scan.r ** scan.power, "-", lw=0.8, label=f"|det Hess| r^{scan.power}")
    ax.set_xlabel("r")
    ax.set_ylabel("|value|")
    ax.set_title(name)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def write_sweep_outputs(out_dir: str, name: str, kind: str, var: str, results, skipped, meta: dict, modulate: bool) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    header = sweep_header(kind, modulate)
    write_csv(os.path.join(out_dir, f"{name}.csv"), header, [sweep_row(r, kind, modulate) for r in results])
    summary = sweep_summary(name, kind, var, results, skipped, meta)
    write_json(os.path.join(out_dir, f"{name}.json"), summary)
    with open(os.path.join(out_dir, f"{name}.gp"), "w", encoding="utf-8") as fh:
        fh.write(gnuplot_sweep(name, kind, header))
    if results:
        plot_sweep(os.path.join(out_dir, f"{name}.png"), name, kind, results)
    return summary
