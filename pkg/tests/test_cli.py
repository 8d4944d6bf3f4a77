import csv
import json
import os

import numpy as np
import pytest

from wavestab.cli import main
from wavestab.config import ConfigError, parse_config
from wavestab.profile import WaveParamsEK, WaveParamsQ
from wavestab.report import fmt, sweep_header

HERE = os.path.dirname(__file__)
CONFIGS = os.path.join(HERE, os.pardir, "configs")

KDV_SWEEP = """\
[model]
model = kdv3   # p = 3 v^2

[parameters]
lam = -60
c = 60
sweep = mu
start = -5000
stop = 20
count = 6

[output]
name = kdv_small
modulate = true
"""


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_parse_qkdv_sweep():
    cfg = parse_config(KDV_SWEEP)
    assert cfg.kind == "qkdv"
    assert cfg.sweep.var == "mu" and cfg.sweep.count == 6
    assert cfg.params == {"lam": -60.0, "c": 60.0}
    assert cfg.modulate
    assert cfg.numerics.epsilon == 1e-10 and cfg.numerics.delta_omega == 1e-4
    base = cfg.base_params()
    assert isinstance(base, WaveParamsQ) and np.isnan(base.mu)


def test_parse_ek_point():
    cfg = parse_config("[model]\nmodel = nls-capillarity\n[parameters]\nmu = 2.5\nlam = -3\nj = 1\nsigma = 0\n")
    assert cfg.kind == "ek" and cfg.sweep is None
    assert cfg.base_params() == WaveParamsEK(2.5, -3.0, 1.0, 0.0)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("[model]\nmodel = kdv3\n[parameters]\nmu = -1\nlam = oops\nc = 60\n", "<config>:5"),
        ("[model]\nmodel = kdv3\n[parameters]\nmu = -1\nlam = -60\nc = 60\n[numerics]\ndelta_nu = -1\n", "<config>:8"),
        ("[model]\nmodel = kdv3\n[parameters]\nmu = -1\nlam = -60\nc = 60\nbogus = 1\n", "<config>:7"),
        ("[model]\nmodel = nope\n[parameters]\nmu = -1\nlam = -60\nc = 60\n", "<config>:2"),
        ("[model]\nmodel = kdv3\n[parameters]\nmu = -1\nc = 60\n", "missing [parameters] lam"),
        ("[model]\nmodel = kdv3\n[parameters]\nlam = -1\nc = 60\nsweep = x\ncount = 2\n", "<config>:6"),
        ("[model]\nmodel = kdv3\n", "missing [parameters]"),
        ("no header\n", "<config>"),
    ],
)
def test_config_errors(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert needle in str(exc.value)


def test_fmt():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(True) == "true"
    assert fmt(np.int64(3)) == "3"
    assert fmt(None) == ""


def test_cli_sweep_outputs(tmp_path):
    cfg = _write(tmp_path, KDV_SWEEP)
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    for ext in ("csv", "json", "gp", "png"):
        assert (out / f"kdv_small.{ext}").exists()
    with open(out / "kdv_small.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == sweep_header("qkdv", True)
    col = {h: k for k, h in enumerate(rows[0])}
    assert len(rows) == 7
    mus = [float(r[col["mu"]]) for r in rows[1:]]
    assert mus == sorted(mus)
    for r in rows[1:]:
        assert r[col["orbital"]] == "Stable" and r[col["spectral"]] == "NotExcluded"
    summary = json.loads((out / "kdv_small.json").read_text())
    assert summary["points"] == 6 and summary["step_convention"] == "relative"
    assert "kdv_small.csv" in (out / "kdv_small.gp").read_text()


def test_cli_deterministic_and_parallel(tmp_path):
    cfg = _write(tmp_path, KDV_SWEEP)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--config", cfg, "--out", str(a)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(b), "--workers", "3"]) == 0
    for ext in ("csv", "json", "gp", "png"):
        assert (a / f"kdv_small.{ext}").read_bytes() == (b / f"kdv_small.{ext}").read_bytes()


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["analyze", "--config", os.path.join(CONFIGS, "kdv_point.cfg"), "--out", str(tmp_path)]) == 0
    assert main(["sweep", "--config", os.path.join(CONFIGS, "no_wave.cfg"), "--out", str(tmp_path)]) == 2
    assert main(["analyze"]) == 1
    assert main(["analyze", "--config", _write(tmp_path, "[model]\nmodel = x\n", "bad.cfg")]) == 1
    assert main(["analyze", "--config", os.path.join(CONFIGS, "kdv_point.cfg"), "--workers", "0"]) == 1
    assert main(["validate", "--models", "nope"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["reproduce", "no-such-case"])
    assert exc.value.code == 1
    point_below = "[model]\nmodel = kdv3\n[parameters]\nmu = -9000\nlam = -60\nc = 60\n"
    assert main(["analyze", "--config", _write(tmp_path, point_below, "below.cfg")]) == 2
    capsys.readouterr()


def test_cli_analyze_json(tmp_path):
    assert main(["analyze", "--config", os.path.join(CONFIGS, "nls_point.cfg"), "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "nls_point.json").read_text())
    assert data["report"]["n_hess"] == 2
    assert data["report"]["verdicts_orbital"] == {"ekl": "Stable", "eke": "Stable"}
    assert data["modulation"]["hyperbolic"] is True


def test_cli_modulate(tmp_path):
    assert main(["modulate", "--config", os.path.join(CONFIGS, "kdv_point.cfg"), "--out", str(tmp_path)]) == 0
    with open(tmp_path / "kdv_point_modulation.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "period" and rows[1][-1] == "true"


def test_cli_evans(tmp_path):
    assert main(["evans", "--config", os.path.join(CONFIGS, "kdv_point.cfg"), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "kdv_point_evans.json").read_text())
    assert summary["fit_relative_error"] <= 0.02
    assert summary["tail_sign"] == -1
    assert summary["sturm"]["T0_residual"] <= 1e-6
    with open(tmp_path / "kdv_point_evans.csv", newline="") as fh:
        assert next(csv.reader(fh)) == ["r", "value", "cumulative_sign_changes"]


def test_cli_validate(tmp_path):
    assert main(["validate", "--models", "kdv3,nls-capillarity", "--points", "3", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "validation.json").read_text())
    assert [m["model"] for m in data["models"]] == ["kdv3", "nls-capillarity"]
    assert all(m["ok"] for m in data["models"])


def test_cli_reproduce_mkdv_defocusing(tmp_path):
    assert main(["reproduce", "mkdv-defocusing", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "mkdv-defocusing.json").read_text())
    assert summary["step_convention"] == "absolute" and summary["delta_nu"] == 0.005
    assert summary["n_hess"] == {"1": summary["points"]}
    assert (tmp_path / "mkdv-defocusing.gp").exists() and (tmp_path / "mkdv-defocusing.png").exists()
