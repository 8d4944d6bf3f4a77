"""Run configuration: ``key = value`` lines under ``[section]`` headers, ``#`` comments.

Sections: ``[model]`` (name, gamma, sign, kappa), ``[parameters]`` (mu, lam and
either c or j, sigma; optional sweep, start, stop, count), ``[numerics]`` and
``[output]``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .action import Numerics
from .models import NonlinearModel, make_builtin
from .profile import WaveParamsEK, WaveParamsQ


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    var: str
    start: float
    stop: float
    count: int


@dataclass(frozen=True)
class NumericsConfig:
    epsilon: float = 1e-10
    delta_omega: float = 1e-4
    delta_nu: float = 1e-4
    relative_step: bool = True
    rk4_steps: int = 4096
    r_max: float | None = None
    hessian: str = "grad-fd"
    rule: str = "midpoint"

    def numerics(self) -> Numerics:
        return Numerics(
            delta_nu=self.delta_nu,
            relative_step=self.relative_step,
            delta_omega=self.delta_omega,
            rule=self.rule,
            hessian=self.hessian,
        )


@dataclass(frozen=True)
class RunConfig:
    model_name: str
    gamma: float | None
    sign: float
    kappa: float
    kind: str
    params: dict[str, float]
    sweep: SweepSpec | None
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    out_dir: str = "out"
    name: str = "run"
    modulate: bool = False

    def build_model(self) -> NonlinearModel:
        return make_builtin(self.model_name, gamma=self.gamma, sign=self.sign, kappa=self.kappa)

    def base_params(self) -> WaveParamsQ | WaveParamsEK:
        p = dict(self.params)
        if self.sweep is not None:
            p[self.sweep.var] = math.nan
        if self.kind == "qkdv":
            return WaveParamsQ(p["mu"], p["lam"], p["c"])
        return WaveParamsEK(p["mu"], p["lam"], p["j"], p["sigma"])


_Q_KEYS = ("mu", "lam", "c")
_EK_KEYS = ("mu", "lam", "j", "sigma")


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for k, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
        elif current == section and "=" in line and line.split("=", 1)[0].strip() == key:
            return k
    return None


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    def where(section, key):
        line = _line_of(text, section, key)
        return f"{source}:{line}" if line else source

    def get(section, key, conv, default=None, required=False):
        if not cp.has_option(section, key):
            if required:
                raise ConfigError(f"{source}: missing [{section}] {key}")
            return default
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"{where(section, key)}: bad value for {key}: {raw!r} ({exc})") from exc

    def positive(section, key, conv, default):
        val = get(section, key, conv, default)
        if val is not None and not val > 0:
            raise ConfigError(f"{where(section, key)}: {key} must be positive")
        return val

    def boolean(raw):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError("expected a boolean")

    if not cp.has_section("model"):
        raise ConfigError(f"{source}: missing [model] section")
    name = get("model", "model", str) or get("model", "name", str, required=True)
    gamma = get("model", "gamma", float)
    sign = get("model", "sign", float, 1.0)
    kappa = get("model", "kappa", float, 1.0)

    if not cp.has_section("parameters"):
        raise ConfigError(f"{source}: missing [parameters] section")
    given = {k: v for k, v in cp.items("parameters")}
    kind = "ek" if ("j" in given or "sigma" in given) else "qkdv"
    keys = _EK_KEYS if kind == "ek" else _Q_KEYS
    sweep = None
    if "sweep" in given:
        var = given["sweep"].strip()
        if var not in keys:
            raise ConfigError(f"{where('parameters', 'sweep')}: sweep variable must be one of {keys}")
        count = get("parameters", "count", int, required=True)
        if count < 1:
            raise ConfigError(f"{where('parameters', 'count')}: count must be at least 1")
        sweep = SweepSpec(var, get("parameters", "start", float, required=True), get("parameters", "stop", float, required=True), count)
    params = {}
    for k in keys:
        if sweep is not None and k == sweep.var:
            continue
        params[k] = get("parameters", k, float, required=True)
    extra = set(given) - set(keys) - {"sweep", "start", "stop", "count"}
    if extra:
        k = sorted(extra)[0]
        raise ConfigError(f"{where('parameters', k)}: unknown parameter {k!r}")

    num = NumericsConfig(
        epsilon=positive("numerics", "epsilon", float, 1e-10),
        delta_omega=positive("numerics", "delta_omega", float, 1e-4),
        delta_nu=positive("numerics", "delta_nu", float, 1e-4),
        relative_step=get("numerics", "relative_step", boolean, True),
        rk4_steps=positive("numerics", "rk4_steps", int, 4096),
        r_max=positive("numerics", "r_max", float, None),
        hessian=get("numerics", "hessian", str, "grad-fd"),
        rule=get("numerics", "rule", str, "midpoint"),
    )
    if num.hessian not in ("grad-fd", "second-diff"):
        raise ConfigError(f"{where('numerics', 'hessian')}: hessian must be grad-fd or second-diff")
    if num.rule not in ("midpoint", "trapezoid"):
        raise ConfigError(f"{where('numerics', 'rule')}: rule must be midpoint or trapezoid")

    cfg = RunConfig(
        model_name=name.strip(),
        gamma=gamma,
        sign=sign,
        kappa=kappa,
        kind=kind,
        params=params,
        sweep=sweep,
        numerics=num,
        out_dir=get("output", "directory", str, "out"),
        name=get("output", "name", str, "run"),
        modulate=get("output", "modulate", boolean, False),
    )
    try:
        cfg.build_model()
    except ValueError as exc:
        raise ConfigError(f"{where('model', 'model') if cp.has_option('model', 'model') else where('model', 'name')}: {exc}") from exc
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path)
