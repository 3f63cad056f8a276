"""Experiment configuration: a sectioned ``key = value`` document.

Example::

    [model]
    kind = vasicek
    a = 1
    b = 0.05
    xi = 0.1
    r0 = 0.03

    [curve.mu]
    constant = 0.08

    [curve.sigma]
    knots = (0, 0.2), (1, 0.25)
    floor = 0.01

    [grid]
    horizon = 1
    n_steps = 1000

    [mc]
    n_paths = 100000
    seed = 20240917

    [delays]
    d_stock = 0.1, 0.25
    d_rate = 0

Curves are ``constant = x`` or ``knots = (t, v), ...`` with knots spanning [0, T].
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .grids import Curve, TimeGrid
from .models import (
    BlackScholes,
    CIRParams,
    CIRRate,
    Heston,
    HullWhite,
    HWParams,
    InadmissibleModelError,
    MarketModel,
    OUParams,
    Vasicek,
    check_admissible,
)
from .strategies import DelaySpec, InsiderInfo


class ConfigError(ValueError):
    """Invalid configuration; the message carries ``file:line:`` when known."""


MODEL_KEYS = {
    "bsm": (),
    "heston": ("kappa", "theta", "eta", "v0"),
    "vasicek": ("a", "b", "xi", "r0"),
    "hull_white": ("a", "theta", "r0"),
    "cir_rate": ("a", "b", "theta", "r0"),
}
MODEL_CURVES = {
    "bsm": ("mu", "rho", "sigma"),
    "heston": ("mu", "rho"),
    "vasicek": ("mu", "sigma"),
    "hull_white": ("mu", "sigma", "kappa"),
    "cir_rate": ("mu", "sigma"),
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"
    sigmas: tuple = ()

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ExperimentConfig:
    model: MarketModel
    grid: TimeGrid
    n_paths: int = 10_000
    seed: int = 0
    pi_max: float = 1e6
    delays: tuple = ()
    strategy: str = "ait"
    insider: InsiderInfo = field(default_factory=InsiderInfo)
    tolerance_se: float = 3.0
    quad_tol: float = 0.0
    temporal_tol: float = 1e-10
    sweep: Optional[SweepSpec] = None
    csv: Optional[str] = None
    svg: Optional[str] = None
    name: str = "experiment"


# --------------------------------------------------------------------------- parsing

_NUM = r"[-+0-9.eEinfa]+"
_KNOT = re.compile(rf"\(\s*({_NUM})\s*,\s*({_NUM})\s*\)")


class _Doc:
    """configparser wrapper that remembers the line of every key."""

    def __init__(self, text: str, source: str):
        self.source = source
        self.parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            self.parser.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from None
        self.lines: dict[tuple[str, str], int] = {}
        self.section_lines: dict[str, int] = {}
        section = None
        for n, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            m = re.match(r"^\[(.+)\]$", line)
            if m:
                section = m.group(1).strip()
                self.section_lines[section] = n
            elif section and "=" in line and not line.startswith(("#", ";")):
                self.lines[(section, line.split("=", 1)[0].strip().lower())] = n

    def where(self, section: str, key: Optional[str] = None) -> str:
        n = self.lines.get((section, key)) if key else None
        n = n or self.section_lines.get(section)
        return f"{self.source}:{n}" if n else self.source

    def error(self, section: str, key: Optional[str], msg: str) -> ConfigError:
        return ConfigError(f"{self.where(section, key)}: [{section}] {key + ': ' if key else ''}{msg}")

    def has(self, section: str, key: Optional[str] = None) -> bool:
        if not self.parser.has_section(section):
            return False
        return key is None or self.parser.has_option(section, key)

    def get(self, section: str, key: str, default=None):
        if not self.has(section, key):
            if default is None:
                raise self.error(section, None, f"missing required key {key!r}") if self.has(section) \
                    else ConfigError(f"{self.source}: missing section [{section}] (needs {key!r})")
            return default
        return self.parser.get(section, key).strip()

    def number(self, section: str, key: str, default=None, cast=float):
        raw = self.get(section, key, default if default is None else str(default))
        try:
            value = cast(float(raw)) if cast is int else cast(raw)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {raw!r}") from None
        if cast is int and float(raw) != int(float(raw)):
            raise self.error(section, key, f"expected an integer, got {raw!r}")
        if not np.isfinite(value):
            raise self.error(section, key, f"must be finite, got {raw!r}")
        return value

    def number_list(self, section: str, key: str, default=None) -> tuple:
        raw = self.get(section, key, default)
        try:
            return tuple(float(x) for x in raw.split(",") if x.strip())
        except ValueError:
            raise self.error(section, key, f"expected comma-separated numbers, got {raw!r}") from None


def _parse_curve(doc: _Doc, name: str, horizon: float) -> Curve:
    section = f"curve.{name}"
    if not doc.has(section):
        raise ConfigError(f"{doc.source}: missing section [{section}]")
    floor = doc.number(section, "floor") if doc.has(section, "floor") else None
    has_const, has_knots = doc.has(section, "constant"), doc.has(section, "knots")
    if has_const == has_knots:
        raise doc.error(section, None, "give exactly one of 'constant' or 'knots'")
    try:
        if has_const:
            return Curve.constant(doc.number(section, "constant"), floor)
        raw = doc.get(section, "knots")
        knots = [(float(t), float(v)) for t, v in _KNOT.findall(raw)]
        if not knots or _KNOT.sub("", raw).replace(",", "").strip():
            raise doc.error(section, "knots", f"expected '(t, value), ...' pairs, got {raw!r}")
        if knots[0][0] != 0 or abs(knots[-1][0] - horizon) > 1e-12 * horizon:
            raise doc.error(section, "knots", f"knots must start at 0 and end at T={horizon}")
        return Curve.piecewise_linear(knots, floor)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise doc.error(section, "knots" if has_knots else "constant", str(exc)) from None


def _parse_model(doc: _Doc, horizon: float) -> MarketModel:
    kind = doc.get("model", "kind").lower()
    if kind not in MODEL_KEYS:
        raise doc.error("model", "kind", f"unknown model {kind!r}; choose from {sorted(MODEL_KEYS)}")
    p = {k: doc.number("model", k) for k in MODEL_KEYS[kind]}
    c = {name: _parse_curve(doc, name, horizon) for name in MODEL_CURVES[kind]}
    if "sigma" in c and c["sigma"].minimum() <= 0:
        raise doc.error("curve.sigma", None, "volatility must stay positive on [0, T]")
    try:
        if kind == "bsm":
            model = BlackScholes(c["mu"], c["rho"], c["sigma"])
        elif kind == "heston":
            model = Heston(c["mu"], c["rho"], CIRParams(p["kappa"], p["theta"], p["eta"], p["v0"]))
        elif kind == "vasicek":
            model = Vasicek(c["mu"], c["sigma"], OUParams(p["a"], p["b"], p["xi"], p["r0"]))
        elif kind == "hull_white":
            model = HullWhite(c["mu"], c["sigma"], HWParams(c["kappa"], p["a"], p["theta"], p["r0"]))
        else:
            model = CIRRate(c["mu"], c["sigma"], CIRParams(p["a"], p["b"], p["theta"], p["r0"]))
    except ValueError as exc:
        raise doc.error("model", None, str(exc)) from None
    try:
        check_admissible(model)
    except InadmissibleModelError as exc:
        raise InadmissibleModelError(f"{doc.where('model', 'kind')}: {exc}") from None
    return model


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    doc = _Doc(text, source)
    horizon = doc.number("grid", "horizon")
    n_steps = doc.number("grid", "n_steps", cast=int)
    try:
        grid = TimeGrid(horizon, n_steps)
    except ValueError as exc:
        raise doc.error("grid", None, str(exc)) from None
    model = _parse_model(doc, horizon)

    n_paths = doc.number("mc", "n_paths", 10_000, int) if doc.has("mc") else 10_000
    seed = doc.number("mc", "seed", 0, int) if doc.has("mc") else 0
    pi_max = doc.number("mc", "pi_max", 1e6) if doc.has("mc") else 1e6
    if n_paths < 2:
        raise doc.error("mc", "n_paths", "need at least 2 paths")
    if seed < 0:
        raise doc.error("mc", "seed", "seed must be nonnegative")
    if not pi_max > 0:
        raise doc.error("mc", "pi_max", "must be positive")

    delays = ()
    if doc.has("delays"):
        stocks = doc.number_list("delays", "d_stock")
        rates = doc.number_list("delays", "d_rate", "0")
        if len(rates) == 1:
            rates = rates * len(stocks)
        if len(rates) != len(stocks):
            raise doc.error("delays", "d_rate", "give one d_rate or one per d_stock")
        for ds, dr in zip(stocks, rates):
            try:
                spec = DelaySpec(ds, dr).validate(horizon)
            except ValueError as exc:
                raise doc.error("delays", "d_stock", str(exc)) from None
            if dr and model.kind in ("bsm", "heston"):
                raise doc.error("delays", "d_rate", f"d_rate applies only to short-rate models, not {model.kind}")
            delays += (spec,)

    strategy = doc.get("strategy", "strategy", "ait").lower() if doc.has("strategy") else "ait"
    if strategy not in ("merton", "ait"):
        raise doc.error("strategy", "strategy", f"must be 'merton' or 'ait', got {strategy!r}")
    insider_kind = doc.get("insider", "kind", "terminal_brownian") if doc.has("insider") else "terminal_brownian"
    if insider_kind != "terminal_brownian":
        raise doc.error("insider", "kind", f"only 'terminal_brownian' is supported, got {insider_kind!r}")

    tolerance_se = doc.number("compare", "tolerance_se", 3.0) if doc.has("compare") else 3.0
    quad_tol = doc.number("compare", "quad_tol", 0.0) if doc.has("compare") else 0.0
    temporal_tol = doc.number("temporal", "tolerance", 1e-10) if doc.has("temporal") else 1e-10
    if not temporal_tol > 0:
        raise doc.error("temporal", "tolerance", "must be positive")

    sweep = None
    if doc.has("sweep"):
        axis = doc.get("sweep", "axis")
        if axis not in ("a", "xi"):
            raise doc.error("sweep", "axis", f"must be 'a' or 'xi', got {axis!r}")
        spacing = doc.get("sweep", "spacing", "linear")
        if spacing not in ("linear", "log"):
            raise doc.error("sweep", "spacing", "must be 'linear' or 'log'")
        start, stop = doc.number("sweep", "min"), doc.number("sweep", "max")
        count = doc.number("sweep", "count", cast=int)
        if not 0 < start < stop or count < 1:
            raise doc.error("sweep", None, "need 0 < min < max and count >= 1")
        sigmas = doc.number_list("sweep", "sigma", "") if doc.has("sweep", "sigma") else ()
        if any(s <= 0 for s in sigmas):
            raise doc.error("sweep", "sigma", "volatilities must be positive")
        sweep = SweepSpec(axis, start, stop, count, spacing, sigmas)

    csv_out = doc.get("outputs", "csv", "") if doc.has("outputs") else ""
    svg_out = doc.get("outputs", "svg", "") if doc.has("outputs") else ""
    name = doc.get("experiment", "name", "experiment") if doc.has("experiment") else "experiment"
    return ExperimentConfig(model, grid, n_paths, seed, pi_max, delays, strategy, InsiderInfo(insider_kind),
                            tolerance_se, quad_tol, temporal_tol, sweep, csv_out or None, svg_out or None, name)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc.strerror})") from None
    return parse_config(text, str(path))


# --------------------------------------------------------------------------- canonical dump


def _curve_lines(name: str, curve: Curve) -> list[str]:
    lines = [f"[curve.{name}]"]
    if curve.is_constant:
        lines.append(f"constant = {curve.values[0]!r}")
    else:
        lines.append("knots = " + ", ".join(f"({t!r}, {v!r})" for t, v in zip(curve.times, curve.values)))
    if curve.floor is not None:
        lines.append(f"floor = {curve.floor!r}")
    return lines + [""]


def dump_config(cfg: ExperimentConfig) -> str:
    m = cfg.model
    lines = ["[experiment]", f"name = {cfg.name}", "", "[model]", f"kind = {m.kind}"]
    if isinstance(m, Heston):
        v = m.variance
        params = {"kappa": v.kappa, "theta": v.theta, "eta": v.eta, "v0": v.z0}
    elif isinstance(m, Vasicek):
        params = {"a": m.rate.a, "b": m.rate.b, "xi": m.rate.xi, "r0": m.rate.r0}
    elif isinstance(m, HullWhite):
        params = {"a": m.rate.a, "theta": m.rate.theta, "r0": m.rate.r0}
    elif isinstance(m, CIRRate):
        params = {"a": m.rate.kappa, "b": m.rate.theta, "theta": m.rate.eta, "r0": m.rate.z0}
    else:
        params = {}
    lines += [f"{k} = {float(v)!r}" for k, v in params.items()] + [""]
    curves = {"mu": m.mu, "rho": getattr(m, "rho", None), "sigma": getattr(m, "sigma", None),
              "kappa": m.rate.kappa if isinstance(m, HullWhite) else None}
    for name in MODEL_CURVES[m.kind]:
        lines += _curve_lines(name, curves[name])
    lines += ["[grid]", f"horizon = {cfg.grid.horizon!r}", f"n_steps = {cfg.grid.n_steps}", "",
              "[mc]", f"n_paths = {cfg.n_paths}", f"seed = {cfg.seed}", f"pi_max = {cfg.pi_max!r}", ""]
    if cfg.delays:
        lines += ["[delays]",
                  "d_stock = " + ", ".join(repr(d.d_stock) for d in cfg.delays),
                  "d_rate = " + ", ".join(repr(d.d_rate) for d in cfg.delays), ""]
    lines += ["[strategy]", f"strategy = {cfg.strategy}", "", "[insider]", f"kind = {cfg.insider.kind}", "",
              "[compare]", f"tolerance_se = {cfg.tolerance_se!r}", f"quad_tol = {cfg.quad_tol!r}", "",
              "[temporal]", f"tolerance = {cfg.temporal_tol!r}", ""]
    if cfg.sweep:
        s = cfg.sweep
        lines += ["[sweep]", f"axis = {s.axis}", f"min = {s.start!r}", f"max = {s.stop!r}",
                  f"count = {s.count}", f"spacing = {s.spacing}"]
        if s.sigmas:
            lines.append("sigma = " + ", ".join(repr(x) for x in s.sigmas))
        lines.append("")
    if cfg.csv or cfg.svg:
        lines.append("[outputs]")
        if cfg.csv:
            lines.append(f"csv = {cfg.csv}")
        if cfg.svg:
            lines.append(f"svg = {cfg.svg}")
        lines.append("")
    return "\n".join(lines)
