"""Command-line entry point: ``aitlab {validate,compare,simulate,temporal-value,sweep}``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from .closed_forms import closed_form_report
from .config import ConfigError, ExperimentConfig, load_config
from .engine import simulate_log_wealth
from .grids import Curve
from .models import HullWhite, InadmissibleModelError, Vasicek
from .stats import summarize
from .strategies import DelaySpec, ait_strategy, merton_strategy
from .temporal import SweepRow, emit_figure, sweep, temporal_value, write_sweep_csv
from .validation import DEFAULT_SEED, format_table, run_validate

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_INADMISSIBLE = 0, 1, 2, 3

COLUMNS = ["model", "strategy", "d_stock", "d_rate", "n_paths", "n_steps", "seed",
           "mean", "std_error", "closed_form", "abs_diff", "diff_in_se"]


def fmt(x) -> str:
    """Shared number format for CSV and console."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _comparison_row(cfg: ExperimentConfig, strategy: str, delays, est, closed, closed_se=0.0):
    abs_diff = diff_in_se = None
    if closed is not None:
        abs_diff = abs(est.mean - closed)
        diff_in_se = est.z_score(closed, closed_se)
    return {
        "model": cfg.model.kind,
        "strategy": strategy,
        "d_stock": None if delays is None else delays.d_stock,
        "d_rate": None if delays is None else delays.d_rate,
        "n_paths": est.n_paths,
        "n_steps": est.n_steps,
        "seed": est.seed,
        "mean": est.mean,
        "std_error": est.std_error,
        "closed_form": closed,
        "abs_diff": abs_diff,
        "diff_in_se": diff_in_se,
        "_combined_se": float(np.hypot(est.std_error, closed_se)),
        "_clamped": est.clamped,
    }


def _render(rows) -> tuple[str, str]:
    """(csv text, console table) built from the same formatted strings."""
    cells = [[fmt(r[c]) for c in COLUMNS] for r in rows]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    writer.writerows(cells)
    widths = [max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(COLUMNS)]
    table = ["  ".join(h.ljust(w) for h, w in zip(COLUMNS, widths))]
    table += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return buf.getvalue(), "\n".join(line.rstrip() for line in table)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _output(cfg: ExperimentConfig, out_dir: Path, key: str, default: str) -> Path:
    return out_dir / (getattr(cfg, key) or default)


def run_experiment(cfg: ExperimentConfig, workers: int = 1, mode: str = "compare") -> list[dict]:
    """Monte Carlo vs closed form rows; ``mode='simulate'`` keeps only the configured strategy."""
    if not cfg.delays and (mode == "compare" or cfg.strategy == "ait"):
        raise ConfigError("the [delays] section is required for the insider strategy")
    merton = merton_strategy(cfg.model)
    aits = [ait_strategy(cfg.model, d) for d in cfg.delays]
    strategies = [merton] + (aits if mode == "compare" or cfg.strategy == "ait" else [])
    # closed forms first: an inadmissible model is refused before any simulation
    reports = [closed_form_report(cfg.model, d, cfg.grid, cfg.n_paths, cfg.seed) for d in cfg.delays]
    values, clamped = simulate_log_wealth(cfg.model, strategies, cfg.grid, cfg.n_paths, cfg.seed,
                                          workers, cfg.pi_max)
    n_steps = cfg.grid.n_steps
    rows = []
    if mode == "compare" or cfg.strategy == "merton":
        rep = reports[0] if reports else closed_form_report(cfg.model, DelaySpec(cfg.grid.horizon), cfg.grid,
                                                            cfg.n_paths, cfg.seed)
        v_merton, v_se = rep.v_merton, rep.v_merton_se
        est = summarize(values[0], cfg.seed, n_steps, int(clamped[0]))
        rows.append(_comparison_row(cfg, "merton", None, est, v_merton, v_se))
    if mode == "compare" or cfg.strategy == "ait":
        for k, (d, rep) in enumerate(zip(cfg.delays, reports), start=1):
            est = summarize(values[k], cfg.seed, n_steps, int(clamped[k]))
            rows.append(_comparison_row(cfg, "ait", d, est, rep.v_ait, rep.v_merton_se))
            diff = summarize(values[k] - values[0], cfg.seed, n_steps, int(clamped[0] + clamped[k]))
            rows.append(_comparison_row(cfg, "delta_v", d, diff, rep.delta_v))
    return rows


def _failures(rows, cfg: ExperimentConfig) -> list[dict]:
    bad = []
    for r in rows:
        if r["closed_form"] is None:
            continue
        if r["abs_diff"] > cfg.tolerance_se * r["_combined_se"] + cfg.quad_tol:
            bad.append(r)
    return bad


# --------------------------------------------------------------------------- subcommands


def cmd_validate(args) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    checks = run_validate(seed)
    print(format_table(checks))
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed (seed {seed})")
    return EXIT_TOLERANCE if failed else EXIT_OK


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError(f"{args.command} needs --config <path>")
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be nonnegative, got {args.seed}")
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _run_mc(args, mode: str) -> int:
    cfg = _load(args)
    rows = run_experiment(cfg, args.workers, mode)
    text, table = _render(rows)
    path = _output(cfg, Path(args.out_dir), "csv", f"{cfg.name}_{mode}.csv")
    _write(path, text)
    print(table)
    clamped = sum(r["_clamped"] for r in rows if r["strategy"] != "delta_v")
    if clamped:
        print(f"warning: {clamped} portfolio values clamped to |pi| <= {cfg.pi_max:g}")
    print(f"wrote {path}")
    if mode == "compare":
        bad = _failures(rows, cfg)
        for r in bad:
            print(f"FAIL {r['strategy']} d_stock={fmt(r['d_stock'])} d_rate={fmt(r['d_rate'])}: "
                  f"|diff|={fmt(r['abs_diff'])} exceeds {fmt(cfg.tolerance_se)} SE"
                  + (f" + {fmt(cfg.quad_tol)}" if cfg.quad_tol else ""))
        return EXIT_TOLERANCE if bad else EXIT_OK
    return EXIT_OK


def cmd_compare(args) -> int:
    return _run_mc(args, "compare")


def cmd_simulate(args) -> int:
    return _run_mc(args, "simulate")


def _rate_and_sigma(cfg: ExperimentConfig):
    if not isinstance(cfg.model, (Vasicek, HullWhite)):
        raise ConfigError(f"temporal value needs a vasicek or hull_white model, got {cfg.model.kind}")
    return cfg.model.rate, cfg.model.sigma


def cmd_temporal_value(args) -> int:
    cfg = _load(args)
    rate, sigma = _rate_and_sigma(cfg)
    res = temporal_value(cfg.grid.horizon, rate, sigma, cfg.grid, cfg.temporal_tol)
    if res.finite:
        print(f"temporal value: finite d* = {fmt(res.d_star)} (|f(d*)| = {fmt(res.residual)}, "
              f"tolerance {fmt(cfg.temporal_tol)})")
    else:
        print("temporal value: infinite (the insider gain stays positive for every delay in (0, T])")
    if cfg.csv:
        name = "xi" if isinstance(cfg.model, Vasicek) else "theta"
        path = write_sweep_csv([SweepRow(name, getattr(rate, name), res)], Path(args.out_dir) / cfg.csv)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if cfg.sweep is None:
        raise ConfigError(f"{args.config}: sweep needs a [sweep] section")
    if not isinstance(cfg.model, Vasicek):
        raise ConfigError(f"{args.config}: sweep needs a vasicek model, got {cfg.model.kind}")
    s, ou = cfg.sweep, cfg.model.rate
    values = s.values()
    sigmas = {f"sigma={fmt(v)}": Curve.constant(v) for v in s.sigmas} or {"sigma": cfg.model.sigma}
    tables = {}
    for label, sigma in sigmas.items():
        tables[label] = sweep(s.axis, values, cfg.grid.horizon, ou.a, ou.xi, sigma, cfg.grid,
                              cfg.temporal_tol, ou.b, ou.r0, workers=args.workers)
    out = Path(args.out_dir)
    csv_path = _output(cfg, out, "csv", f"{cfg.name}_sweep.csv")
    svg_path = _output(cfg, out, "svg", f"{cfg.name}_sweep.svg")
    fixed = f"a={fmt(ou.a)}" if s.axis == "xi" else f"xi={fmt(ou.xi)}"
    written = emit_figure(tables, csv_path, svg_path, title=f"temporal value, T={fmt(cfg.grid.horizon)}, {fixed}")
    for label, rows in tables.items():
        print(f"[{label}]")
        for r in rows:
            d = fmt(r.result.d_star) if r.result.finite else "inf"
            print(f"  {r.param_name}={fmt(r.param_value)}  d*={d}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aitlab", description="Delayed-insider portfolio experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, helptext in [
        ("validate", cmd_validate, "run the built-in identity checks"),
        ("compare", cmd_compare, "Monte Carlo vs closed forms; exit 1 on tolerance failure"),
        ("simulate", cmd_simulate, "Monte Carlo expected log-wealth for the configured strategy"),
        ("temporal-value", cmd_temporal_value, "delay at which the insider gain vanishes"),
        ("sweep", cmd_sweep, "temporal value along a parameter axis, CSV + SVG"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="experiment configuration file")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes (default 1)")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument("--out-dir", default=".", help="directory for CSV/SVG outputs (default .)")
        p.set_defaults(func=fn)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except InadmissibleModelError as exc:
        print(f"inadmissible model: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
