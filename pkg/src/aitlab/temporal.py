"""Temporal value of insider information: the delay at which gain and delay cost cancel."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .closed_forms import delta_v_single_delay, rate_delay_cost
from .grids import Curve, TimeGrid
from .models import HWParams, OUParams

BRACKET_EPS = 1e-12
MAX_ITER = 200
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class TemporalValueResult:
    kind: str  # "finite" | "infinite"
    d_star: float
    residual: float
    bracket: tuple[float, float]

    @property
    def finite(self) -> bool:
        return self.kind == "finite"


def _rate_terms(rate):
    if isinstance(rate, OUParams):
        return rate.a, rate.xi
    if isinstance(rate, HWParams):
        return rate.a, rate.theta
    raise TypeError(f"temporal value needs a Vasicek or Hull-White rate, got {type(rate).__name__}")


def gain_at_equal_delays(d: float, T: float, rate, sigma: Curve, grid: TimeGrid) -> float:
    """Insider gain when stock and rate share the delay ``d``."""
    a, diffusion = _rate_terms(rate)
    return delta_v_single_delay(T, d) - rate_delay_cost(T, d, a, diffusion, sigma, grid)


def temporal_value(T: float, rate, sigma: Curve, grid: TimeGrid, tol: float = DEFAULT_TOL) -> TemporalValueResult:
    """Root of the equal-delay gain on (0, T] by bisection, or infinite if the gain stays positive.

    The gain is strictly decreasing in d and blows up as d -> 0+, so a root
    exists iff the gain at d = T is nonpositive.
    """
    a, _ = _rate_terms(rate)
    if not a > 0:
        raise ValueError(f"mean-reversion rate must be positive, got {a}")
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")

    def f(d):
        return gain_at_equal_delays(d, T, rate, sigma, grid)

    lo, hi = BRACKET_EPS * T, T
    f_hi = f(hi)
    if f_hi > 0:
        return TemporalValueResult("infinite", math.inf, math.nan, (lo, hi))
    if abs(f_hi) <= tol:
        return TemporalValueResult("finite", hi, abs(f_hi), (lo, hi))
    f_lo = f(lo)
    if f_lo <= 0:
        # the gain reaches zero below the bracket floor
        return TemporalValueResult("finite", lo, abs(f_lo), (lo, hi))
    mid, f_mid = hi, f_hi
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) <= tol or hi - lo <= 4 * np.finfo(float).eps * hi:
            break
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    return TemporalValueResult("finite", mid, abs(f_mid), (BRACKET_EPS * T, T))


@dataclass(frozen=True)
class SweepRow:
    param_name: str
    param_value: float
    result: TemporalValueResult


def _sweep_point(args) -> SweepRow:
    axis, v, T, a, xi, sigma, grid, tol, b, r0 = args
    params = OUParams(a=v, b=b, xi=xi, r0=r0) if axis == "a" else OUParams(a=a, b=b, xi=v, r0=r0)
    return SweepRow(axis, v, temporal_value(T, params, sigma, grid, tol))


def sweep(axis: str, values: Sequence[float], T: float, a: float, xi: float, sigma: Curve,
          grid: TimeGrid, tol: float = DEFAULT_TOL, b: float = 0.05, r0: float = 0.05,
          workers: int = 1) -> list[SweepRow]:
    """Temporal value along ``a`` or ``xi`` with the other held fixed (Vasicek rate).

    Rows are independent and may be spread over ``workers`` processes.
    """
    if axis not in ("a", "xi"):
        raise ValueError(f"sweep axis must be 'a' or 'xi', got {axis!r}")
    values = [float(v) for v in values]
    if any(v <= 0 for v in values) or any(b2 <= a2 for a2, b2 in zip(values, values[1:])):
        raise ValueError("sweep values must be positive and strictly increasing")
    tasks = [(axis, v, T, a, xi, sigma, grid, tol, b, r0) for v in values]
    if workers <= 1 or len(tasks) <= 1:
        return [_sweep_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_point, tasks))


def write_sweep_csv(rows: Sequence[SweepRow], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["param_name", "param_value", "d_star_or_inf", "residual"])
        for row in rows:
            r = row.result
            writer.writerow([row.param_name, repr(row.param_value),
                             repr(r.d_star) if r.finite else "inf",
                             repr(r.residual) if r.finite else "nan"])
    return path


def emit_figure(tables: Mapping[str, Sequence[SweepRow]], csv_path, svg_path,
                title: Optional[str] = None) -> list[Path]:
    """CSV per series plus one self-contained SVG; infinite values appear as gaps."""
    if not tables or not any(tables.values()):
        raise ValueError("nothing to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    csv_path = Path(csv_path)
    if len(tables) == 1:
        written.append(write_sweep_csv(next(iter(tables.values())), csv_path))
    else:
        for label, rows in tables.items():
            safe = "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in label)
            written.append(write_sweep_csv(rows, csv_path.with_name(f"{csv_path.stem}_{safe}{csv_path.suffix}")))

    fig, ax = plt.subplots(figsize=(5, 3.5))
    param_name = None
    for label, rows in tables.items():
        x = np.array([r.param_value for r in rows])
        y = np.array([r.result.d_star if r.result.finite else np.nan for r in rows])
        param_name = rows[0].param_name if rows else param_name
        ax.plot(x, y, marker="o" if len(rows) == 1 else None, label=label)
    ax.set_xlabel(param_name or "parameter")
    ax.set_ylabel("d*")
    if title:
        ax.set_title(title)
    if len(tables) > 1:
        ax.legend()
    fig.tight_layout()
    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.fonttype": "path"}):
        fig.savefig(svg_path, format="svg")
    plt.close(fig)
    written.append(svg_path)
    return written
