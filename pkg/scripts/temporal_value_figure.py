"""Temporal value d* along a (xi = 1) and along xi (a = 1) for sigma in {0.1, 0.2, 0.5}.

Usage: python3 scripts/temporal_value_figure.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from aitlab.grids import Curve, TimeGrid
from aitlab.temporal import emit_figure, sweep

T = 1.0
SIGMAS = (0.1, 0.2, 0.5)


def main(out_dir="figures"):
    out = Path(out_dir)
    grid = TimeGrid(T, 1000)
    values = np.linspace(0.05, 5.0, 100)
    panels = {"a": dict(a=1.0, xi=1.0, title="xi = 1"), "xi": dict(a=1.0, xi=1.0, title="a = 1")}
    for axis, p in panels.items():
        tables = {f"sigma={s}": sweep(axis, values, T, p["a"], p["xi"], Curve.constant(s), grid)
                  for s in SIGMAS}
        for path in emit_figure(tables, out / f"temporal_value_{axis}.csv", out / f"temporal_value_{axis}.svg",
                                title=f"temporal value, T = {T}, {p['title']}"):
            print("wrote", path)


if __name__ == "__main__":
    main(*sys.argv[1:])
