"""Insider gain with stock and rate both delayed by d, as the rate noise xi grows.

Closed form only (fast); prints where the gain changes sign.
Usage: python3 scripts/two_delay_sign.py [d]
"""

import sys

import numpy as np

from aitlab.closed_forms import two_delay_difference
from aitlab.grids import Curve, TimeGrid
from aitlab.models import OUParams


def main(d="0.3"):
    d = float(d)
    grid = TimeGrid(1.0, 1000)
    prev = None
    print("xi,gain")
    for xi in np.linspace(0.0, 2.0, 41):
        gain = two_delay_difference(1.0, d, d, OUParams(1.0, 0.05, xi, 0.03), Curve.constant(0.2), grid)
        print(f"{xi:.2f},{gain:.6f}")
        if prev is not None and prev > 0 >= gain:
            print(f"# gain turns negative between xi={xi - 0.05:.2f} and xi={xi:.2f}")
        prev = gain


if __name__ == "__main__":
    main(*sys.argv[1:])
