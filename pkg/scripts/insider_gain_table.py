"""Monte Carlo insider gain against d/2T + ln(T/d)/2 in three market models.

Usage: python3 scripts/insider_gain_table.py [n_paths] [seed] [workers]
"""

import sys

from aitlab.closed_forms import delta_v_single_delay
from aitlab.engine import mc_delta_v_many
from aitlab.grids import Curve, TimeGrid
from aitlab.models import BlackScholes, CIRParams, Heston, OUParams, Vasicek
from aitlab.strategies import DelaySpec

c = Curve.constant
MODELS = {
    "bsm": BlackScholes(c(0.08), c(0.02), c(0.2)),
    "heston": Heston(c(0.08), c(0.02), CIRParams(2.0, 0.04, 0.2, 0.04)),
    "vasicek": Vasicek(c(0.08), c(0.2), OUParams(1.0, 0.05, 0.1, 0.03)),
}
DELAYS = (0.1, 0.25, 0.5, 1.0)


def main(n_paths="20000", seed="20240917", workers="1"):
    grid = TimeGrid(1.0, 1000)
    print("model,d,mc_mean,std_error,closed_form,z")
    for name, model in MODELS.items():
        ests = mc_delta_v_many(model, [DelaySpec(d) for d in DELAYS], grid, int(n_paths), int(seed), int(workers))
        for d, est in zip(DELAYS, ests):
            target = delta_v_single_delay(1.0, d)
            print(f"{name},{d},{est.mean:.6f},{est.std_error:.6f},{target:.6f},{est.z_score(target):.2f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
