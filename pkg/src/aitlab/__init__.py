"""Numerical lab for delayed insider portfolios: closed forms, anticipating Monte Carlo, temporal value."""

from .closed_forms import closed_form_report, delta_v_single_delay, two_delay_difference
from .config import ConfigError, ExperimentConfig, dump_config, load_config, parse_config
from .engine import mc_delta_v, mc_expected_log_wealth, mc_forward_alpha_integral, simulate_log_wealth
from .grids import Curve, TimeGrid, integrate
from .models import (
    BlackScholes,
    CIRParams,
    CIRRate,
    Heston,
    HullWhite,
    HWParams,
    InadmissibleModelError,
    OUParams,
    Vasicek,
)
from .strategies import DelaySpec, MeasurabilityError, ait_strategy, merton_strategy
from .temporal import sweep, temporal_value

__version__ = "0.1.0"
