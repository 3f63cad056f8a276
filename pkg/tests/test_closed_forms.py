import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aitlab.closed_forms import (
    closed_form_report,
    delta_v_single_delay,
    rate_delay_cost,
    two_delay_difference,
    two_delay_difference_hw,
    v_merton_bsm,
    v_merton_heston,
    v_merton_vasicek,
)
from aitlab.grids import Curve, TimeGrid
from aitlab.models import CIRParams, CIRRate, HWParams, InadmissibleModelError, OUParams, Vasicek
from aitlab.strategies import DelaySpec

c = Curve.constant
GRID = TimeGrid(1.0, 1000)


@pytest.mark.parametrize("d,target", [(0.1, 1.2013), (0.25, 0.8181), (0.5, 0.5966), (1.0, 0.5)])
def test_single_delay_gain_values(d, target):
    assert delta_v_single_delay(1.0, d) == pytest.approx(target, abs=5e-5)


def test_single_delay_gain_domain():
    for d in (0.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            delta_v_single_delay(1.0, d)


@settings(max_examples=50)
@given(st.floats(0.01, 10), st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_gain_decreases_with_delay_and_stays_above_half(T, u, v):
    d1, d2 = sorted((u * T, v * T))
    g1, g2 = delta_v_single_delay(T, d1), delta_v_single_delay(T, d2)
    assert g1 >= g2 - 1e-12
    assert g2 >= 0.5 - 1e-12


def test_bsm_merton_value():
    assert v_merton_bsm(c(0.08), c(0.02), c(0.2), GRID) == pytest.approx(0.5 * 0.06**2 / 0.04 + 0.02)


def test_vasicek_value_with_frozen_rate():
    ou = OUParams(1.0, 0.05, 0.0, 0.05)
    assert v_merton_vasicek(c(0.08), c(0.2), ou, GRID) == pytest.approx(0.5 * 0.03**2 / 0.04 + 0.05, abs=1e-12)


def _analytic_cost(T, d, a, xi, s):
    e = 1 - math.exp(-2 * a * d)
    return xi**2 / (4 * a * s**2) * (d - e / (2 * a) + (T - d) * e)


@pytest.mark.parametrize("d", [0.3, 0.3137, 1.0])
def test_rate_delay_cost_matches_analytic_integral(d):
    got = rate_delay_cost(1.0, d, 1.0, 0.1, c(0.2), GRID)
    assert got == pytest.approx(_analytic_cost(1.0, d, 1.0, 0.1, 0.2), rel=1e-6)


def test_rate_delay_cost_vanishes_without_delay_or_noise():
    assert rate_delay_cost(1.0, 0.0, 1.0, 0.1, c(0.2), GRID) == 0.0
    assert rate_delay_cost(1.0, 0.4, 1.0, 0.0, c(0.2), GRID) == 0.0


def test_rate_delay_cost_nondecreasing_in_delay():
    costs = [rate_delay_cost(1.0, d, 1.0, 0.5, c(0.2), GRID) for d in np.linspace(0, 1, 21)]
    assert np.all(np.diff(costs) >= -1e-14)


def test_two_delay_difference_sign_flips_with_large_noise():
    small = two_delay_difference(1.0, 0.3, 0.3, OUParams(1.0, 0.05, 0.1, 0.03), c(0.2), GRID)
    large = two_delay_difference(1.0, 0.3, 0.3, OUParams(1.0, 0.05, 2.0, 0.03), c(0.2), GRID)
    assert small > 0 > large
    assert small == pytest.approx(delta_v_single_delay(1, 0.3) - _analytic_cost(1, 0.3, 1, 0.1, 0.2), rel=1e-6)


def test_hull_white_two_delay_uses_same_variance_shape():
    ou = OUParams(1.0, 0.05, 0.3, 0.03)
    hw = HWParams(c(0.05), 1.0, 0.3, 0.03)
    assert two_delay_difference_hw(1.0, DelaySpec(0.3, 0.2), hw, c(0.2), GRID) == pytest.approx(
        two_delay_difference(1.0, 0.3, 0.2, ou, c(0.2), GRID))


def test_piecewise_sigma_knots_become_nodes():
    sigma = Curve.piecewise_linear([(0, 0.2), (0.37, 0.3), (1.0, 0.25)])
    coarse = rate_delay_cost(1.0, 0.5, 1.0, 0.1, sigma, TimeGrid(1.0, 100))
    fine = rate_delay_cost(1.0, 0.5, 1.0, 0.1, sigma, TimeGrid(1.0, 4000))
    assert coarse == pytest.approx(fine, rel=1e-4)


def test_heston_value_refused_without_finite_inverse_moment():
    with pytest.raises(InadmissibleModelError, match="which is finite provided"):
        v_merton_heston(c(0.08), c(0.02), CIRParams(1, 0.03, 0.2, 0.04), TimeGrid(1.0, 10), 100, 0)


def test_heston_value_with_small_vol_of_vol():
    # eta -> 0: V is deterministic and the value is the BSM one with sigma^2 = V(t)
    p = CIRParams(2.0, 0.04, 1e-4, 0.04)
    v, se = v_merton_heston(c(0.08), c(0.02), p, TimeGrid(1.0, 50), 200, 0)
    assert v == pytest.approx(0.5 * 0.06**2 / 0.04 + 0.02, rel=1e-4)


def test_report_has_no_cir_two_delay_closed_form():
    model = CIRRate(c(0.08), c(0.2), CIRParams(1.0, 0.05, 0.1, 0.03))
    rep = closed_form_report(model, DelaySpec(0.3, 0.2), TimeGrid(1.0, 50))
    assert rep.delta_v is None and rep.v_ait is None
    rep = closed_form_report(model, DelaySpec(0.3), TimeGrid(1.0, 50))
    assert rep.delta_v == pytest.approx(delta_v_single_delay(1.0, 0.3))


def test_report_vasicek_two_delay():
    model = Vasicek(c(0.08), c(0.2), OUParams(1.0, 0.05, 0.1, 0.03))
    rep = closed_form_report(model, DelaySpec(0.3, 0.3), GRID)
    assert rep.v_ait == pytest.approx(rep.v_merton + rep.delta_v)
    assert "equal" in rep.provenance
