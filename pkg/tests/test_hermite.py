import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aitlab.hermite import (
    SmoothedWhiteNoise,
    donsker_conditional_density,
    gaussian_expectation,
    hermite,
    shifted_wick_power,
    wick_power,
    wick_power_recurrence_check,
    wick_vs_ordinary_exp_check,
)


def test_low_order_hermite_values():
    x = np.linspace(-3, 3, 13)
    assert np.allclose(hermite(0, x), 1)
    assert np.allclose(hermite(2, x), x**2 - 1)
    assert np.allclose(hermite(3, x), x**3 - 3 * x)
    assert np.allclose(hermite(4, x), x**4 - 6 * x**2 + 3)


def test_orthogonality():
    for n in range(9):
        for m in range(9):
            e = gaussian_expectation(lambda x: hermite(n, x) * hermite(m, x))
            assert abs(e - (math.factorial(n) if n == m else 0)) < 1e-8


def test_hermite_rejects_bad_orders():
    with pytest.raises(ValueError):
        hermite(-1, 0.0)
    with pytest.raises(ValueError):
        hermite(65, 0.0)


def test_wick_square_is_centered_square():
    w = SmoothedWhiteNoise(norm=0.5, realized_value=1.3)
    assert wick_power(w, 2) == pytest.approx(1.3**2 - 0.25)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-5, 5), st.integers(1, 10))
def test_recurrence_residual_small(norm, value, n):
    assert wick_power_recurrence_check(SmoothedWhiteNoise(norm, value), n) < 1e-10


def test_wick_power_has_zero_mean():
    for n in range(1, 7):
        e = gaussian_expectation(lambda z: 0.7**n * hermite(n, z))
        assert abs(e) < 1e-12


def test_shift_zero_reduces_to_plain_wick_power():
    w = SmoothedWhiteNoise(0.8, 0.3)
    for n in range(6):
        assert shifted_wick_power(w, n) == pytest.approx(wick_power(w, n))


def test_shifted_wick_power_matches_direct_evaluation():
    # (a + omega)^{<>2} = a^2 + 2 a omega + omega^{<>2}
    w = SmoothedWhiteNoise(0.6, 1.1, shift=0.4)
    omega = 1.1 - 0.4
    assert shifted_wick_power(w, 2) == pytest.approx(0.16 + 2 * 0.4 * omega + omega**2 - 0.36)


@pytest.mark.parametrize("y", np.linspace(-2, 2, 9))
@pytest.mark.parametrize("c2", [0.0, 0.1, 0.3, 0.6])
def test_wick_vs_ordinary_exponential(y, c2):
    assert wick_vs_ordinary_exp_check(y, c2) < 1e-10


def test_wick_vs_ordinary_rejects_degenerate_ratio():
    with pytest.raises(ValueError, match="degenerate"):
        wick_vs_ordinary_exp_check(0.5, 1.0)
    with pytest.raises(ValueError):
        wick_vs_ordinary_exp_check(0.5, 1.5)


def test_donsker_density_integrates_to_one():
    g = np.linspace(-15, 15, 30001)
    for s in (0.0, 0.5, 0.99):
        assert np.trapezoid(donsker_conditional_density(g, 0.2, s, 1.0), g) == pytest.approx(1, abs=1e-6)


def test_donsker_density_rejects_s_at_horizon():
    with pytest.raises(ValueError):
        donsker_conditional_density(0.0, 0.0, 1.0, 1.0)


def test_nonpositive_norm_rejected():
    with pytest.raises(ValueError):
        SmoothedWhiteNoise(0.0, 1.0)
