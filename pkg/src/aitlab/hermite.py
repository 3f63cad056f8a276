"""Hermite polynomials, Wick powers of Gaussian windows and the conditional Donsker density.

Wick powers are realized pathwise: for a Gaussian variable with standard
deviation ``norm`` and realized value ``x``, the n-th Wick power equals
``norm**n * h_n(x / norm)`` where ``h_n`` is the probabilists' Hermite polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

MAX_ORDER = 64


@dataclass(frozen=True)
class SmoothedWhiteNoise:
    """A realized Gaussian window: value = shift + centered part, variance norm**2."""

    norm: float
    realized_value: float
    shift: float = 0.0

    def __post_init__(self):
        if not self.norm > 0:
            raise ValueError(f"norm must be positive, got {self.norm}")

    @property
    def normalized(self) -> float:
        return self.realized_value / self.norm


def hermite(n: int, x):
    """Probabilists' Hermite polynomial h_n(x) via h_{n+1} = x h_n - n h_{n-1}."""
    if n < 0 or int(n) != n:
        raise ValueError(f"order must be a nonnegative integer, got {n}")
    if n > MAX_ORDER:
        raise ValueError(f"order {n} exceeds the supported maximum {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), x.copy()
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    for k in range(1, n):
        h_prev, h = h, x * h - k * h_prev
    if not np.all(np.isfinite(h)):
        raise OverflowError(f"h_{n} overflows at x={x}")
    return h if h.ndim else float(h)


def gaussian_expectation(fn, n_nodes: int = 64):
    """E[fn(Z)], Z standard normal, by Gauss-Hermite quadrature (exact for polynomials of degree < 2*n_nodes)."""
    nodes, weights = hermegauss(n_nodes)
    return np.sum(weights * fn(nodes)) / math.sqrt(2 * math.pi)


def wick_power(w: SmoothedWhiteNoise, n: int) -> float:
    """n-th Wick power of the window, ||phi||^n h_n(value / ||phi||)."""
    try:
        h = hermite(n, w.normalized)
    except OverflowError as exc:
        raise OverflowError(f"Wick power of order {n} overflows: {exc}") from None
    out = w.norm**n * h
    if not math.isfinite(out):
        raise OverflowError(f"Wick power overflows at order {n} (norm={w.norm}, value={w.realized_value})")
    return float(out)


def shifted_wick_power(w: SmoothedWhiteNoise, n: int) -> float:
    """Wick power of a non-centered window by binomial expansion in the shift.

    (shift + omega)^{<>n} = sum_k C(n, k) shift^k omega^{<>(n-k)}, where omega is
    the centered part ``realized_value - shift``.
    """
    centered = SmoothedWhiteNoise(w.norm, w.realized_value - w.shift)
    return float(sum(math.comb(n, k) * w.shift**k * wick_power(centered, n - k) for k in range(n + 1)))


def wick_power_recurrence_check(w: SmoothedWhiteNoise, n: int) -> float:
    """Relative residual of omega^{<>(n+1)} = omega * omega^{<>n} - n ||phi||^2 omega^{<>(n-1)}."""
    if n < 1:
        raise ValueError("recurrence needs n >= 1")
    lhs = wick_power(w, n + 1)
    first = w.realized_value * wick_power(w, n)
    second = n * w.norm**2 * wick_power(w, n - 1)
    # relative to the largest term, so cancellation to ~0 stays well defined
    scale = max(abs(lhs), abs(first), abs(second))
    return 0.0 if scale == 0 else abs(lhs - (first - second)) / scale


def donsker_conditional_density(g, b_delayed, s: float, T: float):
    """Density of B(T) at g given B(s) = b_delayed (conditional Donsker delta, ordinary form)."""
    if not 0 <= s < T:
        raise ValueError(f"need 0 <= s < T, got s={s}, T={T}")
    var = T - s
    return np.exp(-((np.asarray(g) - b_delayed) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)


def _wick_odd_gaussian_series(y: float, c2: float, max_order: int = 2000) -> float:
    # omega <> exp<>(-omega<>2 / 2) = sum_k (-1/2)^k / k! omega^{<>(2k+1)},
    # omega^{<>n} advanced with the scaled Hermite recurrence (no division by the norm)
    h_prev, h = 1.0, y
    total, coef, n, k = y, 1.0, 1, 0
    while n < max_order:
        h_prev, h = h, y * h - n * c2 * h_prev
        n += 1
        h_prev, h = h, y * h - n * c2 * h_prev
        n += 1
        k += 1
        coef *= -0.5 / k
        term = coef * h
        total += term
        if k > 3 and abs(term) <= 1e-17 * abs(total):
            return total
        if not math.isfinite(total):
            break
    raise ArithmeticError(f"Wick series did not converge for y={y}, c2={c2}")


def wick_vs_ordinary_exp_check(y: float, c2: float) -> float:
    """Relative residual between the Wick-series and ordinary-product forms.

    Left side: the Wick product omega <> exp<>(-omega<>2/2) summed as a Wick power
    series. Right side: omega * E[exp(-(y + i c Z)^2 / 2)] / (1 - c^2) with the
    Gaussian expectation in closed form.
    """
    if c2 == 1:
        raise ValueError("variance ratio 1 is degenerate: the ordinary product vanishes")
    if not 0 <= c2 < 1:
        raise ValueError(f"variance ratio must lie in [0, 1), got {c2}")
    lhs = _wick_odd_gaussian_series(float(y), float(c2))
    gauss = (1 - c2) ** -0.5 * math.exp(-(y**2) / (2 * (1 - c2)))
    rhs = y * gauss / (1 - c2)
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0 else abs(lhs - rhs) / scale
