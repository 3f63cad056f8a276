"""Closed-form expected log-utilities, used as oracles for the Monte Carlo engine."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grids import Curve, TimeGrid, integrate
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
    RateParams,
    Vasicek,
    cir_exact_path,
    rate_moments,
)
from .strategies import DelaySpec


def delta_v_single_delay(T: float, d: float) -> float:
    """Insider gain in expected log-wealth with one delayed flow: d/(2T) + ln(T/d)/2."""
    if not 0 < d <= T:
        raise ValueError(f"delay must lie in (0, {T}], got {d}")
    return d / (2 * T) + 0.5 * math.log(T / d)


def v_merton_bsm(mu: Curve, rho: Curve, sigma: Curve, grid: TimeGrid) -> float:
    t = grid.points
    s = np.asarray(sigma(t), dtype=float)
    if np.any(s <= 0):
        raise ValueError("volatility must stay positive")
    excess = np.asarray(mu(t)) - np.asarray(rho(t))
    return integrate(0.5 * excess**2 / s**2 + rho(t), grid)


def _require_inverse_moment(cir: CIRParams) -> None:
    if not cir.inverse_moment_finite:
        raise InadmissibleModelError(
            "the traditional Heston value needs E[1/V(t)], which is finite provided "
            f"kappa*theta >= eta^2; got {cir.kappa * cir.theta:g} < {cir.eta**2:g}"
        )


def v_merton_heston(mu: Curve, rho: Curve, cir: CIRParams, grid: TimeGrid, n_paths: int,
                    seed: int) -> tuple[float, float]:
    """(value, standard error): E[1/V(t)] comes from exact variance paths shared across t."""
    _require_inverse_moment(cir)
    t = grid.points
    half_sq_excess = 0.5 * (np.asarray(mu(t)) - np.asarray(rho(t))) ** 2
    rho_part = integrate(rho, grid)
    per_path = np.empty(n_paths)
    for start in range(0, n_paths, 1000):
        paths = range(start, min(start + 1000, n_paths))
        v = cir_exact_path(cir, grid, seed, paths)
        per_path[start:start + len(paths)] = np.trapezoid(half_sq_excess / v, t, axis=1)
    value = float(np.sum(per_path) / n_paths) + rho_part
    se = float(np.std(per_path, ddof=1) / math.sqrt(n_paths))
    return value, se


def v_merton_short_rate(mu: Curve, sigma: Curve, rate: RateParams, grid: TimeGrid) -> float:
    """Integral of E[(mu - R)^2] / (2 sigma^2) + E[R] from the rate's first two moments."""
    t = grid.points
    moments = np.array([rate_moments(rate, float(s)) for s in t])
    mean, second = moments[:, 0], moments[:, 1]
    m = np.asarray(mu(t), dtype=float)
    s = np.asarray(sigma(t), dtype=float)
    if np.any(s <= 0):
        raise ValueError("volatility must stay positive")
    excess_sq = m**2 - 2 * m * mean + second
    return integrate(excess_sq / (2 * s**2) + mean, grid)


def v_merton_vasicek(mu: Curve, sigma: Curve, ou: OUParams, grid: TimeGrid) -> float:
    return v_merton_short_rate(mu, sigma, ou, grid)


def _delay_cost_nodes(grid: TimeGrid, d_rate: float, sigma: Curve) -> np.ndarray:
    extra = [d_rate] + [k for k in sigma.times if 0 < k < grid.horizon]
    return np.unique(np.concatenate([grid.points, extra]))


def rate_delay_cost(T: float, d_rate: float, a: float, diffusion: float, sigma: Curve,
                    grid: TimeGrid) -> float:
    """(diffusion^2 / 4a) * integral of (1 - exp(-2a min(t, d_rate))) / sigma^2(t) over [0, T].

    The kink at t = d_rate is inserted as a quadrature node.
    """
    if abs(grid.horizon - T) > 1e-12 * T:
        raise ValueError(f"grid horizon {grid.horizon} differs from T={T}")
    if not 0 <= d_rate <= T:
        raise ValueError(f"d_rate must lie in [0, {T}], got {d_rate}")
    if not a > 0:
        raise ValueError(f"mean-reversion rate must be positive, got {a}")
    if diffusion == 0 or d_rate == 0:
        return 0.0
    nodes = _delay_cost_nodes(grid, d_rate, sigma)
    s = np.asarray(sigma(nodes), dtype=float)
    if np.any(s <= 0):
        raise ValueError("volatility must stay positive")
    integrand = -np.expm1(-2 * a * np.minimum(nodes, d_rate)) / s**2
    return diffusion**2 / (4 * a) * integrate(integrand, nodes)


def two_delay_difference(T: float, d_stock: float, d_rate: float, ou: OUParams, sigma: Curve,
                         grid: TimeGrid) -> float:
    """Insider gain when both the stock and the Vasicek rate are observed late (may be negative)."""
    return delta_v_single_delay(T, d_stock) - rate_delay_cost(T, d_rate, ou.a, ou.xi, sigma, grid)


def two_delay_difference_hw(T: float, delays: DelaySpec, hw: HWParams, sigma: Curve,
                            grid: TimeGrid) -> float:
    """Hull-White analogue: the conditional variance has the Vasicek form with theta for xi."""
    return (delta_v_single_delay(T, delays.d_stock)
            - rate_delay_cost(T, delays.d_rate, hw.a, hw.theta, sigma, grid))


@dataclass(frozen=True)
class ClosedFormReport:
    v_merton: float
    delta_v: Optional[float]
    provenance: str
    v_merton_se: float = 0.0

    @property
    def v_ait(self) -> Optional[float]:
        return None if self.delta_v is None else self.v_merton + self.delta_v


def closed_form_report(model: MarketModel, delays: DelaySpec, grid: TimeGrid,
                       n_paths: int = 10_000, seed: int = 0) -> ClosedFormReport:
    """Closed forms for a model/delay pair; ``delta_v`` is None where none exists (CIR rate, d_rate > 0)."""
    T = grid.horizon
    delays.validate(T)
    se = 0.0
    if isinstance(model, BlackScholes):
        v = v_merton_bsm(model.mu, model.rho, model.sigma, grid)
        return ClosedFormReport(v, delta_v_single_delay(T, delays.d_stock), "bsm: merton value, single-delay gain")
    if isinstance(model, Heston):
        v, se = v_merton_heston(model.mu, model.rho, model.variance, grid, n_paths, seed)
        return ClosedFormReport(v, delta_v_single_delay(T, delays.d_stock),
                                "heston: merton value with MC E[1/V], single-delay gain", se)
    v = v_merton_short_rate(model.mu, model.sigma, model.rate, grid)
    if delays.d_rate == 0:
        return ClosedFormReport(v, delta_v_single_delay(T, delays.d_stock),
                                f"{model.kind}: moment formula, single-delay gain")
    if isinstance(model, Vasicek):
        dv = two_delay_difference(T, delays.d_stock, delays.d_rate, model.rate, model.sigma, grid)
    elif isinstance(model, HullWhite):
        dv = two_delay_difference_hw(T, delays, model.rate, model.sigma, grid)
    else:
        assert isinstance(model, CIRRate)
        return ClosedFormReport(v, None, "cir_rate: no closed two-delay gain, Monte Carlo only")
    tag = "equal" if delays.d_rate == delays.d_stock else "composed unequal"
    return ClosedFormReport(v, dv, f"{model.kind}: two-delay gain ({tag} delays)")
