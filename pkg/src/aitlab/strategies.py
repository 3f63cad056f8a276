"""Portfolio rules for the traditional (Merton) trader and the delayed insider.

The insider knows G = B(T) but reads the stock path with delay ``d_stock``
and, in the short-rate models, the rate path with delay ``d_rate``.
Strategies see paths only through :class:`InformationView`, which refuses
reads outside the trader's filtration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .grids import Curve, TimeGrid, volatility_floor_check
from .models import (
    SHORT_RATE_MODELS,
    BlackScholes,
    Heston,
    HullWhite,
    HWParams,
    MarketModel,
    PathBundle,
    RateParams,
    _hw_drift_integral,
    rate_conditional_mean,
)


class MeasurabilityError(RuntimeError):
    """A strategy tried to read information it does not have at that time."""


@dataclass(frozen=True)
class DelaySpec:
    d_stock: float
    d_rate: float = 0.0

    def validate(self, horizon: float) -> "DelaySpec":
        if not 0 < self.d_stock <= horizon:
            raise ValueError(f"d_stock must lie in (0, {horizon}], got {self.d_stock}")
        if not 0 <= self.d_rate <= horizon:
            raise ValueError(f"d_rate must lie in [0, {horizon}], got {self.d_rate}")
        return self


@dataclass(frozen=True)
class InsiderInfo:
    """Insider datum; only the terminal Brownian value is supported."""

    kind: str = "terminal_brownian"

    def __post_init__(self):
        if self.kind != "terminal_brownian":
            raise ValueError(f"unsupported insider information {self.kind!r}")

    def realize(self, bundle: PathBundle) -> np.ndarray:
        return bundle.b_terminal


# --------------------------------------------------------------------------- scalar rules


def alpha_from_lag(g, b_lag, lag_time, T):
    """Divergence for G = B(T) when B is known up to ``lag_time``."""
    return (np.asarray(g) - b_lag) / (T - np.asarray(lag_time))


def alpha_d(t, g, b_delayed, T: float, d: float):
    """(g - B((t-d)^+)) / (T - (t-d)^+)."""
    if not d > 0:
        raise ValueError(f"delay must be positive, got {d}")
    return alpha_from_lag(g, b_delayed, np.maximum(np.asarray(t) - d, 0.0), T)


def _sigma_at(sigma: Curve, t, floor: Optional[float] = None):
    s = np.asarray(sigma(t), dtype=float)
    floor = floor if floor is not None else sigma.floor
    if np.any(s <= 0) or (floor is not None and np.any(s < floor)):
        raise ValueError(f"volatility {np.min(s)} violates floor {floor or 0}")
    return s


def merton_bsm(mu: Curve, rho: Curve, sigma: Curve, t, floor: Optional[float] = None):
    s = _sigma_at(sigma, t, floor)
    return (mu(t) - rho(t)) / s**2


def ait_bsm(t, g, b_delayed, mu: Curve, rho: Curve, sigma: Curve, T: float, d: float):
    return merton_bsm(mu, rho, sigma, t) + alpha_d(t, g, b_delayed, T, d) / _sigma_at(sigma, t)


def merton_heston(mu: Curve, rho: Curve, v_t, t):
    v_t = np.asarray(v_t, dtype=float)
    if np.any(v_t <= 0):
        raise ValueError("nonpositive variance: the variance sampler is broken")
    return (mu(t) - rho(t)) / v_t


def ait_heston(t, g, b_delayed, mu: Curve, rho: Curve, v_t, T: float, d: float):
    return merton_heston(mu, rho, v_t, t) + alpha_d(t, g, b_delayed, T, d) / np.sqrt(v_t)


def merton_vasicek(mu: Curve, sigma: Curve, r_t, t):
    return (mu(t) - np.asarray(r_t)) / _sigma_at(sigma, t) ** 2


def ait_vasicek(t, g, b_delayed, mu: Curve, sigma: Curve, r_t, T: float, d: float):
    return merton_vasicek(mu, sigma, r_t, t) + alpha_d(t, g, b_delayed, T, d) / _sigma_at(sigma, t)


def ait_two_delay(t, g, b_delayed, r_delayed, rate: RateParams, mu: Curve, sigma: Curve,
                  T: float, delays: DelaySpec):
    """Insider rule when both the stock and the rate are observed late.

    ``r_delayed`` is the rate at (t - d_rate)^+; the rate enters through its
    conditional mean given that observation.
    """
    s = max(float(t) - delays.d_rate, 0.0)
    expected_rate = rate_conditional_mean(rate, s, float(t), r_delayed)
    return merton_vasicek(mu, sigma, expected_rate, t) + alpha_d(t, g, b_delayed, T, delays.d_stock) / _sigma_at(sigma, t)


# --------------------------------------------------------------------------- information access


class InformationView:
    """Path data restricted to what the trader knows at each left grid point t_i.

    Stock path: B(t_j) readable at step i iff t_j <= (t_i - d_stock)^+.
    State (variance or rate): readable iff t_j <= (t_i - d_rate)^+.
    """

    def __init__(self, bundle: PathBundle, state: Optional[np.ndarray],
                 delays: Optional[DelaySpec], insider: Optional[InsiderInfo]):
        grid = bundle.grid
        self.grid = grid
        self._bundle = bundle
        self._state = state
        steps = np.arange(grid.n_steps)
        self.b_lag = grid.lag_indices(delays.d_stock) if delays else steps
        self.state_lag = grid.lag_indices(delays.d_rate) if delays else steps
        self._g = insider.realize(bundle) if insider else None

    @property
    def g(self) -> np.ndarray:
        if self._g is None:
            raise MeasurabilityError("the traditional trader has no insider information")
        return self._g

    def read_b(self, steps, indices) -> np.ndarray:
        steps, indices = np.broadcast_arrays(np.asarray(steps), np.asarray(indices))
        if np.any(indices > self.b_lag[steps]):
            bad = int(np.flatnonzero((indices > self.b_lag[steps]).ravel())[0])
            raise MeasurabilityError(
                f"stock path read at index {indices.ravel()[bad]} from step {steps.ravel()[bad]}; "
                f"only indices <= {self.b_lag[steps].ravel()[bad]} are known"
            )
        return self._bundle.b_values[:, indices]

    def read_state(self, steps, indices) -> np.ndarray:
        if self._state is None:
            raise MeasurabilityError("this model has no stochastic state")
        steps, indices = np.broadcast_arrays(np.asarray(steps), np.asarray(indices))
        if np.any(indices > self.state_lag[steps]):
            bad = int(np.flatnonzero((indices > self.state_lag[steps]).ravel())[0])
            raise MeasurabilityError(
                f"state read at index {indices.ravel()[bad]} from step {steps.ravel()[bad]}; "
                f"only indices <= {self.state_lag[steps].ravel()[bad]} are known"
            )
        return self._state[:, indices]

    def b_delayed(self):
        """(values, times) of B at the latest known time, for every step."""
        steps = np.arange(self.grid.n_steps)
        return self.read_b(steps, self.b_lag), self.grid.points[self.b_lag]

    def state_delayed(self):
        steps = np.arange(self.grid.n_steps)
        return self.read_state(steps, self.state_lag), self.grid.points[self.state_lag]


# --------------------------------------------------------------------------- strategies


@lru_cache(maxsize=64)
def _hw_lagged_drift(p: HWParams, grid: TimeGrid, d_rate: float) -> np.ndarray:
    pts = grid.points
    lags = pts[grid.lag_indices(d_rate)]
    return np.array([_hw_drift_integral(p, s, t) for s, t in zip(lags, pts[:-1])])


def _expected_rate(rate: RateParams, grid: TimeGrid, d_rate: float, r_lag, lag_times):
    t = grid.left_points
    if isinstance(rate, HWParams):
        return r_lag * np.exp(-rate.a * (t - lag_times)) + _hw_lagged_drift(rate, grid, d_rate)
    return rate_conditional_mean(rate, lag_times, t, r_lag)


@dataclass(frozen=True)
class Strategy:
    """Portfolio rule pi(t_i) for one trader type in one market model.

    ``divergence`` maps (g, B at lag, lag time, T) to the insider correction; the
    default is the closed form for G = B(T). Another insider datum can be plugged
    in here, its admissibility is the caller's responsibility.
    """

    label: str
    model: MarketModel
    delays: Optional[DelaySpec] = None
    insider: InsiderInfo = field(default_factory=InsiderInfo)
    divergence: Callable = alpha_from_lag

    def __post_init__(self):
        if self.label not in ("merton", "ait"):
            raise ValueError(f"strategy label must be 'merton' or 'ait', got {self.label!r}")
        if self.label == "ait":
            if self.delays is None:
                raise ValueError("the insider strategy needs delays")
            if self.delays.d_rate and not isinstance(self.model, SHORT_RATE_MODELS):
                raise ValueError(f"d_rate applies only to short-rate models, not {self.model.kind}")

    def view(self, bundle: PathBundle, state) -> InformationView:
        if self.label == "merton":
            return InformationView(bundle, state, None, None)
        return InformationView(bundle, state, self.delays.validate(bundle.grid.horizon), self.insider)

    def volatility(self, view: InformationView):
        """Stock volatility at the left points, shape broadcastable to (paths, steps)."""
        t = view.grid.left_points
        if isinstance(self.model, Heston):
            v_now = view.read_state(np.arange(view.grid.n_steps), np.arange(view.grid.n_steps))
            return np.sqrt(v_now)
        return _sigma_at(self.model.sigma, t)[None, :]

    def __call__(self, view: InformationView) -> np.ndarray:
        m = self.model
        grid = view.grid
        t = grid.left_points
        n = grid.n_steps
        if isinstance(m, BlackScholes):
            pi = merton_bsm(m.mu, m.rho, m.sigma, t)[None, :]
        elif isinstance(m, Heston):
            v_now = view.read_state(np.arange(n), np.arange(n))
            pi = merton_heston(m.mu, m.rho, v_now, t[None, :])
        else:
            if self.label == "merton":
                r_est = view.read_state(np.arange(n), np.arange(n))
            else:
                r_lag, lag_times = view.state_delayed()
                r_est = _expected_rate(m.rate, grid, self.delays.d_rate, r_lag, lag_times)
            pi = merton_vasicek(m.mu, m.sigma, r_est, t[None, :])
        if self.label == "merton":
            return np.broadcast_to(pi, (view._bundle.n_paths, n)).copy()
        b_lag, lag_times = view.b_delayed()
        alpha = self.divergence(view.g[:, None], b_lag, lag_times[None, :], grid.horizon)
        return pi + alpha / self.volatility(view)


def merton_strategy(model: MarketModel) -> Strategy:
    return Strategy("merton", model)


def ait_strategy(model: MarketModel, delays: DelaySpec) -> Strategy:
    return Strategy("ait", model, delays)
