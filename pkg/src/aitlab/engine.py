"""Anticipating Monte Carlo: forward integrals, pathwise log-wealth and estimators.

Log-wealth is accumulated in the exponent of the explicit wealth solution::

    log X(T) = sum_i [rate + (mu - rate) pi_i - 0.5 vol^2 pi_i^2] dt + sum_i vol_i pi_i dB_i

with pi_i and the stochastic state held at the left point t_i of each step,
deterministic curves averaged by the trapezoid rule, and the stochastic
integral taken as the left-point (forward) Riemann sum.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grids import TimeGrid
from .models import (
    BlackScholes,
    Heston,
    MarketModel,
    PathBundle,
    check_admissible,
    needs_w,
    sample_brownian_pair,
    sample_state,
)
from .stats import McEstimate, summarize
from .strategies import DelaySpec, Strategy, alpha_from_lag, ait_strategy, merton_strategy

log = logging.getLogger(__name__)

PI_MAX = 1e6
BLOCK_SIZE = 1000
# key offset for the independent-paths comparison run
_INDEPENDENT_SEED_OFFSET = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class WealthExponent:
    drift_integral: np.ndarray
    stochastic_integral: np.ndarray
    clamped: int = 0

    @property
    def log_wealth(self) -> np.ndarray:
        return self.drift_integral + self.stochastic_integral


def forward_integral_left(phi, b_incr) -> np.ndarray:
    """Left-point Riemann sum sum_i phi(t_i) (B(t_{i+1}) - B(t_i)) along the last axis."""
    phi = np.asarray(phi, dtype=float)
    b_incr = np.asarray(b_incr, dtype=float)
    if phi.shape[-1] != b_incr.shape[-1]:
        raise ValueError(f"integrand has {phi.shape[-1]} steps but increments have {b_incr.shape[-1]}")
    if not np.all(np.isfinite(phi)):
        raise ValueError("forward integrand has non-finite values")
    return np.sum(phi * b_incr, axis=-1)


def _trapezoid_avg(curve, grid: TimeGrid) -> np.ndarray:
    v = np.asarray(curve(grid.points), dtype=float)
    return 0.5 * (v[:-1] + v[1:])


@dataclass
class _Coefficients:
    rate: np.ndarray
    mu: np.ndarray
    var: np.ndarray
    vol_left: np.ndarray


def _coefficients(model: MarketModel, grid: TimeGrid, state) -> _Coefficients:
    mu = _trapezoid_avg(model.mu, grid)[None, :]
    if isinstance(model, BlackScholes):
        rate = _trapezoid_avg(model.rho, grid)[None, :]
    elif isinstance(model, Heston):
        rate = _trapezoid_avg(model.rho, grid)[None, :]
    else:
        rate = state[:, :-1]
    if isinstance(model, Heston):
        var = state[:, :-1]
        vol_left = np.sqrt(var)
    else:
        var = _trapezoid_avg(lambda t: np.asarray(model.sigma(t)) ** 2, grid)[None, :]
        vol_left = np.asarray(model.sigma(grid.left_points), dtype=float)[None, :]
    return _Coefficients(rate, mu, var, vol_left)


def log_wealth(bundle: PathBundle, strategy: Strategy, model: MarketModel | None = None,
               state=None, pi_max: float = PI_MAX, coefficients: _Coefficients | None = None) -> WealthExponent:
    """Pathwise exponent of the terminal wealth (X(0) = 1) for every path in the bundle."""
    model = model or strategy.model
    grid = bundle.grid
    if state is None and not isinstance(model, BlackScholes):
        raise ValueError(f"{model.kind} needs its state paths sampled on the bundle grid")
    coef = coefficients or _coefficients(model, grid, state)
    pi = strategy(strategy.view(bundle, state))
    bad = ~np.isfinite(pi)
    if bad.any():
        row, step = (int(v[0]) for v in np.nonzero(bad))
        raise ValueError(f"non-finite portfolio at path {bundle.paths[row]}, step {step}")
    over = np.abs(pi) > pi_max
    clamped = int(over.sum())
    if clamped:
        log.warning("clamped %d portfolio values to |pi| <= %g", clamped, pi_max)
        pi = np.clip(pi, -pi_max, pi_max)
    drift = (coef.rate + (coef.mu - coef.rate) * pi - 0.5 * coef.var * pi**2) * grid.dt
    drift_integral = np.sum(drift, axis=1)
    stochastic = forward_integral_left(coef.vol_left * pi, bundle.b_incr)
    return WealthExponent(drift_integral, stochastic, clamped)


def _block(args):
    model, strategies, grid, seed, paths, pi_max = args
    bundle = sample_brownian_pair(grid, seed, paths, with_w=needs_w(model))
    state = sample_state(model, grid, seed, bundle)
    coef = _coefficients(model, grid, state)
    values = np.empty((len(strategies), len(paths)))
    clamped = np.zeros(len(strategies), dtype=np.int64)
    for k, strategy in enumerate(strategies):
        w = log_wealth(bundle, strategy, model, state, pi_max, coef)
        values[k] = w.log_wealth
        clamped[k] = w.clamped
    return values, clamped


def _blocks(n_paths: int, block_size: int):
    return [range(a, min(a + block_size, n_paths)) for a in range(0, n_paths, block_size)]


def _run_blocks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def simulate_log_wealth(model: MarketModel, strategies: Sequence[Strategy], grid: TimeGrid,
                        n_paths: int, seed: int, workers: int = 1, pi_max: float = PI_MAX,
                        block_size: int = BLOCK_SIZE):
    """Terminal log-wealth of every strategy on the same paths.

    Returns (values of shape (n_strategies, n_paths), clamp counts per strategy).
    Path p always uses the streams of (seed, p), and blocks have a fixed size, so
    the output does not depend on ``workers``.
    """
    check_admissible(model)
    if n_paths < 2:
        raise ValueError("need at least two paths")
    tasks = [(model, tuple(strategies), grid, seed, paths, pi_max)
             for paths in _blocks(n_paths, block_size)]
    results = _run_blocks(_block, tasks, workers)
    values = np.concatenate([r[0] for r in results], axis=1)
    clamped = np.sum([r[1] for r in results], axis=0)
    return values, clamped


def mc_expected_log_wealth(model: MarketModel, strategy: Strategy, grid: TimeGrid, n_paths: int,
                           seed: int, workers: int = 1, pi_max: float = PI_MAX) -> McEstimate:
    values, clamped = simulate_log_wealth(model, [strategy], grid, n_paths, seed, workers, pi_max)
    return summarize(values[0], seed, grid.n_steps, int(clamped[0]))


def mc_delta_v(model: MarketModel, delays: DelaySpec, grid: TimeGrid, n_paths: int, seed: int,
               workers: int = 1, pi_max: float = PI_MAX, common_random_numbers: bool = True) -> McEstimate:
    """E[log X^ait(T) - log X^merton(T)], both strategies driven by the same paths by default."""
    merton, ait = merton_strategy(model), ait_strategy(model, delays)
    if common_random_numbers:
        values, clamped = simulate_log_wealth(model, [merton, ait], grid, n_paths, seed, workers, pi_max)
        diff = values[1] - values[0]
    else:
        other = (seed + _INDEPENDENT_SEED_OFFSET) % (1 << 64)
        v_ait, c_ait = simulate_log_wealth(model, [ait], grid, n_paths, seed, workers, pi_max)
        v_mer, c_mer = simulate_log_wealth(model, [merton], grid, n_paths, other, workers, pi_max)
        diff = v_ait[0] - v_mer[0]
        clamped = np.array([c_mer[0], c_ait[0]])
    return summarize(diff, seed, grid.n_steps, int(np.sum(clamped)))


def mc_delta_v_many(model: MarketModel, delays: Sequence[DelaySpec], grid: TimeGrid, n_paths: int,
                    seed: int, workers: int = 1, pi_max: float = PI_MAX) -> list[McEstimate]:
    """Common-random-number gains for several delays from one pass over the paths.

    Entry k equals ``mc_delta_v(model, delays[k], ...)`` bit for bit.
    """
    strategies = [merton_strategy(model)] + [ait_strategy(model, d) for d in delays]
    values, clamped = simulate_log_wealth(model, strategies, grid, n_paths, seed, workers, pi_max)
    return [summarize(values[k] - values[0], seed, grid.n_steps, int(clamped[0] + clamped[k]))
            for k in range(1, len(strategies))]


def _alpha_block(args):
    grid, d, seed, paths = args
    bundle = sample_brownian_pair(grid, seed, paths, with_w=False)
    lag = grid.lag_indices(d)
    alpha = alpha_from_lag(bundle.b_terminal[:, None], bundle.b_values[:, lag], grid.points[lag][None, :],
                           grid.horizon)
    return forward_integral_left(alpha, bundle.b_incr)


def mc_forward_alpha_integral(grid: TimeGrid, d: float, n_paths: int, seed: int,
                              workers: int = 1) -> McEstimate:
    """Monte Carlo mean of the forward integral of the insider divergence against B."""
    if not 0 < d <= grid.horizon:
        raise ValueError(f"delay must lie in (0, {grid.horizon}], got {d}")
    tasks = [(grid, d, seed, paths) for paths in _blocks(n_paths, BLOCK_SIZE)]
    values = np.concatenate(_run_blocks(_alpha_block, tasks, workers))
    return summarize(values, seed, grid.n_steps)
