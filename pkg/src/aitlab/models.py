"""Market models, exact-transition samplers and moment formulas.

The short-rate and variance processes are sampled from their exact Gaussian
(Ornstein-Uhlenbeck, Hull-White) or noncentral chi-square (CIR) transitions,
so path statistics carry no time-discretization bias.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy import integrate as sp_integrate

from . import rng
from .grids import Curve, TimeGrid
from .stats import McEstimate, summarize


class InadmissibleModelError(ValueError):
    """Parameters for which the model (or the requested quantity) is not well defined."""


@dataclass(frozen=True)
class OUParams:
    """Vasicek rate dR = a (b - R) dt + xi dW, R(0) = r0."""

    a: float
    b: float
    xi: float
    r0: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"mean-reversion rate a must be positive, got {self.a}")
        if self.xi < 0:
            raise ValueError(f"diffusion xi must be nonnegative, got {self.xi}")


@dataclass(frozen=True)
class HWParams:
    """Hull-White rate dR = (kappa(t) - a R) dt + theta dW, R(0) = r0."""

    kappa: Curve
    a: float
    theta: float
    r0: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"mean-reversion rate a must be positive, got {self.a}")
        if self.theta < 0:
            raise ValueError(f"diffusion theta must be nonnegative, got {self.theta}")
        if self.kappa.minimum() <= 0:
            raise ValueError("kappa(t) must be positive")


@dataclass(frozen=True)
class CIRParams:
    """Square-root diffusion dZ = kappa (theta - Z) dt + eta sqrt(Z) dW, Z(0) = z0."""

    kappa: float
    theta: float
    eta: float
    z0: float

    def __post_init__(self):
        for name in ("kappa", "theta", "eta", "z0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)}")

    @property
    def feller(self) -> bool:
        return self.kappa * self.theta >= self.eta**2 / 2

    @property
    def inverse_moment_finite(self) -> bool:
        return self.kappa * self.theta >= self.eta**2

    @property
    def dimension(self) -> float:
        return 4 * self.kappa * self.theta / self.eta**2


RateParams = Union[OUParams, HWParams, CIRParams]


# --------------------------------------------------------------------------- market models


@dataclass(frozen=True)
class BlackScholes:
    mu: Curve
    rho: Curve
    sigma: Curve
    kind = "bsm"


@dataclass(frozen=True)
class Heston:
    mu: Curve
    rho: Curve
    variance: CIRParams
    kind = "heston"


@dataclass(frozen=True)
class Vasicek:
    mu: Curve
    sigma: Curve
    rate: OUParams
    kind = "vasicek"


@dataclass(frozen=True)
class HullWhite:
    mu: Curve
    sigma: Curve
    rate: HWParams
    kind = "hull_white"


@dataclass(frozen=True)
class CIRRate:
    mu: Curve
    sigma: Curve
    rate: CIRParams
    kind = "cir_rate"


MarketModel = Union[BlackScholes, Heston, Vasicek, HullWhite, CIRRate]
SHORT_RATE_MODELS = (Vasicek, HullWhite, CIRRate)


def check_admissible(model: MarketModel) -> None:
    """Refuse square-root models whose parameters break the Feller condition."""
    params = getattr(model, "variance", None) or getattr(model, "rate", None)
    if isinstance(params, CIRParams) and not params.feller:
        raise InadmissibleModelError(
            f"Feller condition kappa*theta >= eta^2/2 violated for {model.kind}: "
            f"kappa*theta = {params.kappa * params.theta:g} < eta^2/2 = {params.eta**2 / 2:g}"
        )


# --------------------------------------------------------------------------- Brownian drivers


@dataclass(frozen=True)
class PathBundle:
    """Brownian pair (B, W) sampled on a grid for a batch of paths (leading axis).

    ``w_incr``/``w_values`` are None when the model never reads W.
    """

    grid: TimeGrid
    paths: range
    b_incr: np.ndarray
    b_values: np.ndarray
    w_incr: Optional[np.ndarray] = None
    w_values: Optional[np.ndarray] = None

    @property
    def b_terminal(self) -> np.ndarray:
        return self.b_values[:, -1]

    @property
    def n_paths(self) -> int:
        return self.b_incr.shape[0]


def _cumulate(incr: np.ndarray) -> np.ndarray:
    values = np.zeros((incr.shape[0], incr.shape[1] + 1))
    np.cumsum(incr, axis=1, out=values[:, 1:])
    return values


def sample_brownian_pair(grid: TimeGrid, seed: int, paths, with_w: bool = True) -> PathBundle:
    """Independent Brownian increments for each path index, from disjoint streams."""
    if isinstance(paths, int):
        paths = range(paths)
    scale = np.sqrt(grid.dt)
    b_incr = rng.stacked_normals(seed, paths, rng.TAG_B, grid.n_steps) * scale
    w_incr = w_values = None
    if with_w:
        w_incr = rng.stacked_normals(seed, paths, rng.TAG_W, grid.n_steps) * scale
        w_values = _cumulate(w_incr)
    return PathBundle(grid, paths, b_incr, _cumulate(b_incr), w_incr, w_values)


# --------------------------------------------------------------------------- Ornstein-Uhlenbeck


def ou_moments(p: OUParams, t):
    """Mean and second moment of R(t) started from r0."""
    if p.a == 0:
        raise ValueError("a = 0: moment formulas divide by a")
    e1 = np.exp(-p.a * t)
    e2 = np.exp(-2 * p.a * t)
    mean = p.r0 * e1 + p.b * (1 - e1)
    second = (p.b**2 + p.xi**2 * (1 - e2) / (2 * p.a) + 2 * p.b * e1 * (p.r0 - p.b)
              + e2 * (p.r0 - p.b) ** 2)
    return mean, second


def ou_conditional_law(p: OUParams, s, t, r_s):
    """Gaussian law of R(t) given R(s) = r_s."""
    if np.any(np.asarray(s) > np.asarray(t)):
        raise ValueError(f"conditioning time s={s} is after t={t}")
    lag = np.asarray(t) - np.asarray(s)
    mean = p.b - (p.b - r_s) * np.exp(-p.a * lag)
    var = p.xi**2 * (1 - np.exp(-2 * p.a * lag)) / (2 * p.a)
    return mean, var


def ou_exact_path(p: OUParams, grid: TimeGrid, w_incr: np.ndarray) -> np.ndarray:
    """Exact OU recursion driven by the standardized W increments; shape (paths, n+1)."""
    w_incr = np.atleast_2d(w_incr)
    decay = np.exp(-p.a * grid.dt)
    sd = p.xi * np.sqrt((1 - decay**2) / (2 * p.a))
    z = w_incr / np.sqrt(grid.dt)
    out = np.empty((w_incr.shape[0], grid.n_steps + 1))
    out[:, 0] = p.r0
    for i in range(grid.n_steps):
        out[:, i + 1] = p.b + (out[:, i] - p.b) * decay + sd * z[:, i]
    return out


# --------------------------------------------------------------------------- Hull-White


def _hw_drift_integral(p: HWParams, s: float, t: float) -> float:
    # int_s^t kappa(u) exp(-a (t - u)) du
    if t == s:
        return 0.0
    knots = [k for k in p.kappa.times if s < k < t] or None
    val, _ = sp_integrate.quad(lambda u: float(p.kappa(u)) * np.exp(-p.a * (t - u)), s, t,
                               points=knots, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


def hw_conditional_mean(p: HWParams, s, t, r_s):
    if s > t:
        raise ValueError(f"conditioning time s={s} is after t={t}")
    return np.asarray(r_s) * np.exp(-p.a * (t - s)) + _hw_drift_integral(p, s, t)


def hw_conditional_var(p: HWParams, s, t):
    if np.any(np.asarray(s) > np.asarray(t)):
        raise ValueError(f"conditioning time s={s} is after t={t}")
    lag = np.asarray(t) - np.asarray(s)
    return p.theta**2 * (1 - np.exp(-2 * p.a * lag)) / (2 * p.a)


@lru_cache(maxsize=32)
def _hw_step_drifts(p: HWParams, grid: TimeGrid) -> np.ndarray:
    pts = grid.points
    return np.array([_hw_drift_integral(p, pts[i], pts[i + 1]) for i in range(grid.n_steps)])


def hw_exact_path(p: HWParams, grid: TimeGrid, w_incr: np.ndarray) -> np.ndarray:
    w_incr = np.atleast_2d(w_incr)
    decay = np.exp(-p.a * grid.dt)
    sd = p.theta * np.sqrt((1 - decay**2) / (2 * p.a))
    drift = _hw_step_drifts(p, grid)
    z = w_incr / np.sqrt(grid.dt)
    out = np.empty((w_incr.shape[0], grid.n_steps + 1))
    out[:, 0] = p.r0
    for i in range(grid.n_steps):
        out[:, i + 1] = out[:, i] * decay + drift[i] + sd * z[:, i]
    return out


def hw_moments(p: HWParams, t: float):
    mean = float(hw_conditional_mean(p, 0.0, t, p.r0))
    return mean, mean**2 + float(hw_conditional_var(p, 0.0, t))


# --------------------------------------------------------------------------- CIR / Heston variance


def feller_report(p: CIRParams) -> tuple[bool, bool]:
    """(positive almost surely, E[1/Z(t)] finite)."""
    return p.feller, p.inverse_moment_finite


def cir_moments(p: CIRParams, t):
    e1 = np.exp(-p.kappa * t)
    mean = p.z0 * e1 + p.theta * (1 - e1)
    second = (mean**2 + p.z0 * p.eta**2 / p.kappa * (e1 - e1**2)
              + p.theta * p.eta**2 / (2 * p.kappa) * (1 - e1) ** 2)
    return mean, second


def cir_conditional_mean(p: CIRParams, s, t, z_s):
    if np.any(np.asarray(s) > np.asarray(t)):
        raise ValueError(f"conditioning time s={s} is after t={t}")
    return p.theta + (np.asarray(z_s) - p.theta) * np.exp(-p.kappa * (np.asarray(t) - np.asarray(s)))


def _require_feller(p: CIRParams) -> None:
    if not p.feller:
        raise InadmissibleModelError(
            f"Feller condition kappa*theta >= eta^2/2 violated: "
            f"{p.kappa * p.theta:g} < {p.eta**2 / 2:g}; exact simulation refused"
        )


def _cir_step(z, h: float, p: CIRParams, normal, chi2):
    # noncentral chi-square(df, lam) = (N + sqrt(lam))^2 + chi-square(df - 1), df > 1
    decay = np.exp(-p.kappa * h)
    c = 4 * p.kappa / (p.eta**2 * (1 - decay))
    lam = c * decay * z
    return ((normal + np.sqrt(lam)) ** 2 + chi2) / c


def cir_exact_path(p: CIRParams, grid: TimeGrid, seed: int, paths) -> np.ndarray:
    """Exact CIR transitions on the grid, one stream per path; shape (paths, n+1)."""
    _require_feller(p)
    if isinstance(paths, int):
        paths = range(paths)
    n = grid.n_steps
    df_rest = p.dimension - 1
    normals = np.empty((len(paths), n))
    chi2 = np.empty((len(paths), n))
    for row, path in enumerate(paths):
        g = rng.path_stream(seed, path, rng.TAG_CIR)
        normals[row] = g.standard_normal(n)
        chi2[row] = g.chisquare(df_rest, n)
    out = np.empty((len(paths), n + 1))
    out[:, 0] = p.z0
    for i in range(n):
        out[:, i + 1] = _cir_step(out[:, i], grid.dt, p, normals[:, i], chi2[:, i])
    return out


def cir_terminal_samples(p: CIRParams, t: float, n_paths: int, seed: int) -> np.ndarray:
    """Exact draws of Z(t) from z0 in a single transition."""
    _require_feller(p)
    if t <= 0:
        return np.full(n_paths, p.z0)
    g = rng.path_stream(seed, 0, rng.TAG_AUX)
    normal = g.standard_normal(n_paths)
    chi2 = g.chisquare(p.dimension - 1, n_paths)
    return _cir_step(np.full(n_paths, p.z0), t, p, normal, chi2)


def cir_inverse_moment(p: CIRParams, t: float, n_paths: int, seed: int) -> McEstimate:
    """Monte Carlo E[1/Z(t)]; defined only when kappa*theta >= eta^2."""
    if not p.inverse_moment_finite:
        raise InadmissibleModelError(
            f"E[1/Z(t)] diverges unless kappa*theta >= eta^2 "
            f"(got {p.kappa * p.theta:g} < {p.eta**2:g})"
        )
    z = cir_terminal_samples(p, t, n_paths, seed)
    return summarize(1.0 / z, seed, 1)


# --------------------------------------------------------------------------- generic helpers


def rate_moments(p: RateParams, t: float):
    if isinstance(p, OUParams):
        return ou_moments(p, t)
    if isinstance(p, HWParams):
        return hw_moments(p, t)
    return cir_moments(p, t)


def rate_conditional_mean(p: RateParams, s, t, r_s):
    if isinstance(p, OUParams):
        return ou_conditional_law(p, s, t, r_s)[0]
    if isinstance(p, HWParams):
        return hw_conditional_mean(p, s, t, r_s)
    return cir_conditional_mean(p, s, t, r_s)


def needs_w(model: MarketModel) -> bool:
    return isinstance(model, (Vasicek, HullWhite))


def sample_state(model: MarketModel, grid: TimeGrid, seed: int, bundle: PathBundle):
    """Variance or short-rate paths matching ``bundle``; None for Black-Scholes."""
    if isinstance(model, Heston):
        return cir_exact_path(model.variance, grid, seed, bundle.paths)
    if isinstance(model, CIRRate):
        return cir_exact_path(model.rate, grid, seed, bundle.paths)
    if isinstance(model, Vasicek):
        return ou_exact_path(model.rate, grid, bundle.w_incr)
    if isinstance(model, HullWhite):
        return hw_exact_path(model.rate, grid, bundle.w_incr)
    return None
