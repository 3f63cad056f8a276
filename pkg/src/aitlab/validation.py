"""Self-check suite behind ``aitlab validate``: identities of every module at moderate sizes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .closed_forms import delta_v_single_delay, two_delay_difference, v_merton_bsm
from .engine import mc_delta_v, mc_expected_log_wealth, mc_forward_alpha_integral
from .grids import Curve, TimeGrid, integrate
from .hermite import (
    SmoothedWhiteNoise,
    donsker_conditional_density,
    gaussian_expectation,
    hermite,
    wick_power_recurrence_check,
    wick_vs_ordinary_exp_check,
)
from .models import (
    BlackScholes,
    CIRParams,
    Heston,
    InadmissibleModelError,
    OUParams,
    Vasicek,
    check_admissible,
    cir_inverse_moment,
    cir_moments,
    cir_terminal_samples,
    feller_report,
    ou_exact_path,
    ou_moments,
    sample_brownian_pair,
)
from .strategies import DelaySpec, MeasurabilityError, ait_strategy, merton_strategy
from .temporal import temporal_value

DEFAULT_SEED = 20240917
N_SIGMA = 3.0


@dataclass(frozen=True)
class Check:
    module: str
    name: str
    passed: bool
    detail: str


def _within(mean, se, target, n_sigma=N_SIGMA):
    z = abs(mean - target) / se if se > 0 else (0.0 if mean == target else math.inf)
    return z <= n_sigma, f"mean={mean:.6g} target={target:.6g} z={z:.2f}"


def _grids(seed):
    grid = TimeGrid(1.0, 100)
    lin = Curve.piecewise_linear([(0.0, 1.0), (1.0, 3.0)])
    yield "trapezoid exact on linear curve", abs(integrate(lin, grid) - 2.0) < 1e-12, "integral of 1+2t = 2"
    lag = grid.lag_indices(0.25)
    ok = bool(np.all(grid.points[lag] <= np.maximum(grid.left_points - 0.25, 0) + 1e-12))
    yield "lag snaps down to the grid", ok, "t_lag <= (t-d)^+"


def _hermite(seed):
    worst = 0.0
    for n in range(9):
        for m in range(9):
            e = gaussian_expectation(lambda x: hermite(n, x) * hermite(m, x))
            worst = max(worst, abs(e - (math.factorial(n) if n == m else 0.0)))
    yield "orthogonality n,m <= 8", worst < 1e-8, f"max error {worst:.2e}"
    w = SmoothedWhiteNoise(norm=0.7, realized_value=0.4)
    res = max(wick_power_recurrence_check(w, n) for n in range(1, 11))
    yield "wick recurrence n <= 10", res < 1e-10, f"max residual {res:.2e}"
    res = max(wick_vs_ordinary_exp_check(y, c2) for y in np.linspace(-2, 2, 9) for c2 in (0.0, 0.2, 0.5))
    yield "wick vs ordinary exponential", res < 1e-10, f"max residual {res:.2e}"
    g = np.linspace(-12, 12, 4001)
    mass = np.trapezoid(donsker_conditional_density(g, 0.3, 0.4, 1.0), g)
    yield "donsker density mass", abs(mass - 1) < 1e-6, f"mass {mass:.10f}"


def _models(seed):
    table = {(2.0, 0.04, 0.2): (True, True), (1.0, 0.03, 0.2): (True, False), (1.0, 0.01, 0.2): (False, False)}
    ok = all(feller_report(CIRParams(k, th, e, 0.04)) == want for (k, th, e), want in table.items())
    yield "feller truth table", ok, "three fixtures"
    try:
        check_admissible(Heston(Curve.constant(0.08), Curve.constant(0.02), CIRParams(1.0, 0.01, 0.2, 0.04)))
        yield "feller violation refused", False, "accepted"
    except InadmissibleModelError as exc:
        yield "feller violation refused", "Feller" in str(exc), str(exc)[:60]
    p = CIRParams(2.0, 0.04, 0.2, 0.04)
    z = cir_terminal_samples(p, 1.0, 20_000, seed)
    yield "cir samples positive", bool(np.all(z > 0)), f"min {z.min():.3g}"
    m1, m2 = cir_moments(p, 1.0)
    yield ("cir mean",) + _within(z.mean(), z.std(ddof=1) / math.sqrt(z.size), m1)
    sq = z**2
    yield ("cir second moment",) + _within(sq.mean(), sq.std(ddof=1) / math.sqrt(z.size), m2)
    inv = cir_inverse_moment(p, 1.0, 20_000, seed)
    upper = math.exp(p.kappa) / p.z0 + N_SIGMA * inv.std_error
    lower = 1 / m1 - N_SIGMA * inv.std_error
    yield "cir inverse moment bounds", lower <= inv.mean <= upper, f"{lower:.4g} <= {inv.mean:.4g} <= {upper:.4g}"
    ou = OUParams(1.0, 0.05, 0.1, 0.03)
    grid = TimeGrid(1.0, 50)
    bundle = sample_brownian_pair(grid, seed, range(20_000))
    r = ou_exact_path(ou, grid, bundle.w_incr)[:, -1]
    m1, m2 = ou_moments(ou, 1.0)
    yield ("ou mean",) + _within(r.mean(), r.std(ddof=1) / math.sqrt(r.size), m1)
    yield ("ou second moment",) + _within((r**2).mean(), (r**2).std(ddof=1) / math.sqrt(r.size), m2)


def _strategies(seed):
    grid = TimeGrid(1.0, 20)
    c = Curve.constant
    bsm = BlackScholes(c(0.08), c(0.02), c(0.2))
    bundle = sample_brownian_pair(grid, seed, range(4), with_w=False)
    view = merton_strategy(bsm).view(bundle, None)
    try:
        view.g
        yield "traditional trader has no insider datum", False, "g was readable"
    except MeasurabilityError:
        yield "traditional trader has no insider datum", True, "refused"
    view = ait_strategy(bsm, DelaySpec(0.25)).view(bundle, None)
    try:
        view.read_b(10, 6)
        yield "delayed read refused", False, "B(0.3) readable at t=0.5 with d=0.25"
    except MeasurabilityError:
        yield "delayed read refused", True, "B(0.3) at t=0.5, d=0.25"


def _closed_forms(seed):
    yield "gain at d = T", abs(delta_v_single_delay(1.0, 1.0) - 0.5) < 1e-15, "d/2T + ln(T/d)/2 = 1/2"
    grid = TimeGrid(1.0, 1000)
    cost = two_delay_difference(1.0, 0.3, 0.0, OUParams(1.0, 0.05, 0.1, 0.03), Curve.constant(0.2), grid)
    yield "no rate delay, no cost", cost == delta_v_single_delay(1.0, 0.3), f"{cost:.6g}"


def _engine(seed):
    grid = TimeGrid(1.0, 250)
    est = mc_forward_alpha_integral(grid, 0.5, 20_000, seed)
    yield ("forward integral of alpha",) + _within(est.mean, est.std_error, 0.5 + math.log(2))
    c = Curve.constant
    bsm = BlackScholes(c(0.08), c(0.02), c(0.2))
    est = mc_expected_log_wealth(bsm, merton_strategy(bsm), grid, 20_000, seed)
    yield ("bsm merton value",) + _within(est.mean, est.std_error, v_merton_bsm(c(0.08), c(0.02), c(0.2), grid))
    est = mc_delta_v(bsm, DelaySpec(0.5), grid, 20_000, seed)
    yield ("bsm insider gain",) + _within(est.mean, est.std_error, delta_v_single_delay(1.0, 0.5))
    vas = Vasicek(c(0.08), c(0.2), OUParams(1.0, 0.05, 0.1, 0.03))
    est = mc_delta_v(vas, DelaySpec(0.3, 0.3), grid, 20_000, seed)
    target = two_delay_difference(1.0, 0.3, 0.3, vas.rate, vas.sigma, grid)
    yield ("vasicek two-delay gain",) + _within(est.mean, est.std_error, target)


def _temporal(seed):
    grid = TimeGrid(1.0, 1000)
    sigma = Curve.constant(0.2)
    res = temporal_value(1.0, OUParams(1.0, 0.05, 0.0, 0.03), sigma, grid)
    yield "xi = 0 is infinite", not res.finite, res.kind
    res = temporal_value(1.0, OUParams(1.0, 0.05, 2.0, 0.03), sigma, grid)
    yield "finite root residual", res.finite and res.residual <= 1e-10, f"d*={res.d_star:.6g} |f|={res.residual:.1e}"


SUITES: dict[str, Callable] = {
    "grids_curves": _grids,
    "hermite_wick": _hermite,
    "stochastic_models": _models,
    "strategies": _strategies,
    "closed_forms": _closed_forms,
    "forward_mc": _engine,
    "temporal_value": _temporal,
}


def run_validate(seed: int = DEFAULT_SEED) -> list[Check]:
    checks = []
    for module, suite in SUITES.items():
        try:
            for name, passed, detail in suite(seed):
                checks.append(Check(module, name, bool(passed), detail))
        except Exception as exc:  # a crash is a failed check, not an abort
            checks.append(Check(module, "suite raised", False, f"{type(exc).__name__}: {exc}"))
    return checks


def format_table(checks: list[Check]) -> str:
    w_mod = max(len(c.module) for c in checks)
    w_name = max(len(c.name) for c in checks)
    lines = [f"{'module':<{w_mod}}  {'check':<{w_name}}  result  detail"]
    for c in checks:
        lines.append(f"{c.module:<{w_mod}}  {c.name:<{w_name}}  {'PASS' if c.passed else 'FAIL':<6}  {c.detail}")
    return "\n".join(lines)
