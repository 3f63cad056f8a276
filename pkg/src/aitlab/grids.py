"""Uniform time grids, deterministic coefficient curves and trapezoid quadrature."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

# tolerance used when snapping a time onto the grid
_SNAP_EPS = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i * T / n_steps on [0, T]."""

    horizon: float
    n_steps: int

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.arange(self.n_steps + 1) * self.dt
        pts[-1] = self.horizon
        return pts

    @property
    def left_points(self) -> np.ndarray:
        return self.points[:-1]

    def index_at_or_below(self, t: float) -> int:
        """Index of the last grid point not after ``t``."""
        if t < -_SNAP_EPS * self.dt or t > self.horizon * (1 + 1e-12):
            raise ValueError(f"time {t} outside [0, {self.horizon}]")
        return int(min(np.floor(t / self.dt + _SNAP_EPS), self.n_steps))

    def lag_indices(self, delay: float) -> np.ndarray:
        """Grid index of (t_i - delay)^+ snapped downwards, for every left point t_i."""
        if delay < 0:
            raise ValueError(f"delay must be nonnegative, got {delay}")
        i = np.arange(self.n_steps)
        lag = np.floor(np.maximum(i * self.dt - delay, 0.0) / self.dt + _SNAP_EPS)
        return np.minimum(lag.astype(np.int64), i)


@dataclass(frozen=True)
class Curve:
    """Deterministic function of time: constant or piecewise linear over knots.

    A constant curve stores a single knot at t=0 and is flat everywhere.
    ``floor`` is an optional declared lower bound (used for volatilities).
    """

    times: tuple = (0.0,)
    values: tuple = (0.0,)
    floor: float | None = field(default=None)

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        if len(times) != len(values) or not times:
            raise ValueError("curve needs matching, nonempty knot times and values")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"knot times must be strictly increasing: {times}")
        if not all(np.isfinite(times)) or not all(np.isfinite(values)):
            raise ValueError("curve knots must be finite")
        if self.floor is not None:
            if not self.floor > 0:
                raise ValueError(f"floor must be positive, got {self.floor}")
            # piecewise linear: the minimum is attained at a knot
            if min(values) < self.floor:
                raise ValueError(
                    f"curve drops to {min(values)} below its declared floor {self.floor}"
                )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value: float, floor: float | None = None) -> "Curve":
        return cls((0.0,), (float(value),), floor)

    @classmethod
    def piecewise_linear(cls, knots: Sequence[tuple[float, float]], floor: float | None = None) -> "Curve":
        ts, vs = zip(*knots)
        return cls(tuple(ts), tuple(vs), floor)

    @property
    def is_constant(self) -> bool:
        return len(self.times) == 1

    def __call__(self, t):
        if self.is_constant:
            return np.full_like(np.asarray(t, dtype=float), self.values[0])
        return np.interp(t, self.times, self.values)

    def minimum(self) -> float:
        return min(self.values)


CurveLike = Union[Curve, Callable, np.ndarray, Sequence[float]]
NodesLike = Union[TimeGrid, np.ndarray, Sequence[float]]


def _nodes(grid: NodesLike) -> np.ndarray:
    if isinstance(grid, TimeGrid):
        return grid.points
    nodes = np.asarray(grid, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
        raise ValueError("quadrature nodes must be a strictly increasing 1-D array")
    return nodes


def integrate(curve_like: CurveLike, grid: NodesLike) -> float:
    """Composite trapezoid rule of a curve (or grid-sampled values) over the grid nodes.

    ``grid`` is normally a :class:`TimeGrid`; an explicit increasing node array is
    also accepted so callers can insert kinks of the integrand as nodes.
    """
    nodes = _nodes(grid)
    if callable(curve_like):
        values = np.asarray(curve_like(nodes), dtype=float)
    else:
        values = np.asarray(curve_like, dtype=float)
    if values.shape != nodes.shape:
        raise ValueError(f"expected {nodes.size} samples, got shape {values.shape}")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"non-finite integrand value {values[i]} at grid index {i} (t={nodes[i]})")
    return float(np.trapezoid(values, nodes))


def volatility_floor_check(curve: CurveLike, grid: TimeGrid, floor: float) -> bool:
    """True iff the curve stays at or above ``floor`` on every grid point."""
    if not floor > 0:
        raise ValueError(f"floor must be positive, got {floor}")
    values = np.asarray(curve(grid.points) if callable(curve) else curve, dtype=float)
    return bool(np.min(values) >= floor)
