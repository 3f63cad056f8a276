from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with its standard error and the metadata needed to reproduce it."""

    mean: float
    std_error: float
    n_paths: int
    seed: int
    n_steps: int
    clamped: int = 0

    def z_score(self, target: float, extra_se: float = 0.0) -> float:
        """|mean - target| in units of the (combined) standard error."""
        se = float(np.hypot(self.std_error, extra_se))
        diff = abs(self.mean - target)
        if se == 0.0:
            return 0.0 if diff == 0.0 else float("inf")
        return diff / se


def summarize(values, seed: int, n_steps: int, clamped: int = 0) -> McEstimate:
    # np.sum on a contiguous 1-D array uses pairwise summation
    values = np.ascontiguousarray(values, dtype=float)
    n = values.size
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    mean = float(np.sum(values) / n)
    se = float(np.std(values, ddof=1) / np.sqrt(n))
    return McEstimate(mean, se, n, seed, n_steps, clamped)
