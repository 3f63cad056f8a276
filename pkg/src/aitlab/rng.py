"""Counter-based random streams keyed by (seed, process tag, path index).

Every path owns one Philox stream per driving process, so a path's draws do
not depend on how paths are batched or spread across workers.
"""

from __future__ import annotations

import numpy as np

# process tags; B and W must never share a key
TAG_B = 1
TAG_W = 2
TAG_CIR = 3
TAG_AUX = 4

_MASK64 = (1 << 64) - 1


def path_stream(seed: int, path_index: int, tag: int) -> np.random.Generator:
    if seed < 0 or path_index < 0:
        raise ValueError("seed and path_index must be nonnegative")
    bitgen = np.random.Philox(key=[seed & _MASK64, tag], counter=[0, 0, path_index, 0])
    return np.random.Generator(bitgen)


def stacked_normals(seed: int, paths: range, tag: int, size: int) -> np.ndarray:
    """Standard normals, one row of ``size`` per path, each row from its own stream."""
    out = np.empty((len(paths), size))
    for row, p in enumerate(paths):
        out[row] = path_stream(seed, p, tag).standard_normal(size)
    return out
