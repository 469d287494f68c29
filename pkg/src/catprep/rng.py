"""Counter-based random streams, one per trajectory.

Philox streams keyed by (seed, point, trajectory) make every trajectory's
randomness independent of scheduling, so ensemble results are bitwise
reproducible for any worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def trajectory_rng(seed: int, point_id: int = 0, traj_id: int = 0) -> np.random.Generator:
    """Generator for one trajectory of one parameter point."""
    if not 0 <= point_id < 2**32 or not 0 <= traj_id < 2**32:
        raise ValueError("point_id and traj_id must fit in 32 bits")
    key = np.array([seed & _MASK64, (point_id << 32) | traj_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
