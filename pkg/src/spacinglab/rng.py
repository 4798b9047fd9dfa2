"""Per-trial random streams.

Every trial owns a Philox stream keyed by ``(seed, trial)``, so results do
not depend on how trials are spread over workers.
"""

from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Counter-based generator for one trial of a seeded experiment."""
    seq = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(seq))
