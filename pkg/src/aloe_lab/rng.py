"""Deterministic per-query random streams.

Every oracle query gets its own generator, keyed by (trial seed, iteration,
purpose).  This keeps the function-error sums across iterations independent,
and makes every trial exactly replayable from its seed alone.
"""

import numpy as np

# Purpose codes for the per-iteration substreams.
GRAD = 0
F_CURR = 1
F_PLUS = 2
EPS_EST = 3
PROBE = 4


class TrialStreams:
    """Factory for the independent substreams of one trial."""

    def __init__(self, trial_seed: int):
        if trial_seed < 0:
            raise ValueError("trial_seed must be nonnegative")
        self.trial_seed = int(trial_seed)

    def stream(self, k: int, purpose: int) -> np.random.Generator:
        """Fresh generator for query `purpose` at iteration `k`."""
        return np.random.default_rng((self.trial_seed, int(k), int(purpose)))


def probe_rng(base_seed: int, tag: int = 0) -> np.random.Generator:
    """Generator for offline probing (certification, constant estimation)."""
    return np.random.default_rng((int(base_seed), PROBE, int(tag)))
