"""Reproducible RNG streams.

Every random routine takes an integer seed; independent sub-streams are
derived as make_rng(seed, stream_id, ...) so parallel replications are
reproducible regardless of scheduling.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for the (seed, *stream) key; distinct keys are independent."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))
