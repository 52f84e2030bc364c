"""Deterministic seed derivation for nested simulation components."""

from __future__ import annotations

import numpy as np


def derive_seed(*parts: int) -> int:
    """Fold integer components into one stable 64-bit seed.

    The same tuple always yields the same seed, and tuples of different
    length or content yield independent streams, so (run, round, client)
    randomness never aliases across components.
    """
    entropy = tuple(int(p) for p in parts)
    if any(p < 0 for p in entropy):
        raise ValueError("seed components must be non-negative")
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])
