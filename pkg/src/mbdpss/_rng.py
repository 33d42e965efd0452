"""Seeded random streams.

Every random draw in the package comes from a Philox (counter-based, 64-bit)
bit generator keyed by a root seed plus a tuple of stream indices.  Two calls
with the same ``(seed, *key)`` produce bit-identical draws; distinct keys give
statistically independent streams (``SeedSequence`` spawn keys).
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse ``(seed, *key)`` into a single 64-bit integer seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Standard circular complex Gaussian draws (E|z|^2 = 1)."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
