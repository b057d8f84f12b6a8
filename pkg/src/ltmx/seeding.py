"""Deterministic RNG derivation.

Every random decision in the pipeline draws from a generator keyed by
(root seed, purpose tag), so independent stages never share a stream and
reruns are bit-reproducible.
"""

from __future__ import annotations

import zlib

import numpy as np


def rng_for(seed: int, tag: str) -> np.random.Generator:
    """Generator for one purpose; same (seed, tag) always yields the same stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, zlib.crc32(tag.encode())])))


def torch_seed_for(seed: int, tag: str) -> int:
    """Derive a 63-bit torch manual seed from (seed, tag)."""
    state = np.random.SeedSequence([seed, zlib.crc32(tag.encode())]).generate_state(2, dtype=np.uint64)
    return int(state[0] >> 1)
