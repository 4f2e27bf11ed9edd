"""
Named, hash-derived random streams.

Every consumer of randomness asks for its own stream keyed by
(seed, purpose, *index), so changing how many draws one component makes
never shifts the draws of another.
"""

import hashlib

import numpy as np

_MASK_64 = (1 << 64) - 1


def derive_seed(seed: int, purpose: str, *index: int) -> int:
    """Stable 64-bit seed for (seed, purpose, index...)."""
    key = "|".join([str(int(seed) & _MASK_64), purpose, *[str(int(i)) for i in index]])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, purpose: str, *index: int) -> np.random.Generator:
    """Independent generator for (seed, purpose, index...)."""
    return np.random.default_rng(np.random.SeedSequence(derive_seed(seed, purpose, *index)))
