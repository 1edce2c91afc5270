"""
Seed derivation for reproducible runs.

Every random draw in the package goes through ``numpy.random.Generator`` backed
by PCG64. Stage seeds are derived from the master seed by hashing, so changing
one stage's seed leaves the randomness of every other stage untouched.
"""

import hashlib
from typing import Union

import numpy as np

SEED_MASK = (1 << 63) - 1

STAGES = ("generate", "augment", "split", "smote", "featsel", "models")


def derive_seed(master: int, *path: Union[str, int]) -> int:
    """
    Derive a child seed from a master seed and a name path.

    ``derive_seed(7, "models", "random_forest", 3)`` is the seed of tree 3 of
    the random forest in a run with master seed 7.

    Args:
        master: Master seed
        *path: Stage name, then optional sub-keys

    Returns:
        Non-negative 63-bit integer seed
    """
    key = ":".join([str(int(master))] + [str(p) for p in path])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & SEED_MASK


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator for ``seed``."""
    return np.random.Generator(np.random.PCG64(int(seed)))
