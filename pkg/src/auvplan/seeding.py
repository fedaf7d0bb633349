"""Deterministic seed derivation for nested simulation components."""

from __future__ import annotations

import numpy as np

# Domain labels keep child streams for different component types disjoint
# even when their positional indices collide.
DOMAIN_NETWORK = 1
DOMAIN_FIELD = 2
DOMAIN_GA = 3
DOMAIN_PSO = 4
DOMAIN_STEP = 5


def derive_seed(base_seed: int, *path: int) -> int:
    """Derive a child seed from a base seed and an integer path.

    The same (base_seed, path) always yields the same child, and distinct
    paths yield independent streams.
    """
    ss = np.random.SeedSequence(entropy=(int(base_seed),) + tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_from(seed_or_rng: int | np.random.Generator) -> np.random.Generator:
    """Accept either a seed or an existing Generator and return a Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(int(seed_or_rng))
