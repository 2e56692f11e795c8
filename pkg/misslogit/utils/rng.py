"""
Random stream derivation.

Every stochastic step draws from a generator derived from the root seed
plus a fixed tag, never from global state:

    replication r       -> SeedSequence(seed, spawn_key=(REPLICATION, r))
    imputation uniforms -> SeedSequence(seed, spawn_key=(IMPUTATION,))

The imputation stream is consumed row-major into an (n, M) matrix, so the
uniform used for record i and draw v is fixed before any record is
visited and does not depend on traversal order or worker count.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence]

REPLICATION = 0
IMPUTATION = 1
GENERATION = 2


def _root(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def substream(seed: SeedLike, *key: int) -> np.random.SeedSequence:
    root = _root(seed)
    return np.random.SeedSequence(root.entropy, spawn_key=tuple(root.spawn_key) + tuple(key))


def replication_seed(seed: SeedLike, rep: int) -> np.random.SeedSequence:
    return substream(seed, REPLICATION, rep)


def generator(seed: SeedLike, *key: int) -> np.random.Generator:
    return np.random.default_rng(substream(seed, *key))


def imputation_uniforms(seed: SeedLike, n: int, m: int) -> np.ndarray:
    """(n, m) matrix of U(0,1) draws; row i feeds the m imputations of record i."""
    return generator(seed, IMPUTATION).random((n, m))


def derive_seed(seed: SeedLike, *key: int) -> int:
    """Non-negative 63-bit integer seed of the substream at ``key``."""
    return int(substream(seed, *key).generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
