"""
Imputation step: draw M completions of every incomplete record.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..data.dataset import Dataset
from ..errors import EmptyPoolError, ImputationError
from ..models.record import Level, LevelVector
from ..utils.rng import SeedLike, imputation_uniforms
from .pools import (
    Block,
    DonorIndex,
    DonorPool,
    FallbackEvent,
    Method,
    PoolLevel,
    _group,
    resolve_pool,
)

logger = logging.getLogger(__name__)

BlockValue = Union[LevelVector, Tuple[LevelVector, LevelVector]]

# Block imputed for each incomplete pattern
_PATTERN_BLOCK: Dict[int, Block] = {2: "x1", 3: "x2", 4: "joint"}


def sample_block(pool: DonorPool, rng: np.random.Generator, dataset: Dataset) -> BlockValue:
    """
    One inverse-CDF draw from ``pool``.

    Returns the donor's block levels, or its (x1, x2) pair for a joint
    pool. Raises EmptyPoolError on an empty pool.
    """
    if pool.is_empty:
        raise EmptyPoolError(-1, pool.conditioning)

    donor = int(pool.pick(np.array([rng.random()]))[0])

    x1 = tuple(Level(t) for t in dataset.x1[donor])
    x2 = tuple(Level(t) for t in dataset.x2[donor])

    if pool.block == "joint":
        return x1, x2
    return x1 if pool.block == "x1" else x2


@dataclass(frozen=True, eq=False)
class CompletedSets:
    """
    M completed design matrices of one dataset under one method.

    ``designs[v, i]`` is the completed design vector of record i in
    imputation v; complete records are identical across v. ``donors[i, v]``
    is the record whose block(s) filled record i in imputation v (-1 for
    complete records) and ``levels[i]`` the fallback level used.
    """

    method: Method
    designs: np.ndarray
    y: np.ndarray
    delta: np.ndarray
    donors: np.ndarray
    levels: Tuple[PoolLevel, ...]
    events: Tuple[FallbackEvent, ...] = ()

    def __post_init__(self):
        if self.designs.ndim != 3:
            raise ValueError("designs must be (M, n, d)")
        for array in (self.designs, self.donors):
            array.setflags(write=False)

    @property
    def M(self) -> int:
        return int(self.designs.shape[0])

    @property
    def n(self) -> int:
        return int(self.designs.shape[1])

    @property
    def n_coef(self) -> int:
        return int(self.designs.shape[2])

    @property
    def complete_mask(self) -> np.ndarray:
        return self.delta == 1

    def fallback_counts(self) -> Dict[str, int]:
        counts = {level.value: 0 for level in PoolLevel}
        for level in self.levels:
            counts[level.value] += 1
        return counts

    def completed_dataset(self, dataset: Dataset, v: int) -> Dataset:
        """Imputation ``v`` as a fully observed Dataset (for audit dumps)."""
        if not 0 <= v < self.M:
            raise IndexError(f"imputation {v} out of range 0..{self.M - 1}")

        x1 = dataset.x1.copy()
        x2 = dataset.x2.copy()
        for i in np.flatnonzero(self.delta != 1):
            donor = self.donors[i, v]
            if self.delta[i] in (2, 4):
                x1[i] = dataset.x1[donor]
            if self.delta[i] in (3, 4):
                x2[i] = dataset.x2[donor]

        return Dataset.from_arrays(
            y=dataset.y,
            x1=[tuple(row) for row in x1],
            x2=[tuple(row) for row in x2],
            z=[tuple(row) for row in dataset.z],
            w=[tuple(row) for row in dataset.w],
            layout=dataset.layout,
            missing_token=dataset.missing_token,
        )

    def write_csv(self, dataset: Dataset, v: int, path: str | Path) -> None:
        """Dump imputation ``v`` as a CSV in the dataset's own column layout."""
        from ..data.loader import write_csv

        write_csv(self.completed_dataset(dataset, v), path)


def impute(
    dataset: Dataset,
    index: DonorIndex,
    method: Method,
    M: int,
    seed: SeedLike,
    uniforms: Optional[np.ndarray] = None,
) -> CompletedSets:
    """
    Draw M completions of every incomplete record.

    Pattern 2 records take X1 from the method's X1 pool, pattern 3
    records X2 from its X2 pool, pattern 4 records the (X1, X2) pair of
    one donor from the joint pool. Draw v of record i uses uniform
    ``uniforms[i, v]``, derived from ``seed`` when not supplied, so MI1 and
    MI2 share their pattern-4 imputations under a common seed.

    Raises
    ------
    ImputationError
        M < 2 or an unknown method.
    EmptyPoolError
        A record's whole fallback chain is empty.
    """
    if method not in ("MI1", "MI2"):
        raise ImputationError(f"Unknown imputation method: {method}")
    if M < 2:
        raise ImputationError(f"At least 2 imputations required, got M={M}")

    n = dataset.n
    if uniforms is None:
        uniforms = imputation_uniforms(seed, n, M)
    if uniforms.shape != (n, M):
        raise ImputationError(f"uniforms must be ({n}, {M}), got {uniforms.shape}")

    design = dataset.design
    designs = np.broadcast_to(design, (M, n, design.shape[1])).copy()
    donors = np.full((n, M), -1, dtype=np.int64)
    levels: List[PoolLevel] = [PoolLevel.OBSERVED] * n
    events: List[FallbackEvent] = []

    x1s, x2s = dataset.x1_slice, dataset.x2_slice
    stratum = dataset.stratum_codes

    for pattern, block in _PATTERN_BLOCK.items():
        needs = dataset.delta == pattern
        if not needs.any():
            continue

        # Records sharing these codes share their whole fallback chain
        if method == "MI1" and block == "x1":
            groups = _group(needs, stratum, dataset.block_codes("x2"))
        elif method == "MI1" and block == "x2":
            groups = _group(needs, stratum, dataset.block_codes("x1"))
        else:
            groups = _group(needs, stratum)

        for members in groups.values():
            resolution = resolve_pool(index, int(members[0]), method, block)

            picked = resolution.pool.pick(uniforms[members])
            donors[members] = picked

            for i in members:
                levels[i] = resolution.level
                if resolution.level is not PoolLevel.PRIMARY:
                    events.append(
                        FallbackEvent(int(i), method, block, resolution.level, resolution.pool.conditioning)
                    )

        rows = np.flatnonzero(needs)
        source = design[donors[rows].T]  # (M, |rows|, d)
        if block in ("x1", "joint"):
            designs[:, rows, x1s] = source[:, :, x1s]
        if block in ("x2", "joint"):
            designs[:, rows, x2s] = source[:, :, x2s]

    completed = CompletedSets(
        method=method,
        designs=designs,
        y=dataset.y.astype(float),
        delta=dataset.delta.copy(),
        donors=donors,
        levels=tuple(levels),
        events=tuple(events),
    )

    if events:
        logger.warning(
            "[IMPUTE] Fallback pools used | method=%s | records=%d | levels=%s",
            method,
            len(events),
            completed.fallback_counts(),
        )

    logger.debug("[IMPUTE] Completed | method=%s | M=%d | n=%d", method, M, n)
    return completed
