"""
Donor pools realizing the empirical conditional distributions used by
MI1 and MI2, plus the fallback chain applied when a pool is empty.

Eligibility per pool:

    MI1  x1 | (Y, X2, V)   complete cases
    MI1  x2 | (Y, X1, V)   complete cases
    MI1  joint | (Y, V)    complete cases
    MI2  x1 | (Y, V)       records with X1 observed (patterns 1, 3)
    MI2  x2 | (Y, V)       records with X2 observed (patterns 1, 2)
    MI2  joint | (Y, V)    complete cases

Fallback order, shared by imputation and the variance plug-ins:

    MI1 conditional:  (Y, X_other, V) -> (Y, V) complete cases -> Y complete cases
    MI2 and joint:    (Y, V) -> Y, same eligibility as the primary pool
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Literal, Optional, Tuple

import numpy as np

from ..data.dataset import Dataset
from ..errors import EmptyPoolError
from ..models.record import Level, LevelVector, StratumKey

logger = logging.getLogger(__name__)

Method = Literal["MI1", "MI2"]
Block = Literal["x1", "x2", "joint"]


class PoolLevel(str, Enum):
    OBSERVED = "observed"
    PRIMARY = "primary"
    STRATUM = "stratum"
    OUTCOME = "outcome"
    EXHAUSTED = "exhausted"


# ============================================================
# DonorPool
# ============================================================

@dataclass(frozen=True, eq=False)
class DonorPool:
    """
    Weighted donor set; ``donors`` ascending, ``weights`` summing to 1.

    ``block`` names what a draw returns: one covariate block or the
    donor's (x1, x2) pair.
    """

    donors: np.ndarray
    weights: np.ndarray
    block: Block
    conditioning: str

    def __post_init__(self):
        donors = np.asarray(self.donors, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=float)

        if donors.shape != weights.shape:
            raise ValueError("donors and weights must have equal length")
        if np.any(weights < 0):
            raise ValueError("donor weights must be nonnegative")
        if donors.size and abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"donor weights sum to {weights.sum()!r}, expected 1")
        if np.any(np.diff(donors) <= 0):
            raise ValueError("donor indices must be strictly ascending")

        donors.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "donors", donors)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, donors: np.ndarray, block: Block, conditioning: str) -> "DonorPool":
        donors = np.sort(np.asarray(donors, dtype=np.int64))
        weights = np.full(donors.size, 1.0 / donors.size) if donors.size else np.empty(0)
        return cls(donors, weights, block, conditioning)

    @classmethod
    def empty(cls, block: Block, conditioning: str) -> "DonorPool":
        return cls(np.empty(0, dtype=np.int64), np.empty(0), block, conditioning)

    def __len__(self) -> int:
        return int(self.donors.size)

    @property
    def is_empty(self) -> bool:
        return self.donors.size == 0

    def items(self) -> List[Tuple[int, float]]:
        return [(int(d), float(w)) for d, w in zip(self.donors, self.weights)]

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.weights)

    def pick(self, u: np.ndarray) -> np.ndarray:
        """
        Inverse-CDF donor selection: the first donor whose cumulative
        weight is >= u, in ascending donor order.
        """
        if self.is_empty:
            raise EmptyPoolError(-1, self.conditioning)
        position = np.searchsorted(self.cumulative, u, side="left")
        return self.donors[np.minimum(position, self.donors.size - 1)]


# ============================================================
# DonorIndex
# ============================================================

@dataclass(frozen=True)
class Resolution:
    """Pool chosen for one record after walking the fallback chain."""

    pool: DonorPool
    level: PoolLevel


@dataclass(frozen=True)
class FallbackEvent:
    record: int
    method: Method
    block: Block
    level: PoolLevel
    key: str

    def to_dict(self) -> Dict[str, object]:
        return {
            "record": self.record,
            "method": self.method,
            "block": self.block,
            "level": self.level.value,
            "key": self.key,
        }


@dataclass(frozen=True, eq=False)
class DonorIndex:
    """
    The six pool maps plus the outcome-only fallback pools.

    Built for one dataset; record-level resolution reads that dataset's
    stratum and block codes.
    """

    dataset: Dataset = field(repr=False)
    mi1_x1_given: Dict[Tuple[StratumKey, LevelVector], DonorPool]
    mi1_x2_given: Dict[Tuple[StratumKey, LevelVector], DonorPool]
    mi1_joint: Dict[StratumKey, DonorPool]
    mi2_x1: Dict[StratumKey, DonorPool]
    mi2_x2: Dict[StratumKey, DonorPool]
    mi2_joint: Dict[StratumKey, DonorPool]
    outcome_complete: Dict[int, DonorPool]
    outcome_x1: Dict[int, DonorPool]
    outcome_x2: Dict[int, DonorPool]

    # ------------------------------------------------------------------
    # Keys of a record
    # ------------------------------------------------------------------

    def _block_key(self, i: int, block: str) -> LevelVector:
        code = self.dataset.block_codes(block)[i]
        if code < 0:
            raise ValueError(f"Record {i} has no observed {block} block")
        return tuple(Level(t) for t in self.dataset.block_levels(block)[code])

    def candidates(self, i: int, method: Method, block: Block) -> Iterator[Tuple[PoolLevel, DonorPool]]:
        """Pools tried, in order, for imputing ``block`` of record ``i``."""
        key = self.dataset.stratum_key(i)
        y = key.y

        if method == "MI1" and block == "x1":
            conditioning = (key, self._block_key(i, "x2"))
            yield PoolLevel.PRIMARY, self.mi1_x1_given.get(
                conditioning, DonorPool.empty("x1", _describe(conditioning))
            )
            yield PoolLevel.STRATUM, _restrict(self.mi1_joint.get(key), "x1", key)
            yield PoolLevel.OUTCOME, _restrict(self.outcome_complete.get(y), "x1", f"y={y}")

        elif method == "MI1" and block == "x2":
            conditioning = (key, self._block_key(i, "x1"))
            yield PoolLevel.PRIMARY, self.mi1_x2_given.get(
                conditioning, DonorPool.empty("x2", _describe(conditioning))
            )
            yield PoolLevel.STRATUM, _restrict(self.mi1_joint.get(key), "x2", key)
            yield PoolLevel.OUTCOME, _restrict(self.outcome_complete.get(y), "x2", f"y={y}")

        elif block == "joint":
            primary = self.mi1_joint if method == "MI1" else self.mi2_joint
            yield PoolLevel.PRIMARY, primary.get(key, DonorPool.empty("joint", key.describe()))
            yield PoolLevel.OUTCOME, self.outcome_complete.get(y, DonorPool.empty("joint", f"y={y}"))

        else:
            primary, outcome = (
                (self.mi2_x1, self.outcome_x1) if block == "x1" else (self.mi2_x2, self.outcome_x2)
            )
            yield PoolLevel.PRIMARY, primary.get(key, DonorPool.empty(block, key.describe()))
            yield PoolLevel.OUTCOME, outcome.get(y, DonorPool.empty(block, f"y={y}"))

    def resolve(self, i: int, method: Method, block: Block) -> Resolution:
        return resolve_pool(self, i, method, block)


def _describe(conditioning: Tuple[StratumKey, LevelVector]) -> str:
    key, other = conditioning
    return f"{key.describe()} other=({', '.join(l.token for l in other)})"


def _restrict(pool: Optional[DonorPool], block: Block, key) -> DonorPool:
    description = key.describe() if isinstance(key, StratumKey) else str(key)
    if pool is None:
        return DonorPool.empty(block, description)
    return DonorPool(pool.donors, pool.weights, block, pool.conditioning)


def resolve_pool(index: DonorIndex, i: int, method: Method, block: Block) -> Resolution:
    """
    First nonempty pool of the record's fallback chain.

    Raises EmptyPoolError naming the record and its primary key when
    every pool is empty.
    """
    primary_key = None
    for level, pool in index.candidates(i, method, block):
        if primary_key is None:
            primary_key = pool.conditioning
        if not pool.is_empty:
            if level is not PoolLevel.PRIMARY:
                logger.debug(
                    "[POOLS] Fallback | record=%d | method=%s | block=%s | level=%s",
                    i, method, block, level.value,
                )
            return Resolution(pool, level)

    raise EmptyPoolError(i, primary_key or "")


# ============================================================
# Construction
# ============================================================

def _group(eligible: np.ndarray, *codes: np.ndarray) -> Dict[Tuple[int, ...], np.ndarray]:
    """Ascending record indices of eligible records, grouped by code tuple."""
    idx = np.flatnonzero(eligible)
    if idx.size == 0:
        return {}

    stacked = np.stack([c[idx] for c in codes], axis=1)
    unique, inverse = np.unique(stacked, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)

    order = np.argsort(inverse, kind="stable")
    splits = np.cumsum(np.bincount(inverse, minlength=unique.shape[0]))[:-1]

    return {
        tuple(int(c) for c in key): members
        for key, members in zip(unique, np.split(idx[order], splits))
    }


def build_donor_index(dataset: Dataset) -> DonorIndex:
    """
    Uniform-weight donor pools for every conditioning key that has donors.

    Keys without donors have no entry; :func:`resolve_pool` treats them as
    empty and walks the fallback chain.
    """
    delta = dataset.delta
    strata = dataset.strata
    stratum = dataset.stratum_codes
    x1_codes = dataset.block_codes("x1")
    x2_codes = dataset.block_codes("x2")
    x1_levels = dataset.block_levels("x1")
    x2_levels = dataset.block_levels("x2")
    y = dataset.y.astype(np.int64)

    complete = delta == 1
    has_x1 = np.isin(delta, (1, 3))
    has_x2 = np.isin(delta, (1, 2))

    def levels(table: List[tuple], code: int) -> LevelVector:
        return tuple(Level(t) for t in table[code])

    def by_stratum(eligible: np.ndarray, block: Block) -> Dict[StratumKey, DonorPool]:
        return {
            strata[s]: DonorPool.uniform(members, block, strata[s].describe())
            for (s,), members in _group(eligible, stratum).items()
        }

    def by_outcome(eligible: np.ndarray, block: Block) -> Dict[int, DonorPool]:
        return {
            k: DonorPool.uniform(members, block, f"y={k}")
            for (k,), members in _group(eligible, y).items()
        }

    mi1_x1_given = {}
    for (s, c), members in _group(complete, stratum, x2_codes).items():
        key = (strata[s], levels(x2_levels, c))
        mi1_x1_given[key] = DonorPool.uniform(members, "x1", _describe(key))

    mi1_x2_given = {}
    for (s, c), members in _group(complete, stratum, x1_codes).items():
        key = (strata[s], levels(x1_levels, c))
        mi1_x2_given[key] = DonorPool.uniform(members, "x2", _describe(key))

    joint = by_stratum(complete, "joint")

    index = DonorIndex(
        dataset=dataset,
        mi1_x1_given=mi1_x1_given,
        mi1_x2_given=mi1_x2_given,
        mi1_joint=joint,
        mi2_x1=by_stratum(has_x1, "x1"),
        mi2_x2=by_stratum(has_x2, "x2"),
        mi2_joint=joint,
        outcome_complete=by_outcome(complete, "joint"),
        outcome_x1=by_outcome(has_x1, "x1"),
        outcome_x2=by_outcome(has_x2, "x2"),
    )

    logger.info(
        "[POOLS] Built donor index | mi1_x1=%d | mi1_x2=%d | joint=%d | mi2_x1=%d | mi2_x2=%d",
        len(mi1_x1_given),
        len(mi1_x2_given),
        len(joint),
        len(index.mi2_x1),
        len(index.mi2_x2),
    )
    return index


def fallback_report(index: DonorIndex) -> List[FallbackEvent]:
    """
    Every non-primary resolution the dataset's incomplete records need,
    for both methods.

    A chain with no nonempty pool is listed at level EXHAUSTED under its
    primary key instead of raising.
    """
    events: List[FallbackEvent] = []
    delta = index.dataset.delta

    for i in np.flatnonzero(delta != 1):
        blocks: Tuple[Block, ...] = {2: ("x1",), 3: ("x2",), 4: ("joint",)}[int(delta[i])]
        for method in ("MI1", "MI2"):
            for block in blocks:
                try:
                    resolution = resolve_pool(index, int(i), method, block)
                except EmptyPoolError as e:
                    events.append(FallbackEvent(int(i), method, block, PoolLevel.EXHAUSTED, e.key))
                    continue
                if resolution.level is not PoolLevel.PRIMARY:
                    events.append(
                        FallbackEvent(int(i), method, block, resolution.level, resolution.pool.conditioning)
                    )

    if events:
        exhausted = sum(e.level is PoolLevel.EXHAUSTED for e in events)
        logger.warning(
            "[POOLS] Fallback report | events=%d | records=%d | exhausted=%d",
            len(events),
            len({e.record for e in events}),
            exhausted,
        )
    return events
