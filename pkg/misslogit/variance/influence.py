"""
Plug-in quantities of the proposed MI variances.

S*_k(i) is the conditional mean of record i's score given what pattern k
observes, estimated from the same donor pools (and the same fallback
chain) the imputation step draws from:

    S*_2   X1 unknown: pool MI1 x1 | (Y, X2, V), needed for patterns 1, 2
    S*_3   X2 unknown: pool MI1 x2 | (Y, X1, V), needed for patterns 1, 3
    S*_4   both unknown: pool joint | (Y, V), needed for every record

Inapplicable entries are zero and flagged False in ``applicable``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np

from ..core.logit import inv_logit, score_rows
from ..data.dataset import Dataset
from ..errors import VarianceError
from ..imputation.pools import (
    Block,
    DonorIndex,
    DonorPool,
    FallbackEvent,
    PoolLevel,
    _group,
    build_donor_index,
    resolve_pool,
)
from ..imputation.sampler import CompletedSets
from ..models.record import Record, stratum_key
from ..selection.table import SelectionTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConditionalScores:
    """
    Per-record S* vectors.

    ``values[:, j]`` holds S*_{j+2} (shape (n, 3, d)); ``levels[i][j]`` is
    the pool level used, None where not applicable.
    """

    values: np.ndarray
    applicable: np.ndarray
    levels: Tuple[Tuple[Optional[PoolLevel], ...], ...]
    events: Tuple[FallbackEvent, ...] = ()

    @property
    def s2(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def s3(self) -> np.ndarray:
        return self.values[:, 1]

    @property
    def s4(self) -> np.ndarray:
        return self.values[:, 2]


@dataclass(frozen=True, eq=False)
class InfluenceSet:
    """One influence vector per record (complete or not)."""

    values: np.ndarray
    method: Literal["MI1", "MI2"]

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def meat(self) -> np.ndarray:
        """(1/n) sum_i a_i a_i'."""
        return self.values.T @ self.values / self.n


# ============================================================
# Conditional score means
# ============================================================

def _pool_mean(
    dataset: Dataset,
    beta: np.ndarray,
    record: int,
    pool: DonorPool,
    block: Block,
) -> np.ndarray:
    """
    Pool-weighted mean of record's score with ``block`` taken from each donor.
    """
    design = dataset.design
    x = np.repeat(design[record][None, :], len(pool), axis=0)

    if block in ("x1", "joint"):
        x[:, dataset.x1_slice] = design[pool.donors, dataset.x1_slice]
    if block in ("x2", "joint"):
        x[:, dataset.x2_slice] = design[pool.donors, dataset.x2_slice]

    scores = score_rows(beta, x, np.full(len(pool), float(dataset.y[record])))
    return pool.weights @ scores


# Conditional score k -> (block left unknown, patterns needing it, other block)
_COMPONENTS: Tuple[Tuple[Block, Tuple[int, ...], Optional[str]], ...] = (
    ("x1", (1, 2), "x2"),
    ("x2", (1, 3), "x1"),
    ("joint", (1, 2, 3, 4), None),
)


def _conditional_scores(
    dataset: Dataset,
    beta: np.ndarray,
    index: DonorIndex,
    components: Tuple[int, ...],
) -> ConditionalScores:
    beta = np.asarray(beta, dtype=float)
    n, d = dataset.n, dataset.n_coef

    values = np.zeros((n, 3, d))
    applicable = np.zeros((n, 3), dtype=bool)
    levels: List[List[Optional[PoolLevel]]] = [[None, None, None] for _ in range(n)]
    events: List[FallbackEvent] = []

    for j in components:
        block, patterns, other = _COMPONENTS[j]
        needs = np.isin(dataset.delta, patterns)
        if not needs.any():
            continue

        # Records sharing these codes share the pool and the known covariates
        if other is None:
            groups = _group(needs, dataset.stratum_codes)
        else:
            groups = _group(needs, dataset.stratum_codes, dataset.block_codes(other))

        for members in groups.values():
            first = int(members[0])
            resolution = resolve_pool(index, first, "MI1", block)

            values[members, j] = _pool_mean(dataset, beta, first, resolution.pool, block)
            applicable[members, j] = True

            for i in members:
                levels[i][j] = resolution.level
                if resolution.level is not PoolLevel.PRIMARY:
                    events.append(
                        FallbackEvent(int(i), "MI1", block, resolution.level, resolution.pool.conditioning)
                    )

    if events:
        logger.warning("[VARIANCE] Conditional scores used fallback pools | records=%d", len(events))

    return ConditionalScores(
        values=values,
        applicable=applicable,
        levels=tuple(tuple(row) for row in levels),
        events=tuple(events),
    )


def sstar_mi1(
    dataset: Dataset,
    beta: np.ndarray,
    index: Optional[DonorIndex] = None,
) -> ConditionalScores:
    """S*_2, S*_3 and S*_4 for every record that needs them."""
    return _conditional_scores(dataset, beta, index or build_donor_index(dataset), (0, 1, 2))


def sstar_mi2(
    dataset: Dataset,
    beta: np.ndarray,
    index: Optional[DonorIndex] = None,
) -> np.ndarray:
    """(n, d) S*_i, the (Y, V) complete-case mean; equals S*_4 of MI1."""
    scores = _conditional_scores(dataset, beta, index or build_donor_index(dataset), (2,))
    return scores.s4


# ============================================================
# Selection-probability weights
# ============================================================

def _eta(delta: np.ndarray, probs: np.ndarray) -> np.ndarray:
    d1, d2, d3 = (delta == 1), (delta == 2), (delta == 3)
    pi1, pi2, pi3, pi4 = probs.T

    terms = (
        (d1 | d3, pi2, pi1 + pi3),
        (d1 | d2, pi3, pi1 + pi2),
        (d1, pi4, pi1),
    )

    eta = np.zeros(delta.shape[0])
    for live, numerator, denominator in terms:
        if np.any(live & (denominator <= 0)):
            row = int(np.flatnonzero(live & (denominator <= 0))[0])
            raise VarianceError(f"Zero selection-probability denominator for record {row}")
        eta[live] += numerator[live] / denominator[live]
    return eta


def eta_hat(record: Record, table: SelectionTable) -> float:
    """
    (d1+d3) pi2/(pi1+pi3) + (d1+d2) pi3/(pi1+pi2) + d1 pi4/pi1 at the
    record's own pattern and stratum.
    """
    probs = np.array([table[stratum_key(record)]])
    return float(_eta(np.array([record.delta]), probs)[0])


def eta_values(dataset: Dataset, table: SelectionTable) -> np.ndarray:
    return _eta(dataset.delta, table.record_probs(dataset))


def _observed_scores(dataset: Dataset, beta: np.ndarray) -> np.ndarray:
    """S_i for complete records, zero elsewhere."""
    scores = np.zeros((dataset.n, dataset.n_coef))
    mask = dataset.complete_mask
    scores[mask] = score_rows(beta, dataset.design[mask], dataset.y[mask].astype(float))
    return scores


# ============================================================
# Influence vectors
# ============================================================

def phi_hat(
    dataset: Dataset,
    beta: np.ndarray,
    table: SelectionTable,
    sstar: Optional[ConditionalScores] = None,
    index: Optional[DonorIndex] = None,
) -> InfluenceSet:
    """
    MI1 influence: d1 S / pi1 + sum_k S*_k (d_k - d1 pi_k / pi1), k = 2..4.
    """
    beta = np.asarray(beta, dtype=float)
    if sstar is None:
        sstar = sstar_mi1(dataset, beta, index)
    probs = table.record_probs(dataset)
    delta = dataset.delta

    complete = delta == 1
    if np.any(probs[complete, 0] <= 0):
        raise VarianceError("Complete record in a stratum with pi1 = 0")

    values = np.zeros((dataset.n, dataset.n_coef))
    values[complete] = _observed_scores(dataset, beta)[complete] / probs[complete, 0:1]

    for j, k in enumerate((2, 3, 4)):
        coefficient = (delta == k).astype(float)
        coefficient[complete] -= probs[complete, k - 1] / probs[complete, 0]
        values += sstar.values[:, j] * coefficient[:, None]

    return InfluenceSet(values, "MI1")


def psi_hat(
    dataset: Dataset,
    completed: CompletedSets,
    beta: np.ndarray,
    table: SelectionTable,
    sstar: Optional[np.ndarray] = None,
    index: Optional[DonorIndex] = None,
) -> InfluenceSet:
    """
    MI2 influence: d1 S + sum_k d_k S* + (S~ - S*) eta, with S~ the
    average completed score over the M imputations.
    """
    beta = np.asarray(beta, dtype=float)
    if sstar is None:
        sstar = sstar_mi2(dataset, beta, index)

    residual = completed.y[None, :] - inv_logit(completed.designs @ beta)
    averaged = np.einsum("vn,vnd->nd", residual, completed.designs) / completed.M

    complete = dataset.complete_mask
    observed = _observed_scores(dataset, beta)

    values = np.where(complete[:, None], observed, sstar)
    values = values + (np.where(complete[:, None], observed, averaged) - sstar) * eta_values(dataset, table)[:, None]

    return InfluenceSet(values, "MI2")
