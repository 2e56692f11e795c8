"""
Nonparametric per-stratum selection probabilities.

For every observed (Y, V) stratum the table stores the pattern counts
n_1..n_4 and their total, and pi_j = n_j / n_total. Strata never seen in
the sample have no entry; zero probabilities are kept as zeros.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Tuple

import numpy as np
import pandas as pd

from ..data.dataset import Dataset
from ..errors import SelectionLookupError
from ..models.record import StratumKey

logger = logging.getLogger(__name__)

Probabilities = Tuple[float, float, float, float]


@dataclass(frozen=True, eq=False)
class SelectionTable:
    """
    Immutable map StratumKey -> (pi1, pi2, pi3, pi4) with raw counts.

    ``counts`` has one row per stratum: n_1, n_2, n_3, n_4, n_total.
    """

    keys: Tuple[StratumKey, ...]
    counts: np.ndarray
    _index: Dict[StratumKey, int] = field(init=False, repr=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (len(self.keys), 5):
            raise ValueError(f"counts must be ({len(self.keys)}, 5), got {counts.shape}")
        if np.any(counts[:, :4].sum(axis=1) != counts[:, 4]):
            raise ValueError("pattern counts must sum to the stratum total")

        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(self.keys)})

    # ------------------------------------------------------------------
    # Mapping interface
    # ------------------------------------------------------------------

    @property
    def probs(self) -> np.ndarray:
        """(K, 4) array of pi_j = n_j / n_total, one row per stratum."""
        return self.counts[:, :4] / self.counts[:, 4:5]

    def __len__(self) -> int:
        return len(self.keys)

    def __iter__(self) -> Iterator[StratumKey]:
        return iter(self.keys)

    def __contains__(self, key: object) -> bool:
        return key in self._index

    def __getitem__(self, key: StratumKey) -> Probabilities:
        return lookup(self, key)

    def index_of(self, key: StratumKey) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise SelectionLookupError(
                f"Stratum not in selection table | key={key.describe()}"
            ) from None

    def stratum_counts(self, key: StratumKey) -> Tuple[int, int, int, int, int]:
        return tuple(int(c) for c in self.counts[self.index_of(key)])

    # ------------------------------------------------------------------
    # Per-record view
    # ------------------------------------------------------------------

    def record_probs(self, dataset: Dataset) -> np.ndarray:
        """
        (n, 4) matrix whose row i holds the probabilities of record i's stratum.

        Raises SelectionLookupError when a record's stratum is not in the table.
        """
        rows = np.array([self.index_of(key) for key in dataset.strata], dtype=np.int64)
        return self.probs[rows[dataset.stratum_codes]]

    # ------------------------------------------------------------------
    # Export
    # ------------------------------------------------------------------

    def to_frame(self, v_names: List[str] | None = None) -> pd.DataFrame:
        width = len(self.keys[0].v) if self.keys else 0
        v_names = v_names or [f"v{k + 1}" for k in range(width)]

        rows = []
        for key, count, prob in zip(self.keys, self.counts, self.probs):
            row = {"y": key.y}
            row.update({name: str(level) for name, level in zip(v_names, key.v)})
            row.update({f"n{j + 1}": int(count[j]) for j in range(4)})
            row["n_total"] = int(count[4])
            row.update({f"pi{j + 1}": float(prob[j]) for j in range(4)})
            rows.append(row)

        return pd.DataFrame(rows)

    def write_csv(self, path: str | Path, v_names: List[str] | None = None) -> None:
        self.to_frame(v_names).to_csv(path, index=False, float_format="%.6f")
        logger.info("[SELECTION] Wrote table %s | strata=%d", path, len(self))


def estimate_selection_probs(dataset: Dataset) -> SelectionTable:
    """
    Empirical pattern frequencies within each observed (Y, V) stratum.
    """
    codes = dataset.stratum_codes
    n_strata = len(dataset.strata)

    counts = np.zeros((n_strata, 5), dtype=np.int64)
    np.add.at(counts, (codes, dataset.delta.astype(np.int64) - 1), 1)
    counts[:, 4] = counts[:, :4].sum(axis=1)

    table = SelectionTable(tuple(dataset.strata), counts)

    logger.info(
        "[SELECTION] Estimated | strata=%d | sparse=%d",
        n_strata,
        int(np.sum(counts[:, 0] == 0)),
    )
    return table


def lookup(table: SelectionTable, key: StratumKey) -> Probabilities:
    """Stored (pi1, pi2, pi3, pi4) of ``key``; SelectionLookupError if absent."""
    row = table.probs[table.index_of(key)]
    return tuple(float(p) for p in row)
