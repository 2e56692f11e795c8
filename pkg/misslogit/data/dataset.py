from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DatasetValidationError
from ..models.record import (
    Level,
    Record,
    StratumKey,
    canonical_token,
    derive_pattern,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ColumnLayout:
    """Column names of each role, in declaration order."""

    x1: Tuple[str, ...]
    x2: Tuple[str, ...]
    z: Tuple[str, ...]
    w: Tuple[str, ...]
    outcome: str = "y"

    def __post_init__(self):
        if not self.x1 or not self.x2:
            raise DatasetValidationError("Both covariate blocks need at least one column")

    @classmethod
    def default(cls, s: int, p: int, q: int, r: int) -> "ColumnLayout":
        return cls(
            x1=tuple(f"x1_{k + 1}" for k in range(s)),
            x2=tuple(f"x2_{k + 1}" for k in range(p - s)),
            z=tuple(f"z_{k + 1}" for k in range(q)),
            w=tuple(f"w_{k + 1}" for k in range(r)),
        )

    @property
    def dims(self) -> Tuple[int, int, int, int]:
        """(s, p, q, w-dim) as in the model notation."""
        s = len(self.x1)
        return s, s + len(self.x2), len(self.z), len(self.w)

    @property
    def coefficient_names(self) -> List[str]:
        return ["(Intercept)", *self.x1, *self.x2, *self.z]


def _token_matrix(rows: Sequence, width: int, name: str) -> np.ndarray:
    out = np.empty((len(rows), width), dtype=object)
    for i, row in enumerate(rows):
        if row is None:
            out[i, :] = None
            continue
        if any(v is None for v in row):
            raise DatasetValidationError(
                f"Block '{name}' is only partially observed", row=i
            )
        if len(row) != width:
            raise DatasetValidationError(
                f"Block '{name}' has {len(row)} entries, expected {width}", row=i
            )
        out[i, :] = [v.token if isinstance(v, Level) else canonical_token(v) for v in row]
    return out


def _codes(matrix: np.ndarray) -> Tuple[np.ndarray, List[tuple]]:
    """
    Exact-equality grouping of the rows of a token matrix.

    Rows containing None get code -1. Returns (codes, unique row tuples).
    """
    n = matrix.shape[0]
    codes = np.full(n, -1, dtype=np.int64)
    present = np.array([row[0] is not None for row in matrix]) if matrix.shape[1] else np.ones(n, bool)

    lookup: Dict[tuple, int] = {}
    for i in np.flatnonzero(present):
        key = tuple(matrix[i])
        codes[i] = lookup.setdefault(key, len(lookup))

    # Relabel in sorted key order so codes do not depend on row order
    keys = sorted(lookup, key=lambda k: tuple(map(str, k)))
    remap = np.empty(len(lookup), dtype=np.int64)
    for new, key in enumerate(keys):
        remap[lookup[key]] = new
    codes[present] = remap[codes[present]]

    return codes, keys


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    A missing-data logistic regression sample.

    Immutable after construction. Covariate values are canonical tokens
    held in object arrays (None for an absent block); numeric design
    matrices are materialised on demand.
    """

    y: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    z: np.ndarray
    w: np.ndarray
    delta: np.ndarray
    layout: ColumnLayout
    missing_token: str = field(default="NA", compare=False)

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def from_records(
        cls,
        records: Iterable[Record],
        layout: Optional[ColumnLayout] = None,
    ) -> "Dataset":
        records = list(records)
        if not records:
            raise DatasetValidationError("Dataset must contain at least one record")

        first = records[0]
        s = len(first.x1) if first.x1 is not None else None
        p_s = len(first.x2) if first.x2 is not None else None

        if s is None:
            s = next((len(r.x1) for r in records if r.x1 is not None), 0)
        if p_s is None:
            p_s = next((len(r.x2) for r in records if r.x2 is not None), 0)

        layout = layout or ColumnLayout.default(s, s + p_s, len(first.z), len(first.w))

        return cls.from_arrays(
            y=[r.y for r in records],
            x1=[r.x1 for r in records],
            x2=[r.x2 for r in records],
            z=[r.z for r in records],
            w=[r.w for r in records],
            layout=layout,
        )

    @classmethod
    def from_arrays(
        cls,
        y: Sequence[int],
        x1: Sequence,
        x2: Sequence,
        z: Sequence,
        w: Sequence,
        layout: ColumnLayout,
        missing_token: str = "NA",
    ) -> "Dataset":
        """
        Build and validate a dataset from per-record block sequences.

        A block entry of None marks the block absent; the pattern code of
        every record is derived from block presence.
        """
        y_arr = np.asarray(y)
        n = y_arr.shape[0]

        if n == 0:
            raise DatasetValidationError("Dataset must contain at least one record")

        bad = ~np.isin(y_arr, (0, 1))
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise DatasetValidationError(f"Outcome must be 0/1, got {y_arr[row]!r}", row=row)

        s, p, q, r = layout.dims

        x1_m = _token_matrix(x1, s, "x1")
        x2_m = _token_matrix(x2, p - s, "x2")
        z_m = _token_matrix(z, q, "z")
        w_m = _token_matrix(w, r, "w")

        for name, m in (("z", z_m), ("w", w_m)):
            if m.size and np.any(m == None):  # noqa: E711
                row = int(np.flatnonzero((m == None).any(axis=1))[0])  # noqa: E711
                raise DatasetValidationError(f"Block '{name}' must always be observed", row=row)

        x1_present = np.array([v is not None for v in x1])
        x2_present = np.array([v is not None for v in x2])

        delta = np.array(
            [derive_pattern(a, b) for a, b in zip(x1_present, x2_present)],
            dtype=np.int8,
        )

        dataset = cls(
            y=y_arr.astype(np.int8),
            x1=x1_m,
            x2=x2_m,
            z=z_m,
            w=w_m,
            delta=delta,
            layout=layout,
            missing_token=missing_token,
        )
        dataset._validate()
        return dataset

    def _validate(self) -> None:
        if not np.any(self.delta == 1):
            raise DatasetValidationError("Dataset has no complete case (pattern 1)")

        logger.debug(
            "[DATASET] Validated | n=%d | patterns=%s",
            self.n,
            self.pattern_counts(),
        )

    # ------------------------------------------------------------------
    # Shape
    # ------------------------------------------------------------------

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    def __len__(self) -> int:
        return self.n

    @property
    def dims(self) -> Tuple[int, int, int, int]:
        return self.layout.dims

    @property
    def n_coef(self) -> int:
        s, p, q, _ = self.dims
        return 1 + p + q

    def pattern_counts(self) -> Dict[int, int]:
        counts = np.bincount(self.delta, minlength=5)
        return {j: int(counts[j]) for j in (1, 2, 3, 4)}

    def pattern_fractions(self) -> Dict[int, float]:
        return {j: c / self.n for j, c in self.pattern_counts().items()}

    def indicators(self) -> np.ndarray:
        """(n, 4) 0/1 matrix whose column j-1 is delta_j."""
        return (self.delta[:, None] == np.arange(1, 5)[None, :]).astype(float)

    @property
    def complete_mask(self) -> np.ndarray:
        return self.delta == 1

    @property
    def x1_present(self) -> np.ndarray:
        return np.isin(self.delta, (1, 3))

    @property
    def x2_present(self) -> np.ndarray:
        return np.isin(self.delta, (1, 2))

    # ------------------------------------------------------------------
    # Records
    # ------------------------------------------------------------------

    def record(self, i: int) -> Record:
        x1 = None if self.x1.shape[1] and self.x1[i, 0] is None else tuple(map(Level, self.x1[i]))
        x2 = None if self.x2.shape[1] and self.x2[i, 0] is None else tuple(map(Level, self.x2[i]))
        if self.delta[i] in (2, 4):
            x1 = None
        if self.delta[i] in (3, 4):
            x2 = None
        return Record(
            y=int(self.y[i]),
            x1=x1,
            x2=x2,
            z=tuple(map(Level, self.z[i])),
            w=tuple(map(Level, self.w[i])),
            delta=int(self.delta[i]),
        )

    @property
    def records(self) -> List[Record]:
        return [self.record(i) for i in range(self.n)]

    # ------------------------------------------------------------------
    # Strata
    # ------------------------------------------------------------------

    @cached_property
    def _strata(self) -> Tuple[np.ndarray, List[StratumKey]]:
        combined = np.concatenate(
            [np.array([str(v) for v in self.y], dtype=object)[:, None], self.z, self.w],
            axis=1,
        )
        codes, keys = _codes(combined)
        strata = [
            StratumKey(int(k[0]), tuple(Level(t) for t in k[1:]))
            for k in keys
        ]
        return codes, strata

    @property
    def stratum_codes(self) -> np.ndarray:
        """Per-record index into :attr:`strata`."""
        return self._strata[0]

    @property
    def strata(self) -> List[StratumKey]:
        return self._strata[1]

    def stratum_key(self, i: int) -> StratumKey:
        return self.strata[self.stratum_codes[i]]

    @cached_property
    def _block_codes(self) -> Dict[str, Tuple[np.ndarray, List[tuple]]]:
        x1 = self.x1.copy()
        x2 = self.x2.copy()
        x1[~self.x1_present] = None
        x2[~self.x2_present] = None
        return {"x1": _codes(x1), "x2": _codes(x2)}

    def block_codes(self, block: str) -> np.ndarray:
        """Per-record code of the block's value vector, -1 where absent."""
        return self._block_codes[block][0]

    def block_levels(self, block: str) -> List[tuple]:
        return self._block_codes[block][1]

    # ------------------------------------------------------------------
    # Numeric materialisation
    # ------------------------------------------------------------------

    def _numeric(self, matrix: np.ndarray, name: str, present: np.ndarray) -> np.ndarray:
        out = np.full(matrix.shape, np.nan)
        cache: Dict[str, float] = {}
        for i in np.flatnonzero(present):
            for j in range(matrix.shape[1]):
                token = matrix[i, j]
                if token not in cache:
                    try:
                        cache[token] = Level(token).numeric
                    except ValueError:
                        raise DatasetValidationError(
                            f"Level '{token}' is not numeric", row=i, column=name
                        ) from None
                out[i, j] = cache[token]
        return out

    @cached_property
    def design(self) -> np.ndarray:
        """
        (n, 1+p+q) design matrix (1, x1, x2, z); NaN in absent blocks.
        """
        ones = np.ones((self.n, 1))
        x1 = self._numeric(self.x1, "x1", self.x1_present)
        x2 = self._numeric(self.x2, "x2", self.x2_present)
        z = self._numeric(self.z, "z", np.ones(self.n, bool))
        design = np.hstack([ones, x1, x2, z])
        design.setflags(write=False)
        return design

    @property
    def x1_slice(self) -> slice:
        s = self.dims[0]
        return slice(1, 1 + s)

    @property
    def x2_slice(self) -> slice:
        s, p, _, _ = self.dims
        return slice(1 + s, 1 + p)

    # ------------------------------------------------------------------
    # Derived datasets
    # ------------------------------------------------------------------

    def subset(self, mask: np.ndarray) -> "Dataset":
        mask = np.asarray(mask, dtype=bool)
        return Dataset(
            y=self.y[mask],
            x1=self.x1[mask],
            x2=self.x2[mask],
            z=self.z[mask],
            w=self.w[mask],
            delta=self.delta[mask],
            layout=self.layout,
            missing_token=self.missing_token,
        )._checked()

    def complete_cases(self) -> "Dataset":
        return self.subset(self.complete_mask)

    def with_masked(self, block: str, mask: np.ndarray) -> "Dataset":
        """Copy with ``block`` additionally absent wherever ``mask`` is True."""
        mask = np.asarray(mask, dtype=bool)
        x1_present = self.x1_present & ~(mask if block == "x1" else False)
        x2_present = self.x2_present & ~(mask if block == "x2" else False)

        delta = np.where(
            x1_present & x2_present, 1,
            np.where(x2_present, 2, np.where(x1_present, 3, 4)),
        ).astype(np.int8)

        x1 = self.x1.copy()
        x2 = self.x2.copy()
        x1[~x1_present] = None
        x2[~x2_present] = None

        return Dataset(
            y=self.y, x1=x1, x2=x2, z=self.z, w=self.w,
            delta=delta, layout=self.layout, missing_token=self.missing_token,
        )._checked()

    def _checked(self) -> "Dataset":
        if self.n == 0:
            raise DatasetValidationError("Dataset must contain at least one record")
        self._validate()
        return self
