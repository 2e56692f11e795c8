"""
CSV ingestion and export of missing-data datasets.

Rows are reported 1-based, counting data lines after the header, so an
error on ``row=2`` points at the second record of the file.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from ..errors import DatasetValidationError, SchemaError
from .dataset import ColumnLayout, Dataset
from .schema import ColumnSchema

logger = logging.getLogger(__name__)

_OUTCOME_TOKENS = {"0": 0, "1": 1}


def load_csv(path: str | Path, schema: ColumnSchema) -> Dataset:
    """
    Read a delimited file into a validated :class:`Dataset`.

    Raises
    ------
    SchemaError
        Header and schema disagree.
    DatasetValidationError
        Missing token outside x1/x2, partial block missingness, or an
        outcome token other than 0/1.
    """
    try:
        frame = pd.read_csv(
            path,
            sep=schema.delimiter,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            skipinitialspace=False,
            comment=None,
        )
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DatasetValidationError(f"Cannot parse {path}: {e}") from e

    dataset = from_frame(frame, schema)

    logger.info(
        "[LOADER] Loaded %s | n=%d | patterns=%s",
        path,
        dataset.n,
        dataset.pattern_counts(),
    )
    return dataset


def from_frame(frame: pd.DataFrame, schema: ColumnSchema) -> Dataset:
    header = list(frame.columns)

    unassigned = [c for c in header if c not in schema.columns]
    if unassigned:
        raise SchemaError(f"CSV columns without a role: {unassigned}")

    absent = [c for c in schema.columns if c not in header]
    if absent:
        raise SchemaError(f"Schema columns missing from CSV header: {absent}")

    if frame.empty:
        raise DatasetValidationError("CSV contains no data rows")

    na = schema.missing_token
    cells = frame.apply(lambda col: col.str.strip())

    # ------------------------------------------------------------------
    # Always-observed columns
    # ------------------------------------------------------------------

    for role in ("outcome", "z", "w"):
        for column in schema.role_columns(role):
            hits = np.flatnonzero(cells[column].to_numpy() == na)
            if hits.size:
                raise DatasetValidationError(
                    f"Missing token '{na}' in always-observed column",
                    row=int(hits[0]) + 1,
                    column=column,
                )

    outcome_raw = cells[schema.outcome].to_numpy()
    y = np.empty(len(outcome_raw), dtype=np.int8)
    for i, token in enumerate(outcome_raw):
        if token not in _OUTCOME_TOKENS:
            raise DatasetValidationError(
                f"Unknown outcome token '{token}'",
                row=i + 1,
                column=schema.outcome,
            )
        y[i] = _OUTCOME_TOKENS[token]

    # ------------------------------------------------------------------
    # Missable blocks
    # ------------------------------------------------------------------

    blocks = {}
    for role in ("x1", "x2"):
        columns = schema.role_columns(role)
        values = cells[columns].to_numpy(dtype=object)
        missing = values == na

        partial = missing.any(axis=1) & ~missing.all(axis=1)
        if partial.any():
            row = int(np.flatnonzero(partial)[0])
            raise DatasetValidationError(
                f"Block '{role}' is only partially missing",
                row=row + 1,
                column=columns[int(np.flatnonzero(missing[row])[0])],
            )

        absent_rows = missing.all(axis=1)
        blocks[role] = [
            None if absent_rows[i] else tuple(values[i])
            for i in range(values.shape[0])
        ]

    layout = ColumnLayout(
        x1=tuple(schema.role_columns("x1")),
        x2=tuple(schema.role_columns("x2")),
        z=tuple(schema.role_columns("z")),
        w=tuple(schema.role_columns("w")),
        outcome=schema.outcome,
    )

    return Dataset.from_arrays(
        y=y,
        x1=blocks["x1"],
        x2=blocks["x2"],
        z=[tuple(r) for r in cells[list(layout.z)].to_numpy(dtype=object)],
        w=[tuple(r) for r in cells[list(layout.w)].to_numpy(dtype=object)],
        layout=layout,
        missing_token=na,
    )


def to_frame(dataset: Dataset, columns: Optional[List[str]] = None) -> pd.DataFrame:
    """
    Tabular view of a dataset with absent cells set to its missing token.

    ``columns`` fixes the output order (defaults to outcome, x1, x2, z, w).
    """
    layout = dataset.layout
    na = dataset.missing_token

    x1 = dataset.x1.copy()
    x2 = dataset.x2.copy()
    x1[~dataset.x1_present] = na
    x2[~dataset.x2_present] = na

    data = {layout.outcome: dataset.y.astype(int).astype(str)}
    for names, matrix in ((layout.x1, x1), (layout.x2, x2), (layout.z, dataset.z), (layout.w, dataset.w)):
        for j, name in enumerate(names):
            data[name] = matrix[:, j]

    frame = pd.DataFrame(data)
    if columns is not None:
        frame = frame[columns]
    return frame


def write_csv(dataset: Dataset, path: str | Path, schema: Optional[ColumnSchema] = None) -> None:
    """
    Write a dataset in the layout :func:`load_csv` reads.

    Cells hold canonical tokens, so "0.40" is written back as "0.4" and
    "1.0" as "1". Columns a schema marks ``ignore`` are not part of a
    Dataset and are not written. Loading the output therefore reproduces
    the dataset, not the original file bytes.
    """
    columns = schema.declared_order if schema is not None else None
    delimiter = schema.delimiter if schema is not None else ","
    to_frame(dataset, columns).to_csv(path, sep=delimiter, index=False)
    logger.info("[LOADER] Wrote %s | n=%d", path, dataset.n)
