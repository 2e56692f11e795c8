from __future__ import annotations

import numpy as np
from scipy import linalg

from ..errors import VarianceError


def guarded_inverse(matrix: np.ndarray, cond_limit: float = 1e12, what: str = "matrix") -> np.ndarray:
    """LU-based inverse that refuses ill-conditioned input."""
    matrix = np.asarray(matrix, dtype=float)

    if not np.all(np.isfinite(matrix)):
        raise VarianceError(f"{what} has non-finite entries")

    condition = float(np.linalg.cond(matrix))
    if not np.isfinite(condition) or condition > cond_limit:
        raise VarianceError(f"{what} is singular or ill-conditioned", condition=condition)

    lu, piv = linalg.lu_factor(matrix, check_finite=False)
    return linalg.lu_solve((lu, piv), np.eye(matrix.shape[0]), check_finite=False)


def sandwich(bread: np.ndarray, meat: np.ndarray, n: int, cond_limit: float = 1e12) -> np.ndarray:
    """
    Per-estimate covariance G^{-1} M G^{-T} / n for averaged bread and meat.
    """
    inv = guarded_inverse(bread, cond_limit, what="gradient matrix G")
    cov = inv @ meat @ inv.T / n
    return 0.5 * (cov + cov.T)


def outer_mean(rows: np.ndarray) -> np.ndarray:
    """(1/n) sum_i a_i a_i' for the rows a_i of ``rows``."""
    return rows.T @ rows / rows.shape[0]
