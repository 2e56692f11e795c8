"""
Logistic link and per-record score contributions.
"""

from __future__ import annotations

from typing import Union

import numpy as np
from scipy.special import expit

from ..models.record import DesignVector

ArrayLike = Union[float, np.ndarray]


def inv_logit(u: ArrayLike) -> ArrayLike:
    """H(u) = 1 / (1 + exp(-u)); overflow-safe, strictly inside (0, 1) for |u| <= 700."""
    return expit(u)


def inv_logit_deriv(u: ArrayLike) -> ArrayLike:
    """H'(u) = H(u)(1 - H(u)), maximal (0.25) at u = 0."""
    h = expit(u)
    return h * expit(-np.asarray(u))


def score_contrib(beta: np.ndarray, x: Union[DesignVector, np.ndarray], y: int) -> np.ndarray:
    """S(beta) = x (y - H(beta' x))."""
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)

    if beta.shape != x.shape:
        raise ValueError(f"Dimension mismatch: beta {beta.shape} vs x {x.shape}")

    return x * (y - inv_logit(float(beta @ x)))


def score_rows(beta: np.ndarray, design: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise scores, shape (n, d), of a design matrix."""
    design = np.asarray(design, dtype=float)
    if design.shape[-1] != np.asarray(beta).shape[0]:
        raise ValueError(
            f"Dimension mismatch: beta {np.asarray(beta).shape} vs design {design.shape}"
        )
    resid = y - inv_logit(design @ beta)
    return design * resid[..., None]


def information(beta: np.ndarray, design: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Sum_i w_i H'(beta' x_i) x_i x_i' (negative Jacobian of the summed score)."""
    h1 = inv_logit_deriv(design @ beta)
    if weights is not None:
        h1 = h1 * weights
    return np.einsum("i,ij,ik->jk", h1, design, design)
