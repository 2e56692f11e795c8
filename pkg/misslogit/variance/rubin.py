"""
Rubin-type covariance of the MI estimators.
"""

from __future__ import annotations

import logging

import numpy as np

from ..core.linalg import sandwich
from ..errors import VarianceError
from ..imputation.sampler import CompletedSets
from .gradient import g_matrix, imputed_scores

logger = logging.getLogger(__name__)


def rubin_variance(
    completed: CompletedSets,
    beta_hat: np.ndarray,
    cond_limit: float = 1e12,
) -> np.ndarray:
    """
    (1/n) G^{-1} [W + (1 + 1/M) B] G^{-T} at ``beta_hat``.

    With u_vi the completed score of record i in imputation v and
    U_v = sum_i u_vi:

        W = (1/M) sum_v (1/n) sum_i u_vi u_vi'
        B = sum_v (1/n) U_v U_v' / (M - 1)

    B is uncentered: U_v is not corrected by its mean over v.
    """
    M, n = completed.M, completed.n
    if M < 2:
        raise VarianceError(f"Rubin variance needs M >= 2, got M={M}")

    u = imputed_scores(completed, beta_hat)

    within = np.einsum("vnj,vnk->jk", u, u) / (M * n)

    totals = u.sum(axis=1)
    between = totals.T @ totals / (n * (M - 1))

    meat = within + (1.0 + 1.0 / M) * between

    cov = sandwich(g_matrix(completed, beta_hat), meat, n, cond_limit)

    logger.debug(
        "[VARIANCE] Rubin | method=%s | M=%d | between_trace=%.3e",
        completed.method,
        M,
        float(np.trace(between)),
    )
    return cov
