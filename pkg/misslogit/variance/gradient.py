from __future__ import annotations

import numpy as np

from ..core.logit import inv_logit, inv_logit_deriv
from ..imputation.sampler import CompletedSets


def g_matrix(completed: CompletedSets, beta: np.ndarray) -> np.ndarray:
    """
    G(beta) = (1/n) sum_i (1/M) sum_v H'(beta' x_vi) x_vi x_vi'.

    Complete records appear identically in every imputation, so the
    average over v reproduces their delta_1 term exactly.
    """
    h1 = inv_logit_deriv(completed.designs @ beta)
    g = np.einsum("vn,vnj,vnk->jk", h1, completed.designs, completed.designs)
    g /= completed.M * completed.n
    return 0.5 * (g + g.T)


def imputed_scores(completed: CompletedSets, beta: np.ndarray) -> np.ndarray:
    """(M, n, d) scores of every completed record, x_vi (y_i - H(beta' x_vi))."""
    residual = completed.y[None, :] - inv_logit(completed.designs @ beta)
    return completed.designs * residual[..., None]
