from __future__ import annotations

import logging
from typing import Literal, Optional

import numpy as np

from ..core.linalg import sandwich
from ..data.dataset import Dataset
from ..imputation.pools import DonorIndex, build_donor_index
from ..imputation.sampler import CompletedSets
from ..selection.table import SelectionTable
from .gradient import g_matrix
from .influence import phi_hat, psi_hat

logger = logging.getLogger(__name__)


def proposed_variance(
    dataset: Dataset,
    completed: CompletedSets,
    beta_hat: np.ndarray,
    table: SelectionTable,
    method: Literal["MI1", "MI2"],
    index: Optional[DonorIndex] = None,
    cond_limit: float = 1e12,
) -> np.ndarray:
    """
    Sandwich G^{-1} M G^{-T} / n built from the method's influence vectors.

    M is the mean outer product of phi_hat (MI1) or psi_hat (MI2).
    Raises VarianceError when G is singular or ill-conditioned.
    """
    if method not in ("MI1", "MI2"):
        raise ValueError(f"Unknown MI method: {method}")

    index = index or build_donor_index(dataset)

    if method == "MI1":
        influence = phi_hat(dataset, beta_hat, table, index=index)
    else:
        influence = psi_hat(dataset, completed, beta_hat, table, index=index)

    cov = sandwich(g_matrix(completed, beta_hat), influence.meat(), dataset.n, cond_limit)

    logger.debug(
        "[VARIANCE] Proposed | method=%s | ase=%s",
        method,
        np.array2string(np.sqrt(np.clip(np.diag(cov), 0, None)), precision=4),
    )
    return cov
