"""
Weighted logistic maximum likelihood on fully observed design rows.
"""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from ..config import SolverConfig
from ..data.dataset import Dataset
from ..errors import DatasetValidationError
from ..models.fit_result import FitResult, SolveReport
from .linalg import guarded_inverse
from .logit import information, inv_logit
from .solver import flag_perfect_prediction, solve_estimating_eq

logger = logging.getLogger(__name__)


def fit_logistic(
    design: np.ndarray,
    y: np.ndarray,
    weights: Optional[np.ndarray] = None,
    config: Optional[SolverConfig] = None,
) -> Tuple[SolveReport, np.ndarray]:
    """
    Solve sum_i w_i x_i (y_i - H(beta' x_i)) = 0 from beta = 0.

    Returns the solve report and the weighted information matrix at the
    solution (sum_i w_i H'(beta' x_i) x_i x_i').
    """
    config = config or SolverConfig()
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones(y.shape[0]) if weights is None else np.asarray(weights, dtype=float)

    def score(beta: np.ndarray) -> np.ndarray:
        return design.T @ (w * (y - inv_logit(design @ beta)))

    def neg_jacobian(beta: np.ndarray) -> np.ndarray:
        return information(beta, design, w)

    report = solve_estimating_eq(score, neg_jacobian, np.zeros(design.shape[1]), config=config)

    used = w > 0
    report = flag_perfect_prediction(
        report, inv_logit(design[used] @ report.beta_hat), y[used]
    )

    return report, neg_jacobian(report.beta_hat)


def information_covariance(info: np.ndarray, config: SolverConfig) -> np.ndarray:
    """Inverse observed information, the model-based covariance of beta_hat."""
    return guarded_inverse(info, config.cond_limit, what="information matrix")


def fit_full_ml(dataset: Dataset, config: Optional[SolverConfig] = None) -> FitResult:
    """
    Full-data maximum likelihood; every record must be complete.
    """
    config = config or SolverConfig()

    if not np.all(dataset.complete_mask):
        row = int(np.flatnonzero(~dataset.complete_mask)[0])
        raise DatasetValidationError("Full-data ML requires every record complete", row=row)

    report, info = fit_logistic(dataset.design, dataset.y, config=config)

    logger.info(
        "[FULL] Fitted | n=%d | converged=%s | iterations=%d",
        dataset.n,
        report.converged,
        report.iterations,
    )

    if not report.converged:
        return FitResult("FULL", report.beta_hat, report)

    return FitResult(
        "FULL",
        report.beta_hat,
        report,
        cov=information_covariance(info, config),
        variance_method="INFORMATION",
    )
