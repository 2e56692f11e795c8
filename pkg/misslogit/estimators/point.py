"""
Point estimators: complete-case, SIPW and the shared MI estimating equation.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..config import SolverConfig
from ..core.linalg import outer_mean, sandwich
from ..core.logit import inv_logit, score_rows
from ..core.maximum_likelihood import fit_logistic, information_covariance
from ..core.solver import flag_perfect_prediction, solve_estimating_eq
from ..data.dataset import Dataset
from ..errors import DatasetValidationError, ImputationError
from ..imputation.sampler import CompletedSets
from ..models.fit_result import FitResult
from ..selection.table import SelectionTable
from ..variance.gradient import g_matrix

logger = logging.getLogger(__name__)


def _require_complete_cases(dataset: Dataset, label: str) -> None:
    n_complete = int(dataset.complete_mask.sum())
    if n_complete < dataset.n_coef:
        raise DatasetValidationError(
            f"{label} needs at least {dataset.n_coef} complete cases, got {n_complete}"
        )


def fit_cc(dataset: Dataset, config: Optional[SolverConfig] = None) -> FitResult:
    """
    Logistic ML on the complete cases only.

    Covariance is the inverse observed information of the complete subset.
    """
    config = config or SolverConfig()
    _require_complete_cases(dataset, "CC")

    mask = dataset.complete_mask
    report, info = fit_logistic(dataset.design[mask], dataset.y[mask], config=config)

    logger.info(
        "[CC] Fitted | n_complete=%d | converged=%s | iterations=%d",
        int(mask.sum()),
        report.converged,
        report.iterations,
    )

    if not report.converged:
        return FitResult("CC", report.beta_hat, report)

    return FitResult(
        "CC",
        report.beta_hat,
        report,
        cov=information_covariance(info, config),
        variance_method="INFORMATION",
    )


def sipw_weights(dataset: Dataset, table: SelectionTable) -> np.ndarray:
    """delta_1 / pi1_hat per record (0 for incomplete records)."""
    pi1 = table.record_probs(dataset)[:, 0]
    weights = np.zeros(dataset.n)
    mask = dataset.complete_mask
    weights[mask] = 1.0 / pi1[mask]
    return weights


def fit_sipw(
    dataset: Dataset,
    table: SelectionTable,
    config: Optional[SolverConfig] = None,
) -> FitResult:
    """
    Complete-case scores reweighted by 1 / pi1_hat(Y, V).

    Covariance is the weighted-score sandwich with pi_hat treated as known.
    """
    config = config or SolverConfig()
    _require_complete_cases(dataset, "SIPW")

    mask = dataset.complete_mask
    weights = sipw_weights(dataset, table)[mask]
    design = dataset.design[mask]
    y = dataset.y[mask]

    report, info = fit_logistic(design, y, weights=weights, config=config)

    logger.info(
        "[SIPW] Fitted | n_complete=%d | max_weight=%.3f | converged=%s",
        int(mask.sum()),
        float(weights.max()),
        report.converged,
    )

    if not report.converged:
        return FitResult("SIPW", report.beta_hat, report)

    # Incomplete records contribute zero to both averages but count in n
    n = dataset.n
    weighted_scores = score_rows(report.beta_hat, design, y) * weights[:, None]
    bread = info / n
    meat = weighted_scores.T @ weighted_scores / n

    return FitResult(
        "SIPW",
        report.beta_hat,
        report,
        cov=sandwich(bread, meat, n, config.cond_limit),
        variance_method="IPW_SANDWICH",
    )


# ============================================================
# Multiple imputation
# ============================================================

def mi_score(completed: CompletedSets, beta: np.ndarray) -> np.ndarray:
    """
    Summed MI score sum_i [delta_i1 S_i + sum_k delta_ik (1/M) sum_v S_kiv].

    Complete records are identical across imputations, so averaging over
    all M completed matrices gives both terms at once.
    """
    residual = completed.y[None, :] - inv_logit(completed.designs @ beta)
    return np.einsum("vn,vnd->d", residual, completed.designs) / completed.M


def mi_neg_jacobian(completed: CompletedSets, beta: np.ndarray) -> np.ndarray:
    """n * G(beta): the negative Jacobian of :func:`mi_score`."""
    return completed.n * g_matrix(completed, beta)


def fit_mi(completed: CompletedSets, config: Optional[SolverConfig] = None) -> FitResult:
    """
    Point estimate from M completed datasets (MI1 or MI2 alike).

    The returned result carries no covariance; attach Rubin or the
    proposed sandwich with :meth:`FitResult.with_variance`.
    """
    config = config or SolverConfig()

    if completed.M < 2:
        raise ImputationError(f"At least 2 imputations required, got M={completed.M}")

    report = solve_estimating_eq(
        lambda b: mi_score(completed, b),
        lambda b: mi_neg_jacobian(completed, b),
        np.zeros(completed.n_coef),
        config=config,
    )

    fitted = inv_logit(completed.designs @ report.beta_hat).ravel()
    report = flag_perfect_prediction(report, fitted, np.tile(completed.y, completed.M))

    logger.info(
        "[%s] Fitted | M=%d | converged=%s | iterations=%d",
        completed.method,
        completed.M,
        report.converged,
        report.iterations,
    )

    return FitResult(completed.method, report.beta_hat, report)
