"""
Damped Newton solver shared by every estimating equation in the package.
"""

from __future__ import annotations

import logging
import warnings
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from ..config import SolverConfig
from ..models.fit_result import SolveReport

logger = logging.getLogger(__name__)

ScoreFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], np.ndarray]


class SingularJacobianError(ArithmeticError):
    """Raised internally when the Jacobian stays singular after the ridge fallback."""


def _lu_solve(matrix: np.ndarray, rhs: np.ndarray, cond_limit: float) -> Optional[np.ndarray]:
    if not np.all(np.isfinite(matrix)):
        return None

    with warnings.catch_warnings():
        warnings.simplefilter("error", linalg.LinAlgWarning)
        try:
            lu, piv = linalg.lu_factor(matrix, check_finite=False)
        except (linalg.LinAlgError, linalg.LinAlgWarning, ValueError):
            return None

    if np.any(np.diag(lu) == 0.0) or np.linalg.cond(matrix) > cond_limit:
        return None

    step = linalg.lu_solve((lu, piv), rhs, check_finite=False)
    return step if np.all(np.isfinite(step)) else None


def newton_step(jacobian: np.ndarray, score: np.ndarray, config: SolverConfig) -> np.ndarray:
    """
    Solve J step = score by dense LU with partial pivoting.

    A numerically singular J gets one ridge of
    ``ridge_scale * trace(J)/dim * I`` before giving up.
    """
    step = _lu_solve(jacobian, score, config.cond_limit)
    if step is not None:
        return step

    dim = jacobian.shape[0]
    scale = abs(np.trace(jacobian)) / dim if np.isfinite(np.trace(jacobian)) else 0.0
    ridge = config.ridge_scale * (scale if scale > 0 else 1.0)

    logger.debug("[SOLVER] Singular Jacobian, ridge fallback | ridge=%.3e", ridge)

    step = _lu_solve(jacobian + ridge * np.eye(dim), score, config.cond_limit)
    if step is None:
        raise SingularJacobianError("Jacobian singular after ridge fallback")
    return step


def solve_estimating_eq(
    score_fn: ScoreFn,
    neg_jacobian_fn: JacobianFn,
    beta0: np.ndarray,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    config: Optional[SolverConfig] = None,
) -> SolveReport:
    """
    Newton iteration beta <- beta + J^{-1} score with step halving.

    Parameters
    ----------
    score_fn : callable
        beta -> summed score vector.
    neg_jacobian_fn : callable
        beta -> negative Jacobian of ``score_fn``.
    beta0 : np.ndarray
        Starting value.
    tol, max_iter : optional
        Override the corresponding ``config`` fields.

    Returns
    -------
    SolveReport
        Never raises on numerical failure; ``converged`` is False instead.
    """
    config = config or SolverConfig()
    tol = config.tol if tol is None else tol
    max_iter = config.max_iter if max_iter is None else max_iter

    if tol <= 0:
        raise ValueError("tol must be positive")

    beta = np.array(beta0, dtype=float)
    score = np.asarray(score_fn(beta), dtype=float)

    if score.shape != beta.shape:
        raise ValueError(f"score_fn returned shape {score.shape}, expected {beta.shape}")

    norm = float(np.linalg.norm(score))
    max_abs = float(np.max(np.abs(score)))

    for iteration in range(1, max_iter + 1):

        if max_abs <= tol:
            return _report(beta, iteration - 1, max_abs, True, config)

        try:
            step = newton_step(np.asarray(neg_jacobian_fn(beta), dtype=float), score, config)
        except SingularJacobianError as e:
            return _report(beta, iteration - 1, max_abs, False, config, str(e))

        # ------------------------------------------------------------
        # Step halving until the score norm decreases
        # ------------------------------------------------------------

        accepted = False
        for _ in range(config.max_halvings + 1):
            candidate = beta + step
            candidate_score = np.asarray(score_fn(candidate), dtype=float)
            candidate_norm = float(np.linalg.norm(candidate_score))

            if np.isfinite(candidate_norm) and candidate_norm < norm:
                accepted = True
                break

            step = 0.5 * step

        if not accepted:
            return _report(beta, iteration, max_abs, max_abs <= tol, config, "step halving exhausted")

        beta, score, norm = candidate, candidate_score, candidate_norm
        max_abs = float(np.max(np.abs(score)))

        logger.debug(
            "[SOLVER] Iteration %d | score=%.3e | beta_norm=%.3e",
            iteration,
            max_abs,
            float(np.linalg.norm(beta)),
        )

        if np.linalg.norm(beta) > config.separation_norm and max_abs > tol:
            return _report(beta, iteration, max_abs, False, config, "separation: diverging coefficients")

    converged = max_abs <= tol
    return _report(beta, max_iter, max_abs, converged, config, "" if converged else "max_iter exceeded")


def flag_perfect_prediction(
    report: SolveReport,
    fitted: np.ndarray,
    y: np.ndarray,
    threshold: float = 1e-6,
) -> SolveReport:
    """
    Mark a solve as separated when every fitted probability matches its
    outcome to within ``threshold``; the score then vanishes only because
    the coefficients drift to infinity.
    """
    if not report.converged or fitted.size == 0:
        return report

    if np.all(np.abs(y - fitted) < threshold):
        logger.warning("[SOLVER] Perfect prediction detected | n=%d", fitted.size)
        return SolveReport(
            beta_hat=report.beta_hat,
            iterations=report.iterations,
            final_score_norm=report.final_score_norm,
            converged=False,
            separation=True,
            message="separation: perfect prediction",
        )
    return report


def _report(
    beta: np.ndarray,
    iterations: int,
    max_abs: float,
    converged: bool,
    config: SolverConfig,
    message: str = "",
) -> SolveReport:
    separation = (not converged) and bool(np.linalg.norm(beta) > config.separation_norm)

    if converged:
        logger.debug("[SOLVER] Converged | iterations=%d | score=%.3e", iterations, max_abs)
    else:
        logger.warning(
            "[SOLVER] Not converged | iterations=%d | score=%.3e | reason=%s",
            iterations,
            max_abs,
            message or "unknown",
        )

    return SolveReport(
        beta_hat=beta,
        iterations=iterations,
        final_score_norm=max_abs,
        converged=converged,
        separation=separation,
        message=message,
    )
