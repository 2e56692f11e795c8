from __future__ import annotations

from abc import ABC, abstractmethod
from typing import List

from ..core.maximum_likelihood import fit_full_ml
from ..models.fit_result import FitResult
from ..variance.proposed import proposed_variance
from ..variance.rubin import rubin_variance
from .context import FitContext
from .point import fit_cc, fit_mi, fit_sipw


# ============================================================
# Abstract Estimator
# ============================================================

class Estimator(ABC):
    """
    One estimation method, addressed by its registry label.

    Implementations must:
        • Be deterministic for a given context (seeded through its config)
        • Never mutate the context's dataset
        • Report non-convergence through the FitResult, not by raising
        • Raise a MissLogitError on invalid input
    """

    label: str = ""

    @property
    def name(self) -> str:
        return self.label or self.__class__.__name__

    @abstractmethod
    def fit(self, context: FitContext) -> List[FitResult]:
        """Fit and return one result per reported variance."""
        raise NotImplementedError


# ============================================================
# Concrete Estimators
# ============================================================

class FullDataEstimator(Estimator):
    label = "FULL"

    def fit(self, context: FitContext) -> List[FitResult]:
        return [fit_full_ml(context.dataset, context.config.solver)]


class CompleteCaseEstimator(Estimator):
    label = "CC"

    def fit(self, context: FitContext) -> List[FitResult]:
        return [fit_cc(context.dataset, context.config.solver)]


class SipwEstimator(Estimator):
    label = "SIPW"

    def fit(self, context: FitContext) -> List[FitResult]:
        return [fit_sipw(context.dataset, context.table, context.config.solver)]


class MultipleImputationEstimator(Estimator):
    """
    MI1 or MI2; the method only changes how the completed sets are drawn.

    Yields the Rubin result (MI1/MI2) and/or the proposed-variance result
    (MI1n/MI2n) according to ``config.variance``.
    """

    def __init__(self, method: str) -> None:
        if method not in ("MI1", "MI2"):
            raise ValueError(f"Unknown MI method: {method}")
        self.label = method

    def fit(self, context: FitContext) -> List[FitResult]:
        config = context.config
        completed = context.completed(self.label)
        point = fit_mi(completed, config.solver)

        if not point.converged:
            return [point]

        cond_limit = config.solver.cond_limit
        results = []

        if config.wants_rubin:
            cov = rubin_variance(completed, point.beta_hat, cond_limit)
            results.append(point.with_variance(cov, "RUBIN"))

        if config.wants_proposed:
            cov = proposed_variance(
                context.dataset,
                completed,
                point.beta_hat,
                context.table,
                self.label,
                index=context.index,
                cond_limit=cond_limit,
            )
            results.append(point.with_variance(cov, "PROPOSED"))

        return results
