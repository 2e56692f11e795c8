from __future__ import annotations

import logging
import time
from typing import Iterable, List, Optional

from ..errors import MissLogitError
from ..models.fit_outcome import FitOutcome
from .context import FitContext
from .registry import EstimatorRegistry, default_registry

logger = logging.getLogger(__name__)


class EstimationExecutor:
    """
    Runs registered estimators against a FitContext.

    Library errors become failure outcomes so one estimator cannot abort
    the others; programming errors propagate.
    """

    def __init__(self, registry: Optional[EstimatorRegistry] = None) -> None:
        self._registry = registry or default_registry()

    # ============================================================
    # MAIN EXECUTION
    # ============================================================

    def execute(self, label: str, context: FitContext) -> FitOutcome:
        start = time.monotonic()

        try:
            estimator = self._registry.get(label)
        except KeyError as e:
            return FitOutcome(label, "blocked", (), str(e), 0, "KeyError")

        try:
            results = tuple(estimator.fit(context))
        except MissLogitError as e:
            logger.error("[EXECUTOR] %s failed | kind=%s | error=%s", label, type(e).__name__, e)
            return FitOutcome(label, "failure", (), str(e), self._latency_ms(start), type(e).__name__)

        outcome = FitOutcome(label, "success", results, None, self._latency_ms(start))

        if not outcome.converged:
            logger.warning(
                "[EXECUTOR] %s did not converge | reason=%s",
                label,
                "; ".join(r.report.message for r in results if not r.converged),
            )
        else:
            logger.debug("[EXECUTOR] %s done | latency_ms=%d", label, outcome.latency_ms)

        return outcome

    def run(self, context: FitContext, labels: Optional[Iterable[str]] = None) -> List[FitOutcome]:
        """Execute ``labels`` (default: the context config's estimators) in order."""
        labels = list(labels) if labels is not None else list(context.config.estimators)
        return [self.execute(label, context) for label in labels]

    @staticmethod
    def _latency_ms(start_time: float) -> int:
        return int((time.monotonic() - start_time) * 1000)

    @property
    def registry(self) -> EstimatorRegistry:
        return self._registry
