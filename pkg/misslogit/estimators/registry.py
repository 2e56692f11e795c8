from __future__ import annotations

import logging
from threading import RLock
from typing import Dict, Iterable, List

from .base import (
    CompleteCaseEstimator,
    Estimator,
    FullDataEstimator,
    MultipleImputationEstimator,
    SipwEstimator,
)

logger = logging.getLogger(__name__)


class EstimatorRegistry:
    """
    Registry of the estimators the executor may run.

    A label not registered here is not executable.
    """

    def __init__(self) -> None:
        self._estimators: Dict[str, Estimator] = {}
        self._lock = RLock()

    def register(self, estimator: Estimator) -> None:
        if not estimator.label or not isinstance(estimator.label, str):
            raise ValueError("Estimator must have a valid string label.")

        with self._lock:
            if estimator.label in self._estimators:
                raise ValueError(f"Estimator '{estimator.label}' is already registered.")

            self._estimators[estimator.label] = estimator

            logger.debug(
                "[ESTIMATOR REGISTRY] Registered %s | total=%d",
                estimator.label,
                len(self._estimators),
            )

    def register_many(self, estimators: Iterable[Estimator]) -> None:
        estimators = list(estimators)
        with self._lock:
            for estimator in estimators:
                if estimator.label in self._estimators:
                    raise ValueError(f"Estimator '{estimator.label}' is already registered.")
            for estimator in estimators:
                self.register(estimator)

    def get(self, label: str) -> Estimator:
        with self._lock:
            try:
                return self._estimators[label]
            except KeyError:
                logger.error(
                    "[ESTIMATOR REGISTRY] Lookup FAILED: %s | available=%s",
                    label,
                    sorted(self._estimators),
                )
                raise KeyError(f"Estimator '{label}' is not registered.") from None

    def has(self, label: str) -> bool:
        with self._lock:
            return label in self._estimators

    def labels(self) -> List[str]:
        with self._lock:
            return list(self._estimators)

    def __len__(self) -> int:
        with self._lock:
            return len(self._estimators)


def default_registry() -> EstimatorRegistry:
    """FULL, CC, SIPW, MI1 and MI2 in reporting order."""
    registry = EstimatorRegistry()
    registry.register_many(
        [
            FullDataEstimator(),
            CompleteCaseEstimator(),
            SipwEstimator(),
            MultipleImputationEstimator("MI1"),
            MultipleImputationEstimator("MI2"),
        ]
    )
    return registry
