from dataclasses import dataclass
from typing import Any, Dict, Literal, Optional, Tuple

from .fit_result import FitResult


@dataclass(frozen=True)
class FitOutcome:
    """
    Immutable record of one estimator run through the executor.

    Attributes
    ----------
    estimator : str
        Registry label that was executed.

    status : {"success", "failure", "blocked"}
        Outcome classification:
            success → every fit finished (converged or not, see ``results``)
            failure → the estimator raised a library error
            blocked → the label is not registered

    results : tuple of FitResult
        One result per reported variance (e.g. MI1 and MI1n). Empty unless
        status is success.

    error : Optional[str]
        Error text when status is failure or blocked.

    error_kind : Optional[str]
        Exception class name behind ``error``.

    latency_ms : int
        Wall time of the run in milliseconds (monotonic).
    """

    estimator: str
    status: Literal["success", "failure", "blocked"]
    results: Tuple[FitResult, ...]
    error: Optional[str]
    latency_ms: int
    error_kind: Optional[str] = None

    @property
    def is_success(self) -> bool:
        return self.status == "success"

    @property
    def converged(self) -> bool:
        return self.is_success and all(r.converged for r in self.results)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimator": self.estimator,
            "status": self.status,
            "results": [r.to_dict() for r in self.results],
            "error": self.error,
            "error_kind": self.error_kind,
            "latency_ms": self.latency_ms,
        }
