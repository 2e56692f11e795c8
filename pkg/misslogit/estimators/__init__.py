from .base import (
    CompleteCaseEstimator,
    Estimator,
    FullDataEstimator,
    MultipleImputationEstimator,
    SipwEstimator,
)
from .context import FitContext
from .executor import EstimationExecutor
from .point import fit_cc, fit_mi, fit_sipw, mi_score, sipw_weights
from .registry import EstimatorRegistry, default_registry

__all__ = [
    "CompleteCaseEstimator",
    "EstimationExecutor",
    "Estimator",
    "EstimatorRegistry",
    "FitContext",
    "FullDataEstimator",
    "MultipleImputationEstimator",
    "SipwEstimator",
    "default_registry",
    "fit_cc",
    "fit_mi",
    "fit_sipw",
    "mi_score",
    "sipw_weights",
]
