"""
Immutable result and domain records passed between the estimation layers.
"""

from .fit_outcome import FitOutcome
from .fit_result import FitResult, SolveReport
from .record import DesignVector, Level, Record, StratumKey, derive_pattern, stratum_key

__all__ = [
    "DesignVector",
    "FitOutcome",
    "FitResult",
    "Level",
    "Record",
    "SolveReport",
    "StratumKey",
    "derive_pattern",
    "stratum_key",
]
