from dataclasses import dataclass, field
from typing import Tuple

from .errors import ConfigError


ESTIMATOR_LABELS = ("FULL", "CC", "SIPW", "MI1", "MI2")
VARIANCE_CHOICES = ("rubin", "proposed", "both")


@dataclass(frozen=True)
class SolverConfig:
    """
    Central configuration object for the estimating-equation solver.
    Controls convergence, step halving and the singular-Jacobian fallback.
    """

    tol: float = 1e-8              # max-abs score component
    max_iter: int = 100
    max_halvings: int = 30
    ridge_scale: float = 1e-8      # times trace/dim
    separation_norm: float = 50.0
    cond_limit: float = 1e12

    def __post_init__(self):
        if self.tol <= 0:
            raise ConfigError("tol must be positive", field="tol")

        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1", field="max_iter")

        if self.max_halvings < 0:
            raise ConfigError("max_halvings cannot be negative", field="max_halvings")

        if self.ridge_scale <= 0:
            raise ConfigError("ridge_scale must be positive", field="ridge_scale")

        if self.cond_limit <= 1:
            raise ConfigError("cond_limit must exceed 1", field="cond_limit")


@dataclass(frozen=True)
class EstimationConfig:
    """
    Which estimators to run and how the MI estimators are configured.
    """

    imputations: int = 15
    variance: str = "both"   # "rubin", "proposed", or "both"
    estimators: Tuple[str, ...] = ("CC", "SIPW", "MI1", "MI2")
    seed: int = 20240101
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.variance not in VARIANCE_CHOICES:
            raise ConfigError(f"Unsupported variance: {self.variance}", field="variance")

        unknown = [e for e in self.estimators if e not in ESTIMATOR_LABELS]
        if unknown:
            raise ConfigError(f"Unknown estimators: {unknown}", field="estimators")

        needs_mi = any(e in ("MI1", "MI2") for e in self.estimators)
        if needs_mi and self.imputations < 2:
            raise ConfigError("MI estimators require at least 2 imputations", field="imputations")

        if self.seed < 0:
            raise ConfigError("seed must be non-negative", field="seed")

    @property
    def wants_rubin(self) -> bool:
        return self.variance in ("rubin", "both")

    @property
    def wants_proposed(self) -> bool:
        return self.variance in ("proposed", "both")
