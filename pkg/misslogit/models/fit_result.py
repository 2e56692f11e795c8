import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)

# Diagonals in [-ROUNDOFF * max(1, max |diag|), 0) are round-off and read as 0
ROUNDOFF = 1e-12

EstimatorLabel = Literal["FULL", "CC", "SIPW", "MI1", "MI2"]
VarianceMethod = Literal["NONE", "INFORMATION", "RUBIN", "PROPOSED", "IPW_SANDWICH"]


@dataclass(frozen=True)
class SolveReport:
    """
    Outcome of one estimating-equation solve.

    Attributes
    ----------
    beta_hat : np.ndarray
        Final iterate.
    iterations : int
        Newton iterations performed.
    final_score_norm : float
        Max-abs component of the score at ``beta_hat``.
    converged : bool
        True iff ``final_score_norm <= tol``.
    separation : bool
        True when the iterate diverged beyond the separation norm.
    message : str
        Short reason when not converged.
    """

    beta_hat: np.ndarray
    iterations: int
    final_score_norm: float
    converged: bool
    separation: bool = False
    message: str = ""


@dataclass(frozen=True)
class FitResult:
    """
    Immutable record of one fitted estimator.

    ``cov`` is the covariance of beta_hat itself (per-estimate scale), not
    of sqrt(n)(beta_hat - beta). It is None for point-only fits
    (``variance_method == "NONE"``); :meth:`with_variance` attaches one.

    A negative variance diagonal beyond round-off is logged, sets
    :attr:`negative_variance` and yields NaN in :attr:`ase`.
    """

    estimator: EstimatorLabel
    beta_hat: np.ndarray
    report: SolveReport
    cov: Optional[np.ndarray] = None
    variance_method: VarianceMethod = "NONE"

    def __post_init__(self):
        object.__setattr__(self, "beta_hat", np.asarray(self.beta_hat, dtype=float))

        if self.cov is None:
            return

        cov = np.asarray(self.cov, dtype=float)
        # Symmetrise away round-off from the sandwich products
        cov = 0.5 * (cov + cov.T)

        if cov.shape != (self.beta_hat.size, self.beta_hat.size):
            raise ValueError(
                f"cov shape {cov.shape} does not match beta of length {self.beta_hat.size}"
            )

        object.__setattr__(self, "cov", cov)

        negative = self._negative_mask(cov)
        if negative.any():
            logger.warning(
                "[FIT] Negative variance diagonal | estimator=%s | method=%s | index=%s | min=%.3e",
                self.estimator,
                self.variance_method,
                np.flatnonzero(negative).tolist(),
                float(np.diag(cov).min()),
            )

    @staticmethod
    def _negative_mask(cov: np.ndarray) -> np.ndarray:
        diag = np.diag(cov)
        scale = max(1.0, float(np.max(np.abs(diag)))) if diag.size else 1.0
        return diag < -ROUNDOFF * scale

    # ------------------------------------------------------------------
    # Derived
    # ------------------------------------------------------------------

    @property
    def converged(self) -> bool:
        return self.report.converged

    @property
    def negative_variance(self) -> bool:
        return self.cov is not None and bool(self._negative_mask(self.cov).any())

    @property
    def ase(self) -> Optional[np.ndarray]:
        if self.cov is None:
            return None
        diag = np.diag(self.cov)
        negative = self._negative_mask(self.cov)
        return np.sqrt(np.where(negative, np.nan, np.maximum(diag, 0.0)))

    @property
    def display_label(self) -> str:
        """Column label used in tables: MI1/MI2 with Rubin, MI1n/MI2n proposed."""
        if self.variance_method == "PROPOSED":
            return f"{self.estimator}n"
        return self.estimator

    def with_variance(self, cov: np.ndarray, method: VarianceMethod) -> "FitResult":
        return replace(self, cov=cov, variance_method=method)

    # ------------------------------------------------------------------
    # Wald inference
    # ------------------------------------------------------------------

    def z_scores(self) -> Optional[np.ndarray]:
        ase = self.ase
        if ase is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.beta_hat / ase

    def p_values(self) -> Optional[np.ndarray]:
        z = self.z_scores()
        if z is None:
            return None
        return 2.0 * stats.norm.sf(np.abs(z))

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_rows(self, names: Optional[List[str]] = None) -> List[Dict[str, Any]]:
        """Flat per-coefficient records (estimator, coefficient, est, ASE, z, p)."""
        names = names or [f"beta{k}" for k in range(self.beta_hat.size)]
        ase = self.ase
        z = self.z_scores()
        p = self.p_values()

        rows = []
        for k, name in enumerate(names):
            rows.append({
                "estimator": self.display_label,
                "coefficient": name,
                "est": float(self.beta_hat[k]),
                "ase": float(ase[k]) if ase is not None else None,
                "z": float(z[k]) if z is not None else None,
                "p_value": float(p[k]) if p is not None else None,
                "converged": self.converged,
            })
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimator": self.estimator,
            "label": self.display_label,
            "variance_method": self.variance_method,
            "beta_hat": self.beta_hat.tolist(),
            "ase": None if self.ase is None else self.ase.tolist(),
            "converged": self.converged,
            "negative_variance": self.negative_variance,
            "iterations": self.report.iterations,
            "final_score_norm": self.report.final_score_norm,
        }
