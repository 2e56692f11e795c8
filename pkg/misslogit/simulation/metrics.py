"""
Monte Carlo summaries: bias, SD, ASE, MSE, CP and relative efficiency.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..errors import VarianceError

logger = logging.getLogger(__name__)

Z_975 = 1.959964

NONCONVERGENCE_WARNING = 0.10

METRIC_COLUMNS = ["bias", "sd", "ase", "mse", "cp"]

# RE column -> (numerator, reference)
RE_COLUMNS = {
    "C1": ("CC", "MI1n"),
    "W1": ("SIPW", "MI1n"),
    "M11": ("MI1", "MI1n"),
    "M21": ("MI2", "MI1n"),
    "C2": ("CC", "MI2n"),
    "W2": ("SIPW", "MI2n"),
    "M12": ("MI1", "MI2n"),
    "M22": ("MI2", "MI2n"),
    "M12n": ("MI1n", "MI2n"),
}


@dataclass(frozen=True)
class EstimateDraws:
    """Per-replication estimates of one estimator column (NaN rows = not converged)."""

    label: str
    beta: np.ndarray
    ase: np.ndarray

    @property
    def converged(self) -> np.ndarray:
        return np.all(np.isfinite(self.beta), axis=1)


def summarize(draws: EstimateDraws, beta_true: np.ndarray, z: float = Z_975) -> Dict[str, np.ndarray]:
    """
    Aggregates over converged replications.

    SD uses ddof=1; CP counts replications with |beta_hat - beta| <= z ASE.
    A column without ASEs gets NaN for ASE and CP.
    """
    ok = draws.converged
    beta = draws.beta[ok]
    ase = draws.ase[ok]

    with np.errstate(invalid="ignore"):
        bias = beta.mean(axis=0) - beta_true if beta.shape[0] else np.full(beta_true.shape, np.nan)
        sd = beta.std(axis=0, ddof=1) if beta.shape[0] > 1 else np.full(beta_true.shape, np.nan)

        has_ase = ase.shape[0] > 0 and np.all(np.isfinite(ase))
        mean_ase = ase.mean(axis=0) if has_ase else np.full(beta_true.shape, np.nan)
        cp = (
            (np.abs(beta - beta_true) <= z * ase).mean(axis=0)
            if has_ase
            else np.full(beta_true.shape, np.nan)
        )

    return {
        "bias": bias,
        "sd": sd,
        "ase": mean_ase,
        "mse": bias**2 + sd**2,
        "cp": cp,
    }


@dataclass(frozen=True)
class MetricsTable:
    """
    One row per (scenario, estimator, coefficient).

    Columns: scenario, estimator, coefficient, bias, sd, ase, mse, cp,
    n_used, n_failed. ``warnings`` lists estimator columns whose failure
    rate exceeded 10 %. ``patterns`` maps a scenario to its mean observed
    fractions of patterns 1-4.
    """

    frame: pd.DataFrame
    reps: int
    warnings: List[str] = field(default_factory=list)
    patterns: Dict[str, Tuple[float, ...]] = field(default_factory=dict)

    @classmethod
    def from_draws(
        cls,
        draws: Iterable[EstimateDraws],
        beta_true: Sequence[float],
        coefficients: Sequence[str],
        scenario: str = "",
    ) -> "MetricsTable":
        beta_true = np.asarray(beta_true, dtype=float)
        rows = []
        warnings = []
        reps = 0

        for d in draws:
            reps = max(reps, d.beta.shape[0])
            stats = summarize(d, beta_true)
            n_used = int(d.converged.sum())
            n_failed = int(d.beta.shape[0] - n_used)

            if d.beta.shape[0] and n_failed / d.beta.shape[0] > NONCONVERGENCE_WARNING:
                message = f"{scenario or 'study'}:{d.label} failed in {n_failed}/{d.beta.shape[0]} replications"
                warnings.append(message)
                logger.warning("[METRICS] Non-convergence above 10%% | %s", message)

            for k, name in enumerate(coefficients):
                row = {"scenario": scenario, "estimator": d.label, "coefficient": name}
                row.update({m: float(stats[m][k]) for m in METRIC_COLUMNS})
                row["n_used"] = n_used
                row["n_failed"] = n_failed
                rows.append(row)

        return cls(pd.DataFrame(rows), reps, warnings)

    @classmethod
    def concat(cls, tables: Sequence["MetricsTable"]) -> "MetricsTable":
        frame = pd.concat([t.frame for t in tables], ignore_index=True)
        return cls(
            frame,
            max(t.reps for t in tables),
            [w for t in tables for w in t.warnings],
            {k: v for t in tables for k, v in t.patterns.items()},
        )

    # ------------------------------------------------------------------
    # Views
    # ------------------------------------------------------------------

    @property
    def estimators(self) -> List[str]:
        return list(dict.fromkeys(self.frame["estimator"]))

    @property
    def scenarios(self) -> List[str]:
        return list(dict.fromkeys(self.frame["scenario"]))

    def metric(self, name: str, scenario: Optional[str] = None) -> pd.DataFrame:
        """coefficient x estimator pivot of one metric."""
        frame = self.frame if scenario is None else self.frame[self.frame["scenario"] == scenario]
        pivot = frame.pivot(index="coefficient", columns="estimator", values=name)
        order = list(dict.fromkeys(frame["coefficient"]))
        return pivot.loc[order, [e for e in self.estimators if e in pivot.columns]]

    # ------------------------------------------------------------------
    # Output
    # ------------------------------------------------------------------

    def to_csv(self, path: str | Path, header: Sequence[str] = ()) -> None:
        with Path(path).open("w") as f:
            for line in header:
                f.write(f"# {line}\n")
            self.frame.to_csv(f, index=False, float_format="%.6f", lineterminator="\n")

    def to_text(self) -> str:
        """Aligned table, one block per scenario, 4 decimals."""
        blocks = []
        for scenario in self.scenarios:
            part = self.frame[self.frame["scenario"] == scenario]
            body = part.drop(columns=["scenario"]).to_string(
                index=False,
                float_format=lambda v: f"{v:.4f}",
            )
            title = f"[{scenario}]" if scenario else ""
            if scenario in self.patterns:
                body += "\npatterns 1-4: " + " ".join(f"{f:.4f}" for f in self.patterns[scenario])
            blocks.append(f"{title}\n{body}".strip("\n"))
        if self.warnings:
            blocks.append("\n".join(f"WARNING: {w}" for w in self.warnings))
        return "\n\n".join(blocks) + "\n"


def relative_efficiency(ase: np.ndarray, reference_ase: np.ndarray) -> np.ndarray:
    """Elementwise ASE ratio against a reference (typically MI1n or MI2n)."""
    ase = np.asarray(ase, dtype=float)
    reference_ase = np.asarray(reference_ase, dtype=float)

    if ase.shape != reference_ase.shape:
        raise ValueError(f"ASE shapes differ: {ase.shape} vs {reference_ase.shape}")
    if np.any(reference_ase == 0):
        raise VarianceError("Reference ASE is zero")

    return ase / reference_ase


def re_table(metrics: MetricsTable, scenario: Optional[str] = None) -> pd.DataFrame:
    """
    RE columns whose two estimators are both present, one row per
    coefficient (plus a scenario column when the table holds several).
    """
    scenarios = [scenario] if scenario is not None else metrics.scenarios
    parts = []

    for name in scenarios:
        ase = metrics.metric("ase", name)
        data = {}
        for column, (numerator, reference) in RE_COLUMNS.items():
            if numerator in ase.columns and reference in ase.columns:
                data[column] = relative_efficiency(ase[numerator].to_numpy(), ase[reference].to_numpy())

        part = pd.DataFrame(data, index=ase.index)
        part.insert(0, "scenario", name)
        parts.append(part.reset_index())

    return pd.concat(parts, ignore_index=True)
