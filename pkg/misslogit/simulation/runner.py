"""
Replication runner.

Replication r generates its sample from substream (seed, r) and seeds
its imputations from a second substream of the same key, so a
replication's output depends only on (config, r). Results are collected
in replication order whatever the worker count.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import MissLogitError
from ..estimators.context import FitContext
from ..estimators.executor import EstimationExecutor
from ..utils.rng import GENERATION, IMPUTATION, derive_seed, generator, replication_seed
from .config import StudyConfig
from .generators import LAYOUT, generate
from .metrics import EstimateDraws, MetricsTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplicationResult:
    """
    Estimates of one replication keyed by display label (CC, MI1n, ...).

    ``beta`` / ``ase`` are None for a label that failed or did not converge.
    """

    rep: int
    beta: Dict[str, Optional[np.ndarray]]
    ase: Dict[str, Optional[np.ndarray]]
    pattern_fractions: Dict[int, float] = field(default_factory=dict)
    errors: Dict[str, str] = field(default_factory=dict)


def expected_labels(config: StudyConfig) -> List[str]:
    """Display labels a full replication reports, in table order."""
    labels = []
    for estimator in config.estimators:
        if estimator in ("MI1", "MI2"):
            if config.variance in ("rubin", "both"):
                labels.append(estimator)
            if config.variance in ("proposed", "both"):
                labels.append(f"{estimator}n")
        else:
            labels.append(estimator)
    return labels


def run_one(config: StudyConfig, rep: int) -> ReplicationResult:
    """Generate, fit and record replication ``rep``. Module level for pickling."""
    root = replication_seed(config.seed, rep)
    labels = expected_labels(config)

    beta: Dict[str, Optional[np.ndarray]] = {label: None for label in labels}
    ase: Dict[str, Optional[np.ndarray]] = {label: None for label in labels}
    errors: Dict[str, str] = {}

    try:
        full, observed = generate(config, generator(root, GENERATION))
    except MissLogitError as e:
        logger.warning("[RUNNER] Replication %d generation failed | error=%s", rep, e)
        return ReplicationResult(rep, beta, ase, errors={"generate": str(e)})

    context = FitContext(observed, config.estimation(derive_seed(root, IMPUTATION)))
    full_context = FitContext(full, context.config)

    executor = EstimationExecutor()
    for estimator in config.estimators:
        # The FULL benchmark is fitted on the unmasked sample
        target = full_context if estimator == "FULL" else context
        outcome = executor.execute(estimator, target)

        if not outcome.is_success:
            errors[estimator] = outcome.error or outcome.status
            continue

        for result in outcome.results:
            if result.negative_variance:
                errors[result.display_label] = "negative variance diagonal"
            elif result.converged and result.ase is not None:
                beta[result.display_label] = result.beta_hat
                ase[result.display_label] = result.ase

    return ReplicationResult(rep, beta, ase, observed.pattern_fractions(), errors)


def _run_batch(config: StudyConfig, reps: Sequence[int]) -> List[ReplicationResult]:
    return [run_one(config, rep) for rep in reps]


def _batches(reps: int, size: int) -> List[range]:
    return [range(start, min(start + size, reps)) for start in range(0, reps, size)]


def collect_replications(config: StudyConfig, workers: int = 1) -> List[ReplicationResult]:
    """All replications of ``config`` in replication order."""
    start = time.monotonic()

    if workers <= 1:
        results = _run_batch(config, range(config.reps))
    else:
        batches = _batches(config.reps, max(1, config.reps // (4 * workers)))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(_run_batch, [config] * len(batches), batches)
            results = [r for chunk in chunks for r in chunk]

    logger.info(
        "[RUNNER] %s finished | reps=%d | workers=%d | seconds=%.1f",
        config.name,
        config.reps,
        workers,
        time.monotonic() - start,
    )
    return results


def aggregate(
    config: StudyConfig,
    results: Iterable[ReplicationResult],
    scenario: str = "",
) -> MetricsTable:
    results = list(results)
    d = len(config.beta_true)
    draws = []

    for label in expected_labels(config):
        beta = np.full((len(results), d), np.nan)
        ase = np.full((len(results), d), np.nan)
        for row, result in enumerate(results):
            if result.beta.get(label) is not None:
                beta[row] = result.beta[label]
                ase[row] = result.ase[label]
        draws.append(EstimateDraws(label, beta, ase))

    table = MetricsTable.from_draws(draws, config.beta_true, LAYOUT.coefficient_names, scenario)
    return replace(table, patterns={scenario: pattern_summary(results)})


def run_replications(
    config: StudyConfig,
    estimators: Optional[Sequence[str]] = None,
    workers: int = 1,
) -> MetricsTable:
    """
    Monte Carlo metrics of ``config`` (its sweep is ignored; see run_study).

    Non-converged or failed fits are excluded from the aggregates and
    counted in ``n_failed``.
    """
    if estimators is not None:
        config = config.model_copy(update={"estimators": tuple(estimators)})
    return aggregate(config, collect_replications(config, workers), scenario=config.name)


def run_study(config: StudyConfig, workers: int = 1) -> MetricsTable:
    """One run_replications per sweep scenario, stacked with a scenario column."""
    tables = []
    for label, scenario in config.scenarios():
        logger.info("[RUNNER] Scenario %s | n=%d | M=%d | alpha=%s", label, scenario.n, scenario.M, scenario.alpha)
        tables.append(aggregate(scenario, collect_replications(scenario, workers), scenario=label))
    return MetricsTable.concat(tables)


def pattern_summary(results: Iterable[ReplicationResult]) -> Tuple[float, float, float, float]:
    """Mean observed pattern fractions across replications."""
    fractions = [r.pattern_fractions for r in results if r.pattern_fractions]
    if not fractions:
        return (float("nan"),) * 4
    return tuple(float(np.mean([f[j] for f in fractions])) for j in (1, 2, 3, 4))
