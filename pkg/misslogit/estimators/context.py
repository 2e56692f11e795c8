from __future__ import annotations

import logging
from functools import cached_property
from typing import Dict

import numpy as np

from ..config import EstimationConfig
from ..data.dataset import Dataset
from ..imputation.pools import DonorIndex, build_donor_index
from ..imputation.sampler import CompletedSets, Method, impute
from ..selection.table import SelectionTable, estimate_selection_probs
from ..utils.rng import imputation_uniforms

logger = logging.getLogger(__name__)


class FitContext:
    """
    Inputs shared by the estimators fitted on one dataset.

    The selection table, donor index, imputation uniforms and completed
    sets are built on first use and reused afterwards. MI1 and MI2 draw
    from the same uniforms.
    """

    def __init__(self, dataset: Dataset, config: EstimationConfig | None = None) -> None:
        self.dataset = dataset
        self.config = config or EstimationConfig()
        self._completed: Dict[str, CompletedSets] = {}

    @cached_property
    def table(self) -> SelectionTable:
        return estimate_selection_probs(self.dataset)

    @cached_property
    def index(self) -> DonorIndex:
        return build_donor_index(self.dataset)

    @cached_property
    def uniforms(self) -> np.ndarray:
        return imputation_uniforms(self.config.seed, self.dataset.n, self.config.imputations)

    def completed(self, method: Method) -> CompletedSets:
        if method not in self._completed:
            self._completed[method] = impute(
                self.dataset,
                self.index,
                method,
                self.config.imputations,
                self.config.seed,
                uniforms=self.uniforms,
            )
        return self._completed[method]
