"""
Missingness mechanism diagnostics.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
import statsmodels.api as sm
from statsmodels.tools.sm_exceptions import ConvergenceWarning, PerfectSeparationError

from ..data.dataset import Dataset
from ..models.record import Level

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarCheck:
    """
    Logistic regression of the complete-case indicator on (Y, Z, W).

    ``coefficients`` holds est, se, z and p_value per regressor. A small
    ``llr_pvalue`` says completeness depends on the always-observed
    variables, i.e. the data are not MCAR; MAR itself cannot be tested.
    """

    coefficients: pd.DataFrame
    llr_pvalue: Optional[float]
    complete_fraction: float
    note: str = ""


def _regressors(dataset: Dataset) -> pd.DataFrame:
    layout = dataset.layout
    frame = pd.DataFrame({layout.outcome: dataset.y.astype(float)})

    for names, matrix in ((layout.z, dataset.z), (layout.w, dataset.w)):
        for j, name in enumerate(names):
            column = pd.Series(matrix[:, j], name=name)
            if all(Level(t).is_numeric for t in column.unique()):
                frame[name] = column.map(lambda t: Level(t).numeric)
            else:
                dummies = pd.get_dummies(column, prefix=name, drop_first=True, dtype=float)
                frame = pd.concat([frame, dummies], axis=1)

    # Constant columns carry no information and make the design singular
    varying = frame.columns[frame.nunique() > 1]
    return sm.add_constant(frame[varying], has_constant="add")


def mar_check(dataset: Dataset) -> MarCheck:
    indicator = dataset.complete_mask.astype(float)
    fraction = float(indicator.mean())

    if fraction in (0.0, 1.0):
        return MarCheck(
            coefficients=pd.DataFrame(columns=["est", "se", "z", "p_value"]),
            llr_pvalue=None,
            complete_fraction=fraction,
            note="completeness indicator is constant",
        )

    exog = _regressors(dataset)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            fit = sm.Logit(indicator, exog).fit(disp=0, maxiter=100)
    except (PerfectSeparationError, np.linalg.LinAlgError) as e:
        logger.warning("[DIAGNOSE] MAR check failed | error=%s", e)
        return MarCheck(
            coefficients=pd.DataFrame(columns=["est", "se", "z", "p_value"]),
            llr_pvalue=None,
            complete_fraction=fraction,
            note=f"logistic fit failed: {e}",
        )

    coefficients = pd.DataFrame(
        {
            "est": fit.params,
            "se": fit.bse,
            "z": fit.tvalues,
            "p_value": fit.pvalues,
        }
    )

    logger.info(
        "[DIAGNOSE] MAR check | complete_fraction=%.4f | llr_p=%.4g",
        fraction,
        fit.llr_pvalue,
    )

    return MarCheck(
        coefficients=coefficients,
        llr_pvalue=float(fit.llr_pvalue),
        complete_fraction=fraction,
        note="" if fit.mle_retvals.get("converged", True) else "logistic fit did not converge",
    )
