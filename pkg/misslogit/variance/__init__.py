from .gradient import g_matrix, imputed_scores
from .influence import (
    ConditionalScores,
    InfluenceSet,
    eta_hat,
    eta_values,
    phi_hat,
    psi_hat,
    sstar_mi1,
    sstar_mi2,
)
from .proposed import proposed_variance
from .rubin import rubin_variance

__all__ = [
    "ConditionalScores",
    "InfluenceSet",
    "eta_hat",
    "eta_values",
    "g_matrix",
    "imputed_scores",
    "phi_hat",
    "proposed_variance",
    "psi_hat",
    "rubin_variance",
    "sstar_mi1",
    "sstar_mi2",
]
