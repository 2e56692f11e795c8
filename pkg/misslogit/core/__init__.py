from .linalg import guarded_inverse, outer_mean, sandwich
from .logit import information, inv_logit, inv_logit_deriv, score_contrib, score_rows
from .maximum_likelihood import fit_full_ml, fit_logistic, information_covariance
from .solver import flag_perfect_prediction, solve_estimating_eq

__all__ = [
    "fit_full_ml",
    "fit_logistic",
    "flag_perfect_prediction",
    "guarded_inverse",
    "information",
    "information_covariance",
    "inv_logit",
    "inv_logit_deriv",
    "outer_mean",
    "sandwich",
    "score_contrib",
    "score_rows",
    "solve_estimating_eq",
]
