"""
misslogit: logistic regression with missing covariate blocks.

Complete-case, inverse-probability-weighted and hot-deck multiple
imputation estimators, with Rubin and sandwich variances.
"""

__version__ = "0.1.0"
