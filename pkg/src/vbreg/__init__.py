"""Variational Bayesian linear and logistic regression.

Coordinate-ascent inference for hierarchical linear and logistic regression
with optional automatic relevance determination, Student-t and bounded
sigmoid-Gaussian predictive densities, and bound-based model selection.
Exposed as a library and as the `vbreg` command-line tool.
"""

from ._backend import backend_name
from .dataio import (Dataset, LabelDataset, gen_linear_coeff,
                     gen_linear_sparse, gen_logit_plane, gen_logit_sparse,
                     gen_polynomial, load_csv, save_csv)
from .linear import (FitOptions, LinearPosterior, LinearPriors,
                     StudentTPrediction, elbo_linear, fit_linear,
                     fit_linear_ard, predict_linear, student_t_logpdf)
from .logit import (LogitPosterior, LogitPriors, fit_logit, fit_logit_ard,
                    fit_logit_iter, logit_bound, predict_logit, update_xi)
from .modelsel import CandidateResult, polynomial_design, select_model
from .numerics import (CholeskyFactor, FactorizationError, chol, digamma,
                       lambda_xi, log_gamma, rank1_inv_update,
                       rank1_logdet_update, sigmoid, spd_logdet, spd_solve)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "Dataset", "LabelDataset", "load_csv", "save_csv",
    "gen_linear_coeff", "gen_linear_sparse", "gen_polynomial",
    "gen_logit_plane", "gen_logit_sparse",
    "FitOptions", "LinearPriors", "LinearPosterior", "StudentTPrediction",
    "fit_linear", "fit_linear_ard", "elbo_linear", "predict_linear",
    "student_t_logpdf",
    "LogitPriors", "LogitPosterior", "fit_logit", "fit_logit_ard",
    "fit_logit_iter", "update_xi", "logit_bound", "predict_logit",
    "CandidateResult", "polynomial_design", "select_model",
    "CholeskyFactor", "FactorizationError", "chol", "spd_solve",
    "spd_logdet", "rank1_inv_update", "rank1_logdet_update",
    "log_gamma", "digamma", "sigmoid", "lambda_xi",
]
