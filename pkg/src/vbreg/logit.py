"""Variational Bayesian logistic regression.

Labels are -1/+1 and the class-probability likelihood sigmoid(y w' x) is
handled through the exponential-quadratic lower bound on the sigmoid with
one local parameter xi per observation, which restores conjugacy to the
Gaussian coefficient prior. Three fits are provided:

* fit_logit: batch fit with a shared Gamma(a0, b0) hyper-prior on the
  coefficient precision; all xi are updated simultaneously.
* fit_logit_ard: per-coefficient precisions with independent hyper-priors,
  which prunes uninformative inputs.
* fit_logit_iter: single ordered pass with the fixed prior N(0, I/D),
  absorbing observations one at a time through rank-one (Sherman-Morrison
  and determinant-lemma) updates of V, V^-1 and log|V|.

predict_logit evaluates the bounded predictive probability of class +1 by
a per-query fixed point over (xi, completed Gaussian). The probability of
class -1 is reported as its complement; the bound itself is asymmetric
under label flip, which is documented behavior.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .linear import FitOptions
from .numerics import (chol, lambda_xi, log_gamma, log_sigmoid, spd_logdet,
                       spd_solve)

__all__ = [
    "LogitPriors",
    "LogitPosterior",
    "fit_logit",
    "fit_logit_ard",
    "fit_logit_iter",
    "update_xi",
    "logit_bound",
    "predict_logit",
]

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class LogitPriors:
    """Gamma hyper-prior (a0, b0) on the coefficient shrinkage precision."""

    a0: float = 1e-2
    b0: float = 1e-4

    def __post_init__(self):
        for name in ("a0", "b0"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, name, v)


@dataclass
class LogitPosterior:
    """Gaussian coefficient posterior with local bound parameters.

    For the hyper-prior variants, (a_n, b_n) is the Gamma posterior of the
    shrinkage precision (b_n is a vector under ARD) and e_alpha its mean.
    The fixed-prior incremental variant carries no hyper-posterior, so
    a_n, b_n and e_alpha are None there. xi holds one bound parameter per
    observation; bound is the final variational bound value.
    """

    w_n: np.ndarray
    v_n: np.ndarray
    inv_v_n: np.ndarray
    logdet_v_n: float
    e_alpha: object
    a_n: object
    b_n: object
    xi: np.ndarray
    bound: float
    iterations: int
    converged: bool
    variant: str
    bound_trace: object = None
    inner_traces: object = None


def _check_labels(y):
    bad = np.nonzero(~np.isin(y, (-1.0, 1.0)))[0]
    if bad.size:
        raise ValueError(
            f"labels must be -1 or +1; row {bad[0] + 1} has {y[bad[0]]!r}")


def update_xi(w_n, v_n, x):
    """Optimal local bound parameter: the nonnegative root of
    xi^2 = x' (V + w w') x."""
    x = np.asarray(x, dtype=float)
    q = float(x @ (np.asarray(v_n) @ x)) + float(np.asarray(w_n) @ x) ** 2
    return math.sqrt(max(q, 0.0))


def _update_xi_batch(w, v, x):
    # row-wise sqrt(x' (V + w w') x), vectorized over observations
    q = np.einsum("ij,ij->i", x, x @ (v + np.outer(w, w)))
    return np.sqrt(np.clip(q, 0.0, None))


def _xi_sum_term(xi):
    xi = np.asarray(xi, dtype=float)
    return float(np.sum(log_sigmoid(xi) - 0.5 * xi
                        + lambda_xi(xi) * xi * xi))


def _gamma_terms(a_n, b_n, priors, ard, d):
    base = -log_gamma(priors.a0) + priors.a0 * math.log(priors.b0) \
        + log_gamma(a_n) + a_n
    if ard:
        b_n = np.asarray(b_n, dtype=float)
        return d * base - float(np.sum(priors.b0 * (a_n / b_n)
                                       + a_n * np.log(b_n)))
    return base - priors.b0 * (a_n / b_n) - a_n * math.log(b_n)


def _qw_update(xtlamx2, sy, e_alpha, eye):
    inv_v = xtlamx2 + (np.diag(e_alpha) if np.ndim(e_alpha) else e_alpha * eye)
    f = chol(inv_v)
    v = spd_solve(f, eye)
    v = 0.5 * (v + v.T)
    logdet_v = -spd_logdet(f)
    w = spd_solve(f, sy)
    return inv_v, v, logdet_v, w


def _fit_logit_core(data, priors, opts, ard):
    x, y = data.x, data.y
    _check_labels(y)
    n, d = x.shape
    if n < 1:
        raise ValueError("at least one observation is required")

    sy = 0.5 * (x.T @ y)
    eye = np.eye(d)
    a_n = priors.a0 + (0.5 if ard else 0.5 * d)

    def xtlamx2(lam):
        m = x.T @ (lam[:, None] * x)
        return m + m.T    # 2 * sum_n lambda_n x_n x_n', symmetrized

    def b_update(w, v_diag):
        if ard:
            return priors.b0 + 0.5 * (w**2 + v_diag)
        return priors.b0 + 0.5 * (float(w @ w) + float(v_diag.sum()))

    def bound_value(w, logdet_v, v_diag, b_n, e_used, sum_xi):
        # the closed-form bound plus a correction that vanishes whenever
        # (v, w) were rebuilt from the current a_n / b_n, making the value
        # the exact bound of the current variational state at every record
        if ard:
            gap = float(np.sum((e_used - a_n / np.asarray(b_n))
                               * (w**2 + v_diag)))
        else:
            gap = (e_used - a_n / b_n) * (float(w @ w) + float(v_diag.sum()))
        return (0.5 * float(w @ sy) + 0.5 * logdet_v + sum_xi
                + _gamma_terms(a_n, b_n, priors, ard, d) + 0.5 * gap)

    # cold start: xi = 0 (lambda = 1/8) and prior-mean shrinkage
    xi = np.zeros(n)
    lam = np.full(n, 0.125)
    e_used = np.full(d, priors.a0 / priors.b0) if ard else priors.a0 / priors.b0

    inv_v, v, logdet_v, w = _qw_update(xtlamx2(lam), sy, e_used, eye)
    v_diag = np.diag(v).copy()
    b_n = b_update(w, v_diag)
    bound = bound_value(w, logdet_v, v_diag, b_n, e_used, -n * _LOG2)
    trace = [bound]

    converged = False
    iterations = 0
    for _ in range(opts.max_iter):
        iterations += 1
        xi = _update_xi_batch(w, v, x)
        lam = lambda_xi(xi)
        b_n = b_update(w, v_diag)
        e_used = a_n / b_n
        inv_v, v, logdet_v, w = _qw_update(xtlamx2(lam), sy, e_used, eye)
        v_diag = np.diag(v).copy()
        new = bound_value(w, logdet_v, v_diag, b_n, e_used, _xi_sum_term(xi))
        trace.append(new)
        if abs(new - bound) < opts.rel_tol * abs(new):
            bound = new
            converged = True
            break
        bound = new

    return LogitPosterior(
        w_n=w, v_n=v, inv_v_n=inv_v, logdet_v_n=logdet_v,
        e_alpha=(a_n / np.asarray(b_n)) if ard else a_n / b_n,
        a_n=a_n, b_n=b_n, xi=xi,
        bound=bound, iterations=iterations, converged=converged,
        variant="logit-ard" if ard else "logit",
        bound_trace=np.asarray(trace))


def fit_logit(data, priors=None, opts=None):
    """Batch fit with the shared shrinkage hyper-prior."""
    return _fit_logit_core(data, priors or LogitPriors(),
                           opts or FitOptions(), ard=False)


def fit_logit_ard(data, priors=None, opts=None):
    """Batch fit with per-coefficient shrinkage hyper-priors (ARD)."""
    return _fit_logit_core(data, priors or LogitPriors(),
                           opts or FitOptions(), ard=True)


def fit_logit_iter(data, opts=None, record_traces=False):
    """Single-pass incremental fit under the fixed prior N(0, I/D).

    Observations are absorbed in input order, each with its own bound
    parameter optimized to convergence; the posterior therefore depends on
    the data order. There is no hyper-posterior. With record_traces the
    per-datum bound sequences are attached to the result.
    """
    opts = opts or FitOptions()
    _check_labels(data.y)
    w, v, inv_v, logdet_v, xi, iters, converged, bound, traces = \
        _backend.logit_iter_pass(data.x, data.y, opts.rel_tol, opts.max_iter,
                                 record_traces)
    return LogitPosterior(
        w_n=w, v_n=v, inv_v_n=inv_v, logdet_v_n=logdet_v,
        e_alpha=None, a_n=None, b_n=None, xi=xi,
        bound=bound, iterations=iters, converged=converged,
        variant="logit-iter", inner_traces=traces)


def logit_bound(state, data, priors=None, variant=None):
    """Variational bound of a posterior state, per its variant's closed form.

    For the batch variants this is the full bound with the hyper-prior
    terms; for the incremental variant it is the per-datum objective at the
    last absorbed observation (hyper-prior free).
    """
    variant = variant or state.variant
    w_quad = 0.5 * float(state.w_n @ (state.inv_v_n @ state.w_n))
    if variant == "logit-iter":
        val = w_quad + 0.5 * state.logdet_v_n
        if state.xi is not None and len(state.xi):
            val += _xi_sum_term(state.xi[-1:])
        return val
    priors = priors or LogitPriors()
    if len(state.xi) != data.n:
        raise ValueError(f"state has {len(state.xi)} bound parameters for "
                         f"{data.n} observations")
    return (w_quad + 0.5 * state.logdet_v_n + _xi_sum_term(state.xi)
            + _gamma_terms(state.a_n, state.b_n, priors,
                           variant == "logit-ard", data.d))


def predict_logit(post, x_query, opts=None):
    """Probability of class +1 for each row of x_query.

    Each row is optimized independently (its own xi fixed point); the
    returned probabilities are clamped to [0, 1] since round-off can push
    the exponentiated bound marginally above one.
    """
    opts = opts or FitOptions()
    xq = np.atleast_2d(np.asarray(x_query, dtype=float))
    if xq.shape[1] != post.w_n.shape[0]:
        raise ValueError(f"query width {xq.shape[1]} does not match "
                         f"posterior dimension {post.w_n.shape[0]}")
    log_p, _ = _backend.logit_pred_rows(post.v_n, post.inv_v_n, post.w_n,
                                        xq, opts.rel_tol, opts.max_iter)
    return np.clip(np.exp(log_p), 0.0, 1.0)
