"""Variational Bayesian linear regression, with and without ARD.

The model places a zero-mean Gaussian prior on the coefficients whose
precision is tau * alpha (shared) or tau * diag(alpha_1..alpha_D) (ARD),
a Gamma(a0, b0) prior on the noise precision tau, and Gamma(c0, d0)
hyper-priors on the alpha's. Coordinate ascent alternates the (w, tau)
posterior update with the alpha posterior update and evaluates the
evidence lower bound after each sweep; iteration stops when the relative
bound change drops below rel_tol or the iteration cap is reached.

The predictive density for a query input is Student-t with mean w_N' x,
precision (1 + x' V_N x)^-1 a_N / b_N, and 2 a_N degrees of freedom.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .numerics import chol, log_gamma, spd_logdet, spd_solve

__all__ = [
    "LinearPriors",
    "FitOptions",
    "LinearPosterior",
    "StudentTPrediction",
    "fit_linear",
    "fit_linear_ard",
    "elbo_linear",
    "predict_linear",
    "student_t_logpdf",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LinearPriors:
    """Gamma prior (a0, b0) on the noise precision and hyper-prior (c0, d0)
    on the coefficient shrinkage precision(s)."""

    a0: float = 1e-2
    b0: float = 1e-4
    c0: float = 1e-2
    d0: float = 1e-4

    def __post_init__(self):
        for name in ("a0", "b0", "c0", "d0"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class FitOptions:
    """Convergence tolerance (relative bound change) and iteration cap."""

    rel_tol: float = 1e-5
    max_iter: int = 500

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError(f"rel_tol must be in (0, 1), got {self.rel_tol!r}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter!r}")
        object.__setattr__(self, "rel_tol", float(self.rel_tol))
        object.__setattr__(self, "max_iter", int(self.max_iter))


@dataclass
class LinearPosterior:
    """Fitted normal-inverse-gamma posterior and hyper-posterior summary.

    w_n and v_n parametrize the coefficient posterior (the coefficient
    covariance given tau is v_n / tau); (a_n, b_n) is the Gamma posterior of
    tau. e_alpha is the posterior mean of the shrinkage precision: a scalar
    for the shared prior, a length-D vector under ARD, and the clamped value
    when the fit was run with a fixed alpha. elbo is the final bound value;
    bound_trace holds the per-iteration bound sequence.
    """

    w_n: np.ndarray
    v_n: np.ndarray
    inv_v_n: np.ndarray
    logdet_v_n: float
    a_n: float
    b_n: float
    c_n: float
    d_n: object
    e_alpha: object
    elbo: float
    iterations: int
    converged: bool
    variant: str
    bound_trace: np.ndarray


@dataclass(frozen=True)
class StudentTPrediction:
    """Predictive mean, precision, and degrees of freedom at one input."""

    mu: float
    lam: float
    nu: float

    def variance(self):
        """Predictive variance nu / (lam (nu - 2)); requires nu > 2."""
        if self.nu <= 2.0:
            raise ValueError(f"variance undefined for nu = {self.nu} <= 2")
        return self.nu / (self.lam * (self.nu - 2.0))


def _elbo_value(ssr, sum_xvx, w, v_diag_sum, w_sq_sum, logdet_v, n, d,
                a_n, b_n, priors, ard, d_n, c_n, fixed_alpha):
    """Evidence lower bound from precomputed data terms.

    ssr is the residual sum of squares, sum_xvx is sum_n x_n' V x_n. Exact
    at states where d_n was refreshed from the current (w, v, a_n, b_n).
    """
    e_tau = a_n / b_n
    val = (-0.5 * n * _LOG_2PI
           - 0.5 * (e_tau * ssr + sum_xvx)
           + 0.5 * logdet_v
           + 0.5 * d
           - log_gamma(priors.a0) + priors.a0 * math.log(priors.b0)
           - priors.b0 * e_tau
           + log_gamma(a_n) - a_n * math.log(b_n) + a_n)
    if fixed_alpha is not None:
        quad = e_tau * w_sq_sum + v_diag_sum
        return val + 0.5 * d * math.log(fixed_alpha) - 0.5 * fixed_alpha * quad
    hyper = (-log_gamma(priors.c0) + priors.c0 * math.log(priors.d0)
             + log_gamma(c_n))
    if ard:
        return val + d * hyper - c_n * float(np.sum(np.log(d_n)))
    return val + hyper - c_n * math.log(d_n)


def _fit_linear_impl(data, priors, opts, ard, fixed_alpha):
    x, y = data.x, data.y
    n, d = x.shape
    if n < 1:
        raise ValueError("at least one observation is required")
    if fixed_alpha is not None:
        if ard:
            raise ValueError("fixed_alpha applies to the shared-prior fit only")
        fixed_alpha = float(fixed_alpha)
        if not (math.isfinite(fixed_alpha) and fixed_alpha > 0.0):
            raise ValueError(f"fixed_alpha must be positive, got {fixed_alpha!r}")

    xtx = x.T @ x
    xtx = 0.5 * (xtx + xtx.T)
    xty = x.T @ y
    yty = float(y @ y)
    eye = np.eye(d)

    a_n = priors.a0 + 0.5 * n
    c_n = priors.c0 + (0.5 if ard else 0.5 * d)
    if fixed_alpha is not None:
        e_alpha = fixed_alpha
    elif ard:
        e_alpha = np.full(d, priors.c0 / priors.d0)
    else:
        e_alpha = priors.c0 / priors.d0

    d_n = None
    trace = []
    prev = None
    converged = False
    iterations = 0
    for _ in range(opts.max_iter):
        iterations += 1

        # coefficient / noise-precision posterior
        if ard:
            inv_v = xtx + np.diag(e_alpha)
        else:
            inv_v = xtx + e_alpha * eye
        f = chol(inv_v)
        v = spd_solve(f, eye)
        v = 0.5 * (v + v.T)
        logdet_v = -spd_logdet(f)
        w = spd_solve(f, xty)
        b_n = priors.b0 + 0.5 * (yty - float(w @ xty))
        if not (b_n > 0.0 and math.isfinite(b_n)):
            raise FloatingPointError(f"noise-scale update collapsed (b_n={b_n})")

        # shrinkage hyper-posterior
        v_diag = np.diag(v)
        w_sq_sum = float(w @ w)
        if fixed_alpha is None:
            if ard:
                d_n = priors.d0 + 0.5 * ((a_n / b_n) * w**2 + v_diag)
                e_alpha = c_n / d_n
            else:
                d_n = priors.d0 + 0.5 * ((a_n / b_n) * w_sq_sum
                                         + float(v_diag.sum()))
                e_alpha = c_n / d_n

        resid = y - x @ w
        elbo = _elbo_value(
            ssr=float(resid @ resid),
            sum_xvx=float((v * xtx).sum()),
            w=w,
            v_diag_sum=float(v_diag.sum()),
            w_sq_sum=w_sq_sum,
            logdet_v=logdet_v,
            n=n, d=d, a_n=a_n, b_n=b_n,
            priors=priors, ard=ard, d_n=d_n, c_n=c_n,
            fixed_alpha=fixed_alpha)
        trace.append(elbo)
        if prev is not None and abs(elbo - prev) < opts.rel_tol * abs(elbo):
            converged = True
            break
        prev = elbo

    return LinearPosterior(
        w_n=w, v_n=v, inv_v_n=inv_v, logdet_v_n=logdet_v,
        a_n=a_n, b_n=b_n, c_n=c_n,
        d_n=d_n, e_alpha=e_alpha,
        elbo=trace[-1], iterations=iterations, converged=converged,
        variant="linear-ard" if ard else "linear",
        bound_trace=np.asarray(trace))


def fit_linear(data, priors=None, opts=None, fixed_alpha=None):
    """Fit the shared-shrinkage model by coordinate ascent on the bound.

    fixed_alpha clamps the shrinkage precision to a known constant and skips
    its posterior update; this exists so the fit can be checked against the
    closed-form conjugate posterior and is not part of the generative model.
    """
    return _fit_linear_impl(data, priors or LinearPriors(),
                            opts or FitOptions(), ard=False,
                            fixed_alpha=fixed_alpha)


def fit_linear_ard(data, priors=None, opts=None):
    """Fit with a separate shrinkage precision per coefficient (ARD)."""
    return _fit_linear_impl(data, priors or LinearPriors(),
                            opts or FitOptions(), ard=True, fixed_alpha=None)


def elbo_linear(state, data, priors=None, ard=None, fixed_alpha=None):
    """Evidence lower bound of a posterior state on the given data."""
    priors = priors or LinearPriors()
    if ard is None:
        ard = state.variant == "linear-ard"
    x, y = data.x, data.y
    resid = y - x @ state.w_n
    xv = x @ state.v_n
    v_diag = np.diag(state.v_n)
    return _elbo_value(
        ssr=float(resid @ resid),
        sum_xvx=float((xv * x).sum()),
        w=state.w_n,
        v_diag_sum=float(v_diag.sum()),
        w_sq_sum=float(state.w_n @ state.w_n),
        logdet_v=state.logdet_v_n,
        n=data.n, d=data.d,
        a_n=state.a_n, b_n=state.b_n,
        priors=priors, ard=ard, d_n=state.d_n, c_n=state.c_n,
        fixed_alpha=fixed_alpha)


def predict_linear(post, x_query):
    """Student-t predictive parameters for each row of x_query."""
    xq = np.atleast_2d(np.asarray(x_query, dtype=float))
    if xq.shape[1] != post.w_n.shape[0]:
        raise ValueError(f"query width {xq.shape[1]} does not match "
                         f"posterior dimension {post.w_n.shape[0]}")
    mu = xq @ post.w_n
    xvx = ((xq @ post.v_n) * xq).sum(axis=1)
    lam = (post.a_n / post.b_n) / (1.0 + xvx)
    nu = 2.0 * post.a_n
    return [StudentTPrediction(mu=float(m), lam=float(l), nu=nu)
            for m, l in zip(mu, lam)]


def student_t_logpdf(p, y):
    """Log density of the location-scale Student-t prediction at y."""
    z = p.lam * (y - p.mu) ** 2 / p.nu
    return (log_gamma(0.5 * (p.nu + 1.0)) - log_gamma(0.5 * p.nu)
            + 0.5 * (math.log(p.lam) - math.log(math.pi * p.nu))
            - 0.5 * (p.nu + 1.0) * math.log1p(z))
