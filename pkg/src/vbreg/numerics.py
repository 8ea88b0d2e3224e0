"""Special functions and SPD linear algebra primitives shared by all fits.

Log-gamma and digamma are evaluated by upward recurrence into the asymptotic
regime followed by the standard asymptotic series, which is accurate to
better than 12 / 10 significant digits respectively for the argument ranges
the fits produce (everything >= 1e-2). The SPD helpers wrap LAPACK Cholesky
routines behind a bounded jitter retry policy, since the precision matrices
assembled inside long coordinate-ascent loops are SPD by construction but
accumulate round-off.

All functions are pure; there is no shared mutable state.
"""

import math
import re
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "FactorizationError",
    "CholeskyFactor",
    "log_gamma",
    "digamma",
    "chol",
    "spd_solve",
    "spd_logdet",
    "rank1_inv_update",
    "rank1_logdet_update",
    "sigmoid",
    "lambda_xi",
    "log_sigmoid",
]

# jitter policy: scale factors applied to (trace/dim) after a pivot failure
_JITTER_EPS = (1e-10, 1e-8, 1e-6)

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# asymptotic series coefficients B_2n / (2n (2n-1)) for log-gamma
_LGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)

# asymptotic series coefficients B_2n / 2n for digamma
_DIGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)

_ASYMPTOTIC_CUTOFF = 8.0


class FactorizationError(np.linalg.LinAlgError):
    """Cholesky factorization failed even after jitter escalation."""

    def __init__(self, pivot, attempts):
        self.pivot = pivot
        self.attempts = attempts
        super().__init__(
            f"matrix not positive definite at pivot {pivot} "
            f"after {attempts} jitter attempts"
        )


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor L with L @ L.T equal to the source matrix."""

    l: np.ndarray

    @property
    def dim(self):
        return self.l.shape[0]


def _check_positive_finite(x, name):
    if not (isinstance(x, (int, float, np.floating, np.integer))):
        raise TypeError(f"{name} must be a real scalar, got {type(x).__name__}")
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {x!r}")
    return x


def log_gamma(x):
    """Natural log of the gamma function for positive real arguments.

    Uses the recurrence ln Gamma(x) = ln Gamma(x + 1) - ln x to push the
    argument above 8, then the Stirling series.

    Raises ValueError for non-positive or non-finite input.
    """
    x = _check_positive_finite(x, "x")
    shift = 0.0
    while x < _ASYMPTOTIC_CUTOFF:
        shift -= math.log(x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    p = inv
    for c in _LGAMMA_COEF:
        series += c * p
        p *= inv2
    return shift + (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series


def digamma(x):
    """Digamma function psi(x) for positive real arguments.

    Uses the recurrence psi(x) = psi(x + 1) - 1/x to push the argument
    above 8, then the asymptotic expansion.

    Raises ValueError for non-positive or non-finite input.
    """
    x = _check_positive_finite(x, "x")
    shift = 0.0
    while x < _ASYMPTOTIC_CUTOFF:
        shift -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    p = inv2
    for c in _DIGAMMA_COEF:
        series += c * p
        p *= inv2
    return shift + math.log(x) - 0.5 * inv - series


def _symmetry_error(a):
    scale = np.abs(a).max()
    if scale == 0.0:
        return 0.0
    return np.abs(a - a.T).max() / scale


def chol(a):
    """Lower Cholesky factor of a symmetric positive definite matrix.

    On a pivot failure, eps * (trace/dim) * I is added to the diagonal with
    eps escalating through 1e-10, 1e-8, 1e-6 (at most three retries) before
    giving up with a FactorizationError that names the failing pivot.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if _symmetry_error(a) > 1e-12:
        raise ValueError("matrix is not symmetric within 1e-12 relative")

    dim = a.shape[0]
    base = np.trace(a) / dim
    pivot = None
    for attempt, eps in enumerate((0.0,) + _JITTER_EPS):
        try:
            target = a if eps == 0.0 else a + (eps * base) * np.eye(dim)
            l = scipy.linalg.cholesky(target, lower=True, check_finite=False)
            return CholeskyFactor(l=l)
        except scipy.linalg.LinAlgError as exc:
            m = re.match(r"(\d+)", str(exc))
            pivot = int(m.group(1)) if m else dim
    raise FactorizationError(pivot=pivot, attempts=len(_JITTER_EPS))


def spd_solve(f, b):
    """Solve (L L.T) x = b for a Cholesky factor and vector or matrix b."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != f.dim:
        raise ValueError(f"dimension mismatch: factor is {f.dim}, b has "
                         f"leading dimension {b.shape[0]}")
    return scipy.linalg.cho_solve((f.l, True), b, check_finite=False)


def spd_logdet(f):
    """Log-determinant of the matrix represented by a Cholesky factor."""
    return 2.0 * float(np.sum(np.log(np.diag(f.l))))


def rank1_inv_update(v, x, c):
    """Inverse of (V^-1 + c x x.T) given V, by the Sherman-Morrison formula.

    Returns V - c (V x)(V x).T / (1 + c x.T V x). Requires c >= 0.
    """
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=float)
    c = float(c)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(x)) and math.isfinite(c)):
        raise ValueError("inputs must be finite")
    if c < 0.0:
        raise ValueError(f"c must be nonnegative, got {c}")
    if c == 0.0:
        return v.copy()
    t = v @ x
    denom = 1.0 + c * float(x @ t)
    return v - (c / denom) * np.outer(t, t)


def rank1_logdet_update(logdet_v, v, x, c):
    """Log-determinant of (V^-1 + c x x.T)^-1 by the matrix determinant lemma.

    Returns logdet_v - log(1 + c x.T V x). Requires 1 + c x.T V x > 0.
    """
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=float)
    c = float(c)
    if c == 0.0:
        return float(logdet_v)
    growth = 1.0 + c * float(x @ (v @ x))
    if growth <= 0.0:
        raise ValueError(f"update would lose positive definiteness "
                         f"(1 + c x'Vx = {growth})")
    return float(logdet_v) - math.log(growth)


def sigmoid(z):
    """Logistic function 1 / (1 + exp(-z)), stable for |z| up to ~700.

    The evaluation never exponentiates a positive argument. Accepts scalars
    or arrays; returns the same shape.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


def log_sigmoid(z):
    """log(sigmoid(z)), computed without overflow for large |z|."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = -np.log1p(np.exp(-z[pos]))
    out[~pos] = z[~pos] - np.log1p(np.exp(z[~pos]))
    if out.ndim == 0:
        return float(out)
    return out


def lambda_xi(xi):
    """Curvature of the exponential-quadratic sigmoid bound.

    lambda(xi) = (sigmoid(xi) - 1/2) / (2 xi) for xi != 0, extended through
    the removable singularity with the Taylor series
    1/8 - xi^2/96 + xi^4/960 for |xi| < 1e-4. Even in xi. Accepts scalars
    or arrays.
    """
    xi = np.asarray(xi, dtype=float)
    axi = np.abs(xi)
    out = np.empty_like(axi)
    small = axi < 1e-4
    x2 = axi[small] ** 2
    out[small] = 0.125 - x2 / 96.0 + (x2 * x2) / 960.0
    b = axi[~small]
    out[~small] = (1.0 / (1.0 + np.exp(-b)) - 0.5) / (2.0 * b)
    if out.ndim == 0:
        return float(out)
    return out
