"""Pure-numpy implementations of the two loop-heavy kernels.

These are the fallback twins of the compiled module vbreg._kernels; both
implement the same recurrences so results agree to floating-point noise.

Both kernels exploit that, once a handful of per-datum (or per-row) scalars
have been reduced, the inner fixed point over the local bound parameter xi
costs O(1) per step. With the rank-one update V' = V - c t t' / (1 + c s)
(t = V x, s = x' V x, c = 2 lambda(xi)) and m the accumulated half-label
moment, the quantities that drive both the xi update and the bound are

    x' V' x            = s / (1 + c s)
    x' w'              = p / (1 + c s)          with p = x' V m
    w'' V'^-1 w'       = m' V m - c p^2 / (1 + c s)

so each inner step touches only scalars.
"""

import math

import numpy as np

from .numerics import lambda_xi, log_sigmoid

BACKEND_NAME = "python"


def logit_iter_pass(x, y, rel_tol, max_iter, record_traces=False):
    """Single ordered pass of the fixed-prior incremental logistic fit.

    Starting from the prior N(0, I/d), each observation is absorbed with its
    own bound parameter optimized to convergence; V, V^-1 and log|V| are
    maintained in parallel through rank-one updates.

    Returns (w, v, inv_v, logdet_v, xi, total_iterations, converged,
    last_bound, traces) where traces is a list of per-datum bound sequences
    (or None when not recorded).
    """
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, d = x.shape

    v = np.eye(d) / d
    inv_v = float(d) * np.eye(d)
    logdet = -d * math.log(d)
    g = np.zeros(d)          # running sum of (y_j / 2) x_j
    w = np.zeros(d)
    xi = np.zeros(n)
    total_iters = 0
    converged_all = True
    last_bound = 0.5 * logdet
    traces = [] if record_traces else None

    for j in range(n):
        xj = x[j]
        m = g + (0.5 * y[j]) * xj
        t = v @ xj
        s = float(xj @ t)
        u = v @ m
        p = float(xj @ u)
        mu = float(m @ u)

        lam = 0.125
        xij = 0.0
        denom = 1.0 + 2.0 * lam * s
        bound = (0.5 * (mu - 2.0 * lam * p * p / denom)
                 + 0.5 * (logdet - math.log(denom))
                 - math.log(2.0))
        trace = [bound] if record_traces else None

        converged = False
        for _ in range(max_iter):
            total_iters += 1
            xij = math.sqrt(s / denom + (p / denom) ** 2)
            lam = float(lambda_xi(xij))
            denom = 1.0 + 2.0 * lam * s
            new = (0.5 * (mu - 2.0 * lam * p * p / denom)
                   + 0.5 * (logdet - math.log(denom))
                   + float(log_sigmoid(xij)) - 0.5 * xij + lam * xij * xij)
            if record_traces:
                trace.append(new)
            if abs(new - bound) < rel_tol * abs(new):
                bound = new
                converged = True
                break
            bound = new
        if not converged:
            converged_all = False
        if record_traces:
            traces.append(np.asarray(trace))

        c2 = 2.0 * lam / denom
        v -= c2 * np.outer(t, t)
        inv_v += (2.0 * lam) * np.outer(xj, xj)
        logdet -= math.log(denom)
        w = u - (c2 * p) * t
        g = m
        xi[j] = xij
        last_bound = bound

    return w, v, inv_v, logdet, xi, total_iters, converged_all, last_bound, traces


def logit_pred_rows(v, inv_v, w, x, rel_tol, max_iter):
    """Predictive log-probability of class +1 for each row of x.

    Each row runs its own fixed point over (xi, completed Gaussian); rows are
    updated simultaneously but frozen individually at their own stopping
    time, so the result matches per-row sequential iteration.

    Returns (log_p, iterations_per_row).
    """
    x = np.ascontiguousarray(x, dtype=float)
    m_rows = x.shape[0]
    r = inv_v @ w
    wr = float(w @ r)

    t = x @ v
    s = np.einsum("ij,ij->i", x, t)
    np.clip(s, 0.0, None, out=s)
    u = w[None, :] + 0.5 * t
    p = np.einsum("ij,ij->i", x, u)
    mu_dot = u @ r + 0.5 * p

    lam = np.full(m_rows, 0.125)
    denom = 1.0 + 2.0 * lam * s
    bound = -0.5 * np.log(denom) - lam * p * p / denom - math.log(2.0)
    iters = np.zeros(m_rows, dtype=np.int64)

    active = np.arange(m_rows)
    for _ in range(max_iter):
        if active.size == 0:
            break
        sa, pa = s[active], p[active]
        da = denom[active]
        xia = np.sqrt(sa / da + (pa / da) ** 2)
        la = lambda_xi(xia)
        da = 1.0 + 2.0 * la * sa
        new = (-0.5 * np.log(da) - la * pa * pa / da
               + log_sigmoid(xia) - 0.5 * xia + la * xia * xia)
        iters[active] += 1
        done = np.abs(new - bound[active]) < rel_tol * np.abs(new)
        bound[active] = new
        denom[active] = da
        lam[active] = la
        active = active[~done]

    log_p = bound + 0.5 * (mu_dot - wr)
    return log_p, iters
