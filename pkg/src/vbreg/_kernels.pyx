# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner loops: incremental logistic fit and per-row prediction.

Same recurrences as vbreg._kernels_py; see that module for the scalar
reduction that makes each inner fixed-point step O(1).
"""

from libc.math cimport exp, fabs, log, log1p, sqrt

import numpy as np

BACKEND_NAME = "compiled"


cdef inline double _lam(double xi) noexcept nogil:
    # xi >= 0 in all call sites
    cdef double x2
    if xi < 1e-4:
        x2 = xi * xi
        return 0.125 - x2 / 96.0 + (x2 * x2) / 960.0
    return (1.0 / (1.0 + exp(-xi)) - 0.5) / (2.0 * xi)


cdef inline double _lnsig(double xi) noexcept nogil:
    # log(sigmoid(xi)) for xi >= 0
    return -log1p(exp(-xi))


def logit_iter_pass(x, y, double rel_tol, int max_iter, bint record_traces=False):
    """Single ordered pass of the fixed-prior incremental logistic fit."""
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t d = xv.shape[1]

    v_arr = np.eye(d) / d
    inv_arr = float(d) * np.eye(d)
    g_arr = np.zeros(d)
    m_arr = np.zeros(d)
    t_arr = np.zeros(d)
    u_arr = np.zeros(d)
    w_arr = np.zeros(d)
    xi_arr = np.zeros(n)

    cdef double[:, ::1] v = v_arr
    cdef double[:, ::1] inv_v = inv_arr
    cdef double[::1] g = g_arr
    cdef double[::1] m = m_arr
    cdef double[::1] t = t_arr
    cdef double[::1] u = u_arr
    cdef double[::1] w = w_arr
    cdef double[::1] xi = xi_arr

    cdef double logdet = -d * log(<double> d)
    cdef double last_bound = 0.5 * logdet
    cdef long total_iters = 0
    cdef bint converged_all = True
    cdef bint converged
    cdef Py_ssize_t i, j, k, it
    cdef double half_y, s, p, mu, lam, xij, denom, bound, new, c2, scale, acc

    traces = [] if record_traces else None
    trace = None

    for j in range(n):
        half_y = 0.5 * yv[j]
        for i in range(d):
            m[i] = g[i] + half_y * xv[j, i]
        s = 0.0
        p = 0.0
        mu = 0.0
        for i in range(d):
            acc = 0.0
            for k in range(d):
                acc += v[i, k] * xv[j, k]
            t[i] = acc
            s += xv[j, i] * acc
        for i in range(d):
            acc = 0.0
            for k in range(d):
                acc += v[i, k] * m[k]
            u[i] = acc
            p += xv[j, i] * acc
            mu += m[i] * acc

        lam = 0.125
        xij = 0.0
        denom = 1.0 + 2.0 * lam * s
        bound = (0.5 * (mu - 2.0 * lam * p * p / denom)
                 + 0.5 * (logdet - log(denom))
                 - log(2.0))
        if record_traces:
            trace = [bound]

        converged = False
        for it in range(max_iter):
            total_iters += 1
            xij = sqrt(s / denom + (p / denom) * (p / denom))
            lam = _lam(xij)
            denom = 1.0 + 2.0 * lam * s
            new = (0.5 * (mu - 2.0 * lam * p * p / denom)
                   + 0.5 * (logdet - log(denom))
                   + _lnsig(xij) - 0.5 * xij + lam * xij * xij)
            if record_traces:
                trace.append(new)
            if fabs(new - bound) < rel_tol * fabs(new):
                bound = new
                converged = True
                break
            bound = new
        if not converged:
            converged_all = False
        if record_traces:
            traces.append(np.asarray(trace))

        c2 = 2.0 * lam / denom
        for i in range(d):
            scale = c2 * t[i]
            for k in range(d):
                v[i, k] -= scale * t[k]
        for i in range(d):
            scale = 2.0 * lam * xv[j, i]
            for k in range(d):
                inv_v[i, k] += scale * xv[j, k]
        logdet -= log(denom)
        c2 = c2 * p
        for i in range(d):
            w[i] = u[i] - c2 * t[i]
            g[i] = m[i]
        xi[j] = xij
        last_bound = bound

    return (w_arr, v_arr, inv_arr, logdet, xi_arr,
            int(total_iters), bool(converged_all), last_bound, traces)


def logit_pred_rows(v, inv_v, w, x, double rel_tol, int max_iter):
    """Predictive log-probability of class +1 for each row of x."""
    cdef double[:, ::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    r_arr = (np.ascontiguousarray(inv_v, dtype=np.float64)
             @ np.asarray(w, dtype=np.float64))
    cdef double[::1] r = r_arr
    cdef Py_ssize_t m_rows = xv.shape[0]
    cdef Py_ssize_t d = xv.shape[1]

    out = np.empty(m_rows)
    iters = np.zeros(m_rows, dtype=np.int64)
    cdef double[::1] outv = out
    cdef long[::1] itv = iters

    cdef double wr = 0.0
    cdef Py_ssize_t i, k, row, it
    cdef double s, p, ru, mu_dot, ti, ui, lam, denom, bound, new, xij

    for i in range(d):
        wr += wv[i] * r[i]

    for row in range(m_rows):
        s = 0.0
        p = 0.0
        ru = 0.0
        for i in range(d):
            ti = 0.0
            for k in range(d):
                ti += vv[i, k] * xv[row, k]
            ui = wv[i] + 0.5 * ti
            s += xv[row, i] * ti
            p += xv[row, i] * ui
            ru += r[i] * ui
        if s < 0.0:
            s = 0.0
        mu_dot = ru + 0.5 * p

        lam = 0.125
        denom = 1.0 + 2.0 * lam * s
        bound = -0.5 * log(denom) - lam * p * p / denom - log(2.0)
        for it in range(max_iter):
            itv[row] += 1
            xij = sqrt(s / denom + (p / denom) * (p / denom))
            lam = _lam(xij)
            denom = 1.0 + 2.0 * lam * s
            new = (-0.5 * log(denom) - lam * p * p / denom
                   + _lnsig(xij) - 0.5 * xij + lam * xij * xij)
            if fabs(new - bound) < rel_tol * fabs(new):
                bound = new
                break
            bound = new
        outv[row] = bound + 0.5 * (mu_dot - wr)

    return out, iters
