# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled objective and Nelder-Mead loop for the intensity MLE.

Parameters live in scaled coordinates ``u``: the intensity at normalized time
``s = t / T`` is ``scale * (u0 + u1 s + u2 s^2)``. Feasible iff ``u0 >= 0``,
``u0 + u1 >= 0`` and ``u2 >= 0`` (for the dimensions present).
"""

from libc.math cimport log, fabs

cdef enum:
    MAXDIM = 3

cdef double LOG_FLOOR = 1e-12


cdef double _objective(const double* u, int n, const double[::1] s,
                       double scale, double horizon, double penalty) noexcept nogil:
    cdef double u0 = u[0]
    cdef double u1 = u[1] if n > 1 else 0.0
    cdef double u2 = u[2] if n > 2 else 0.0
    cdef double comp = scale * horizon * (u0 + u1 / 2.0 + u2 / 3.0)
    cdef double total = 0.0, lam, si, v, pen = 0.0
    cdef Py_ssize_t i
    for i in range(s.shape[0]):
        si = s[i]
        lam = scale * (u0 + si * (u1 + si * u2))
        if lam < LOG_FLOOR:
            lam = LOG_FLOOR
        total += log(lam)
    if u0 < 0.0:
        pen += u0 * u0
    if n > 1:
        v = u0 + u1
        if v < 0.0:
            pen += v * v
    if n > 2 and u2 < 0.0:
        pen += u2 * u2
    return comp - total + penalty * pen


def penalized_nll(u, const double[::1] s, double scale, double horizon, double penalty):
    """Negative log-likelihood plus quadratic exterior penalty."""
    cdef double buf[MAXDIM]
    cdef int n = len(u), j
    for j in range(n):
        buf[j] = u[j]
    return _objective(buf, n, s, scale, horizon, penalty)


cdef double _diameter(double sim[MAXDIM + 1][MAXDIM], int n) noexcept nogil:
    cdef double d = 0.0, e
    cdef int i, k, j
    for i in range(n + 1):
        for k in range(i + 1, n + 1):
            for j in range(n):
                e = fabs(sim[i][j] - sim[k][j])
                if e > d:
                    d = e
    return d


def nelder_mead(x0, step, const double[::1] s, double scale, double horizon,
                double penalty, double xtol, int maxiter):
    """Minimize the penalized objective from ``x0``.

    Returns ``(x, fval, iterations, converged)``; converged means the simplex
    diameter (max-norm) fell below ``xtol`` within ``maxiter`` iterations.
    """
    cdef double sim[MAXDIM + 1][MAXDIM]
    cdef double fs[MAXDIM + 1]
    cdef double cen[MAXDIM]
    cdef double xr[MAXDIM]
    cdef double xe[MAXDIM]
    cdef double xc[MAXDIM]
    cdef int n = len(x0)
    cdef int i, j, k, it = 0, best
    cdef double fr, fe, fc, tmp
    cdef bint converged = False
    if n < 1 or n > MAXDIM:
        raise ValueError("dimension must be 1..3")

    for j in range(n):
        sim[0][j] = x0[j]
    for i in range(1, n + 1):
        for j in range(n):
            sim[i][j] = sim[0][j]
        sim[i][i - 1] += step[i - 1]
    for i in range(n + 1):
        fs[i] = _objective(sim[i], n, s, scale, horizon, penalty)

    with nogil:
        while it < maxiter:
            # insertion sort by objective value
            for i in range(1, n + 1):
                k = i
                while k > 0 and fs[k] < fs[k - 1]:
                    tmp = fs[k]; fs[k] = fs[k - 1]; fs[k - 1] = tmp
                    for j in range(n):
                        tmp = sim[k][j]; sim[k][j] = sim[k - 1][j]; sim[k - 1][j] = tmp
                    k -= 1
            if _diameter(sim, n) <= xtol:
                converged = True
                break
            it += 1

            for j in range(n):
                cen[j] = 0.0
                for i in range(n):
                    cen[j] += sim[i][j]
                cen[j] /= n
            for j in range(n):
                xr[j] = 2.0 * cen[j] - sim[n][j]
            fr = _objective(xr, n, s, scale, horizon, penalty)

            if fr < fs[0]:
                for j in range(n):
                    xe[j] = 3.0 * cen[j] - 2.0 * sim[n][j]
                fe = _objective(xe, n, s, scale, horizon, penalty)
                if fe < fr:
                    for j in range(n):
                        sim[n][j] = xe[j]
                    fs[n] = fe
                else:
                    for j in range(n):
                        sim[n][j] = xr[j]
                    fs[n] = fr
                continue
            if fr < fs[n - 1]:
                for j in range(n):
                    sim[n][j] = xr[j]
                fs[n] = fr
                continue
            if fr < fs[n]:
                # outside contraction
                for j in range(n):
                    xc[j] = 1.5 * cen[j] - 0.5 * sim[n][j]
                fc = _objective(xc, n, s, scale, horizon, penalty)
                if fc <= fr:
                    for j in range(n):
                        sim[n][j] = xc[j]
                    fs[n] = fc
                    continue
            else:
                # inside contraction
                for j in range(n):
                    xc[j] = 0.5 * cen[j] + 0.5 * sim[n][j]
                fc = _objective(xc, n, s, scale, horizon, penalty)
                if fc < fs[n]:
                    for j in range(n):
                        sim[n][j] = xc[j]
                    fs[n] = fc
                    continue
            # shrink toward the best vertex
            for i in range(1, n + 1):
                for j in range(n):
                    sim[i][j] = sim[0][j] + 0.5 * (sim[i][j] - sim[0][j])
                fs[i] = _objective(sim[i], n, s, scale, horizon, penalty)

    if not converged:
        best = 0
        for i in range(1, n + 1):
            if fs[i] < fs[best]:
                best = i
    else:
        best = 0
    return [sim[best][j] for j in range(n)], fs[best], it, bool(converged)
