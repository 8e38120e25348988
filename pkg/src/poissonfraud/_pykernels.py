"""Pure-Python twin of ``_kernels.pyx``; same signatures and update rules."""

from __future__ import annotations

import math

LOG_FLOOR = 1e-12


def penalized_nll(u, s, scale, horizon, penalty):
    """Negative log-likelihood plus quadratic exterior penalty."""
    n = len(u)
    u0 = u[0]
    u1 = u[1] if n > 1 else 0.0
    u2 = u[2] if n > 2 else 0.0
    total = 0.0
    for si in s:
        lam = scale * (u0 + si * (u1 + si * u2))
        total += math.log(lam if lam > LOG_FLOOR else LOG_FLOOR)
    pen = 0.0
    if u0 < 0.0:
        pen += u0 * u0
    if n > 1 and u0 + u1 < 0.0:
        pen += (u0 + u1) ** 2
    if n > 2 and u2 < 0.0:
        pen += u2 * u2
    return scale * horizon * (u0 + u1 / 2.0 + u2 / 3.0) - total + penalty * pen


def _diameter(sim):
    return max(
        abs(p - q)
        for i, x in enumerate(sim)
        for y in sim[i + 1:]
        for p, q in zip(x, y)
    )


def nelder_mead(x0, step, s, scale, horizon, penalty, xtol, maxiter):
    """Minimize the penalized objective from ``x0``.

    Returns ``(x, fval, iterations, converged)``.
    """
    n = len(x0)
    if not 1 <= n <= 3:
        raise ValueError("dimension must be 1..3")
    s = [float(v) for v in s]

    def f(x):
        return penalized_nll(x, s, scale, horizon, penalty)

    sim = [[float(v) for v in x0]]
    for i in range(n):
        vertex = list(sim[0])
        vertex[i] += step[i]
        sim.append(vertex)
    fs = [f(x) for x in sim]

    it = 0
    converged = False
    while it < maxiter:
        order = sorted(range(n + 1), key=fs.__getitem__)
        sim = [sim[i] for i in order]
        fs = [fs[i] for i in order]
        if _diameter(sim) <= xtol:
            converged = True
            break
        it += 1

        cen = [sum(sim[i][j] for i in range(n)) / n for j in range(n)]
        worst = sim[n]
        xr = [2.0 * c - w for c, w in zip(cen, worst)]
        fr = f(xr)
        if fr < fs[0]:
            xe = [3.0 * c - 2.0 * w for c, w in zip(cen, worst)]
            fe = f(xe)
            if fe < fr:
                sim[n], fs[n] = xe, fe
            else:
                sim[n], fs[n] = xr, fr
            continue
        if fr < fs[n - 1]:
            sim[n], fs[n] = xr, fr
            continue
        if fr < fs[n]:
            xc = [1.5 * c - 0.5 * w for c, w in zip(cen, worst)]
            fc = f(xc)
            if fc <= fr:
                sim[n], fs[n] = xc, fc
                continue
        else:
            xc = [0.5 * c + 0.5 * w for c, w in zip(cen, worst)]
            fc = f(xc)
            if fc < fs[n]:
                sim[n], fs[n] = xc, fc
                continue
        for i in range(1, n + 1):
            sim[i] = [b + 0.5 * (v - b) for b, v in zip(sim[0], sim[i])]
            fs[i] = f(sim[i])

    best = 0 if converged else min(range(n + 1), key=fs.__getitem__)
    return list(sim[best]), fs[best], it, converged
