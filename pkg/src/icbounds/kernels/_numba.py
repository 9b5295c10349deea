"""Numba kernels for the genie search.

Instance rows are ``(c, P1, P2, head, t1, t2)`` with ``head`` the received
power log term and ``tk = c^2 Pk``. Points are ``(a1^2, a2^2, v1, v2)``.
"""
import math

import numpy as np
from numba import njit, prange

_jit = njit(cache=True, nogil=True)

RHO = 1.0
CHI = 2.0
PSI = 0.5
SIGMA = 0.5


@_jit
def genie_objective(a1sq, a2sq, v1, v2, c, P1, P2, head, t1, t2, vmin):
    """Objective value, or ``inf`` outside the clamped useful-genie set."""
    if a1sq < 0.0 or a1sq > 1.0 or a2sq < 0.0 or a2sq > 1.0:
        return np.inf
    if v1 < vmin or v2 < vmin:
        return np.inf
    r1 = 1.0 - a2sq - v1
    r2 = 1.0 - a1sq - v2
    if r1 < 0.0 or r2 < 0.0:
        return np.inf
    if math.sqrt(r1 * (1.0 - v1)) - v1 < t1:
        return np.inf
    if math.sqrt(r2 * (1.0 - v2)) - v2 < t2:
        return np.inf
    c2 = c * c
    a1 = math.sqrt(a1sq)
    a2 = math.sqrt(a2sq)
    n1 = v1 * (P1 + c2 * P2 + 1.0 - a1sq) - 2.0 * c * a1 * P1 * math.sqrt(v1) + c2 * P1 * (1.0 + c2 * P2)
    n2 = v2 * (P2 + c2 * P1 + 1.0 - a2sq) - 2.0 * c * a2 * P2 * math.sqrt(v2) + c2 * P2 * (1.0 + c2 * P1)
    d1 = (c2 * P1 + 1.0 - a2sq) * v1
    d2 = (c2 * P2 + 1.0 - a1sq) * v2
    if n1 <= 0.0 or n2 <= 0.0 or d1 <= 0.0 or d2 <= 0.0:
        return np.inf
    return 0.25 * (head + math.log2(n1 / d1) + math.log2(n2 / d2))


@_jit
def _eval(x, inst, vmin):
    return genie_objective(x[0], x[1], x[2], x[3], inst[0], inst[1], inst[2], inst[3], inst[4], inst[5], vmin)


@_jit
def nelder_mead(x0, step, inst, vmin, max_iters, fatol, xatol):
    """Rejection Nelder-Mead from ``x0``; returns ``(x, f, iterations)``."""
    n = 4
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    sim[0] = x0
    fs[0] = _eval(x0, inst, vmin)
    y = np.empty(n)
    for i in range(n):
        h = step[i]
        placed = False
        for _ in range(40):
            y[:] = x0
            y[i] = x0[i] + h
            fy = _eval(y, inst, vmin)
            if fy < np.inf:
                placed = True
                break
            y[i] = x0[i] - h
            fy = _eval(y, inst, vmin)
            if fy < np.inf:
                placed = True
                break
            h *= 0.5
        if not placed:
            y[:] = x0
            y[i] = x0[i] + step[i]
            fy = np.inf
        sim[i + 1] = y
        fs[i + 1] = fy

    xbar = np.empty(n)
    xr = np.empty(n)
    xe = np.empty(n)
    xc = np.empty(n)
    it = 0
    while True:
        # stable insertion sort by value
        for j in range(1, n + 1):
            fj = fs[j]
            xj = sim[j].copy()
            k = j - 1
            while k >= 0 and fs[k] > fj:
                fs[k + 1] = fs[k]
                sim[k + 1] = sim[k]
                k -= 1
            fs[k + 1] = fj
            sim[k + 1] = xj
        if it >= max_iters:
            break
        if fs[n] - fs[0] <= fatol:
            spread = 0.0
            for j in range(1, n + 1):
                for d in range(n):
                    spread = max(spread, abs(sim[j, d] - sim[0, d]))
            if spread <= xatol:
                break

        for d in range(n):
            acc = 0.0
            for j in range(n):
                acc += sim[j, d]
            xbar[d] = acc / n
        for d in range(n):
            xr[d] = (1.0 + RHO) * xbar[d] - RHO * sim[n, d]
        fr = _eval(xr, inst, vmin)
        shrink = False
        if fr < fs[0]:
            for d in range(n):
                xe[d] = (1.0 + RHO * CHI) * xbar[d] - RHO * CHI * sim[n, d]
            fe = _eval(xe, inst, vmin)
            if fe < fr:
                sim[n] = xe
                fs[n] = fe
            else:
                sim[n] = xr
                fs[n] = fr
        elif fr < fs[n - 1]:
            sim[n] = xr
            fs[n] = fr
        elif fr < fs[n]:
            for d in range(n):
                xc[d] = (1.0 + PSI * RHO) * xbar[d] - PSI * RHO * sim[n, d]
            fc = _eval(xc, inst, vmin)
            if fc <= fr:
                sim[n] = xc
                fs[n] = fc
            else:
                shrink = True
        else:
            for d in range(n):
                xc[d] = (1.0 - PSI) * xbar[d] + PSI * sim[n, d]
            fc = _eval(xc, inst, vmin)
            if fc < fs[n]:
                sim[n] = xc
                fs[n] = fc
            else:
                shrink = True
        if shrink:
            for j in range(1, n + 1):
                for d in range(n):
                    sim[j, d] = sim[0, d] + SIGMA * (sim[j, d] - sim[0, d])
                fs[j] = _eval(sim[j], inst, vmin)
        it += 1
    return sim[0].copy(), fs[0], it


@njit(cache=True, nogil=True, parallel=True)
def nelder_mead_batch(starts, steps, insts, vmin, max_iters, fatol, xatol):
    """Independent Nelder-Mead runs, one per row of ``starts``.

    ``insts[k]`` is the instance row for start ``k``. Each run writes only
    its own output slot, so results do not depend on the thread count.
    """
    K = starts.shape[0]
    xs = np.empty((K, 4))
    fs = np.empty(K)
    its = np.empty(K, dtype=np.int64)
    for k in prange(K):
        x, f, it = nelder_mead(starts[k], steps[k], insts[k], vmin, max_iters, fatol, xatol)
        xs[k] = x
        fs[k] = f
        its[k] = it
    return xs, fs, its


@njit(cache=True, nogil=True, parallel=True)
def grid_search(a_vals, v_vals, inst, vmin):
    """Exhaustive minimum over the product grid ``a1 x a2 x v1 x v2``.

    Returns ``(value, i, j, k, l)`` for the lexicographically first minimizer
    in ``(a1, a2, v1, v2)`` order; ``value`` is ``inf`` when no grid point is
    feasible.
    """
    na = a_vals.shape[0]
    nv = v_vals.shape[0]
    best = np.full(na, np.inf)
    arg = np.zeros((na, 3), dtype=np.int64)
    for i in prange(na):
        bi = np.inf
        bj = 0
        bk = 0
        bl = 0
        for j in range(na):
            for k in range(nv):
                for l in range(nv):
                    f = genie_objective(a_vals[i], a_vals[j], v_vals[k], v_vals[l],
                                        inst[0], inst[1], inst[2], inst[3], inst[4], inst[5], vmin)
                    if f < bi:
                        bi = f
                        bj = j
                        bk = k
                        bl = l
        best[i] = bi
        arg[i, 0] = bj
        arg[i, 1] = bk
        arg[i, 2] = bl
    value = np.inf
    bi_idx = 0
    for i in range(na):
        if best[i] < value:
            value = best[i]
            bi_idx = i
    return value, bi_idx, arg[bi_idx, 0], arg[bi_idx, 1], arg[bi_idx, 2]
