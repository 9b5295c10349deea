"""Pure-numpy kernels for the genie search.

Same algorithms and outputs as the numba kernels. Nelder-Mead runs all
simplices in lock-step: every candidate move is evaluated for every active
simplex and the accepted one is selected with masks.
"""
import numpy as np

RHO = 1.0
CHI = 2.0
PSI = 0.5
SIGMA = 0.5


def genie_objective(a1sq, a2sq, v1, v2, c, P1, P2, head, t1, t2, vmin):
    """Vectorized objective; ``inf`` outside the clamped useful-genie set."""
    with np.errstate(invalid="ignore", divide="ignore"):
        r1 = 1.0 - a2sq - v1
        r2 = 1.0 - a1sq - v2
        ok = (a1sq >= 0.0) & (a1sq <= 1.0) & (a2sq >= 0.0) & (a2sq <= 1.0)
        ok = ok & (v1 >= vmin) & (v2 >= vmin) & (r1 >= 0.0) & (r2 >= 0.0)
        ok = ok & ~(np.sqrt(np.where(ok, r1 * (1.0 - v1), 0.0)) - v1 < t1)
        ok = ok & ~(np.sqrt(np.where(ok, r2 * (1.0 - v2), 0.0)) - v2 < t2)
        c2 = c * c
        a1 = np.sqrt(np.clip(a1sq, 0.0, None))
        a2 = np.sqrt(np.clip(a2sq, 0.0, None))
        sv1 = np.sqrt(np.clip(v1, 0.0, None))
        sv2 = np.sqrt(np.clip(v2, 0.0, None))
        n1 = v1 * (P1 + c2 * P2 + 1.0 - a1sq) - 2.0 * c * a1 * P1 * sv1 + c2 * P1 * (1.0 + c2 * P2)
        n2 = v2 * (P2 + c2 * P1 + 1.0 - a2sq) - 2.0 * c * a2 * P2 * sv2 + c2 * P2 * (1.0 + c2 * P1)
        d1 = (c2 * P1 + 1.0 - a2sq) * v1
        d2 = (c2 * P2 + 1.0 - a1sq) * v2
        ok = ok & (n1 > 0.0) & (n2 > 0.0) & (d1 > 0.0) & (d2 > 0.0)
        val = 0.25 * (head + np.log2(np.where(ok, n1 / d1, 1.0)) + np.log2(np.where(ok, n2 / d2, 1.0)))
    return np.where(ok, val, np.inf)


def _evaluate(X, insts, vmin):
    # X: (..., K, 4) or (K, 4); insts: (K, 6)
    return genie_objective(
        X[..., 0], X[..., 1], X[..., 2], X[..., 3],
        insts[:, 0], insts[:, 1], insts[:, 2], insts[:, 3], insts[:, 4], insts[:, 5], vmin,
    )


def _initial_simplex(starts, steps, insts, vmin):
    K = starts.shape[0]
    sim = np.repeat(starts[:, None, :], 5, axis=1)
    fs = np.empty((K, 5))
    fs[:, 0] = _evaluate(starts, insts, vmin)
    for i in range(4):
        h = steps[:, i].copy()
        placed = np.zeros(K, dtype=bool)
        y = starts.copy()
        fy = np.full(K, np.inf)
        for _ in range(40):
            todo = ~placed
            if not todo.any():
                break
            plus = starts.copy()
            plus[:, i] = starts[:, i] + h
            f_plus = _evaluate(plus, insts, vmin)
            minus = starts.copy()
            minus[:, i] = starts[:, i] - h
            f_minus = _evaluate(minus, insts, vmin)
            take_plus = todo & np.isfinite(f_plus)
            take_minus = todo & ~take_plus & np.isfinite(f_minus)
            y[take_plus] = plus[take_plus]
            fy[take_plus] = f_plus[take_plus]
            y[take_minus] = minus[take_minus]
            fy[take_minus] = f_minus[take_minus]
            placed |= take_plus | take_minus
            h = np.where(placed, h, h * 0.5)
        left = ~placed
        y[left] = starts[left]
        y[left, i] = starts[left, i] + steps[left, i]
        fy[left] = np.inf
        sim[:, i + 1] = y
        fs[:, i + 1] = fy
    return sim, fs


def _sort(sim, fs):
    order = np.argsort(fs, axis=1, kind="stable")
    fs = np.take_along_axis(fs, order, axis=1)
    sim = np.take_along_axis(sim, order[:, :, None], axis=1)
    return sim, fs


def nelder_mead_batch(starts, steps, insts, vmin, max_iters, fatol, xatol):
    """Lock-step Nelder-Mead over all rows of ``starts``; returns ``(xs, fs, its)``."""
    starts = np.asarray(starts, dtype=float)
    steps = np.asarray(steps, dtype=float)
    insts = np.asarray(insts, dtype=float)
    K = starts.shape[0]
    sim, fs = _initial_simplex(starts, steps, insts, vmin)
    its = np.zeros(K, dtype=np.int64)
    active = np.ones(K, dtype=bool)
    for _ in range(max_iters + 1):
        sim, fs = _sort(sim, fs)
        with np.errstate(invalid="ignore"):
            flat = fs[:, 4] - fs[:, 0] <= fatol
        spread = np.abs(sim[:, 1:] - sim[:, :1]).max(axis=(1, 2))
        active &= ~(flat & (spread <= xatol)) & (its < max_iters)
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        s = sim[idx]
        f = fs[idx]
        ins = insts[idx]
        worst = s[:, 4]
        xbar = (((s[:, 0] + s[:, 1]) + s[:, 2]) + s[:, 3]) / 4.0
        xr = (1.0 + RHO) * xbar - RHO * worst
        fr = _evaluate(xr, ins, vmin)
        xe = (1.0 + RHO * CHI) * xbar - RHO * CHI * worst
        fe = _evaluate(xe, ins, vmin)
        xoc = (1.0 + PSI * RHO) * xbar - PSI * RHO * worst
        foc = _evaluate(xoc, ins, vmin)
        xic = (1.0 - PSI) * xbar + PSI * worst
        fic = _evaluate(xic, ins, vmin)

        expand = fr < f[:, 0]
        reflect = ~expand & (fr < f[:, 3])
        outside = ~expand & ~reflect & (fr < f[:, 4])
        inside = ~expand & ~reflect & ~outside

        new_x = worst.copy()
        new_f = f[:, 4].copy()
        use_e = expand & (fe < fr)
        use_r = (expand & ~use_e) | reflect
        use_oc = outside & (foc <= fr)
        use_ic = inside & (fic < f[:, 4])
        shrink = (outside & ~use_oc) | (inside & ~use_ic)
        for mask, x_new, f_new in ((use_e, xe, fe), (use_r, xr, fr), (use_oc, xoc, foc), (use_ic, xic, fic)):
            new_x[mask] = x_new[mask]
            new_f[mask] = f_new[mask]
        s[:, 4] = new_x
        f[:, 4] = new_f
        if shrink.any():
            sh = np.flatnonzero(shrink)
            best = s[sh, 0][:, None, :]
            moved = best + SIGMA * (s[sh, 1:] - best)
            s[sh, 1:] = moved
            rep = np.repeat(ins[sh], 4, axis=0)
            f[sh, 1:] = _evaluate(moved.reshape(-1, 4), rep, vmin).reshape(-1, 4)
        sim[idx] = s
        fs[idx] = f
        its[idx] += 1
    sim, fs = _sort(sim, fs)
    return sim[:, 0].copy(), fs[:, 0].copy(), its


def grid_search(a_vals, v_vals, inst, vmin):
    """Exhaustive grid minimum, one ``a1`` slab at a time; same contract as the numba kernel."""
    a_vals = np.asarray(a_vals, dtype=float)
    v_vals = np.asarray(v_vals, dtype=float)
    c, P1, P2, head, t1, t2 = (float(x) for x in inst)
    A2 = a_vals[:, None, None]
    V1 = v_vals[None, :, None]
    V2 = v_vals[None, None, :]
    value = np.inf
    best = (0, 0, 0, 0)
    for i, a1 in enumerate(a_vals):
        F = genie_objective(a1, A2, V1, V2, c, P1, P2, head, t1, t2, vmin)
        flat = int(np.argmin(F))
        fmin = F.flat[flat]
        if fmin < value:
            value = float(fmin)
            j, k, l = np.unravel_index(flat, F.shape)
            best = (i, int(j), int(k), int(l))
    return value, best[0], best[1], best[2], best[3]
