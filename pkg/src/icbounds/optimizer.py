"""Genie search: the inner minimum g(P1, P2) of the outer-bound objective over
the useful-genie set, the outer maximum over symmetric private powers, and an
exhaustive grid oracle.

The inner problem lives in four coordinates ``(a1^2, a2^2, v1, v2)``.
Infeasible points are rejected (valued ``+inf``), never penalised, because
minimisers tend to sit on the boundary of the set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (
    V_MIN,
    ChannelParams,
    GenieParams,
    PowerAllocation,
    genie_objective_f,
    max_genie_variance,
    max_lower_bound,
    useful_genie_feasible,
)
from .errors import DomainError
from .regimes import smart_genie_solve

# Nelder-Mead stopping tolerances (value spread and simplex diameter).
NM_FATOL = 1e-13
NM_XATOL = 1e-10
# Random starts stay this fraction inside the largest feasible variance.
_START_MARGIN = 0.999
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    outer_grid_points: int = 257
    inner_multistarts: int = 32
    inner_max_iters: int = 500
    feasibility_tol: float = 1e-10
    value_tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        for name in ("outer_grid_points", "inner_multistarts", "inner_max_iters"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be >= 1")
        for name in ("feasibility_tol", "value_tol"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be > 0")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class GenieCertificate:
    gp: GenieParams
    value_bits: float
    feasible: bool
    alloc: PowerAllocation


@dataclass(frozen=True)
class UpperBound:
    upper_bits: float
    P1: float | None
    certificate: GenieCertificate | None

    @property
    def certified(self) -> bool:
        """False when the bound is void (``upper_bits`` is ``+inf``)."""
        return self.certificate is not None


def _instance(ch: ChannelParams, alloc: PowerAllocation) -> np.ndarray:
    """Kernel instance row ``(c, P1, P2, head, t1, t2)``."""
    P, c = ch.P, ch.c
    c2 = c * c
    P1, P2 = alloc.P1, alloc.P2
    received = P + c2 * P + 2.0 * c * math.sqrt((P - P1) * (P - P2)) + 1.0
    head = 2.0 * math.log2(received) - math.log2(c2 * P1 + 1.0) - math.log2(c2 * P2 + 1.0)
    return np.array([c, P1, P2, head, c2 * P1, c2 * P2])


def _max_a_sq(load: float) -> float:
    # largest a^2 leaving room for v >= V_MIN under the given load
    return (1.0 - load * load - 2.0 * V_MIN * (1.0 + load)) / (1.0 - V_MIN)


def _warm_starts(ch: ChannelParams, alloc: PowerAllocation) -> list[np.ndarray]:
    if ch.c == 0.0:
        return [np.array([0.0, 0.0, 0.5, 0.5])]
    sol = smart_genie_solve(ChannelParams(max(alloc.P1, alloc.P2), ch.c))
    if sol is None:
        return []
    return [np.array([sol.a_sq, sol.a_sq, sol.b_sq, sol.b_sq])]


def _random_starts(inst: np.ndarray, n: int, seed: int, stream: int) -> np.ndarray:
    """``n`` feasible points drawn from a Philox stream keyed by ``(seed, stream)``.

    ``a_k^2`` is uniform up to its largest feasible value, then each ``v`` is
    uniform on its feasible interval given the other coefficient.
    """
    t1, t2 = inst[4], inst[5]
    rng = np.random.Generator(np.random.Philox(key=[seed, stream]))
    u = rng.random((n, 4))
    a1sq = u[:, 0] * min(_max_a_sq(t2), 1.0)
    a2sq = u[:, 1] * min(_max_a_sq(t1), 1.0)
    vmax1 = _START_MARGIN * max_genie_variance(a2sq, t1)
    vmax2 = _START_MARGIN * max_genie_variance(a1sq, t2)
    v1 = V_MIN + u[:, 2] * np.maximum(vmax1 - V_MIN, 0.0)
    v2 = V_MIN + u[:, 3] * np.maximum(vmax2 - V_MIN, 0.0)
    return np.column_stack([a1sq, a2sq, v1, v2])


def _steps(starts: np.ndarray) -> np.ndarray:
    steps = np.empty_like(starts)
    steps[:, :2] = 0.05
    steps[:, 2:] = np.maximum(0.25 * starts[:, 2:], 1e-4)
    return steps


def _has_feasible_start(inst: np.ndarray) -> bool:
    return _max_a_sq(inst[5]) >= 0.0 and _max_a_sq(inst[4]) >= 0.0


def _certificate(ch, alloc, x, cfg) -> GenieCertificate:
    gp = GenieParams(*(float(v) for v in np.clip(x, [0.0, 0.0, V_MIN, V_MIN], [1.0, 1.0, np.inf, np.inf])))
    value = genie_objective_f(ch, alloc, gp)
    return GenieCertificate(gp, value, useful_genie_feasible(ch, alloc, gp, cfg.feasibility_tol), alloc)


def _solve_batch(ch: ChannelParams, allocs, streams, cfg: OptimizerConfig):
    """Multistart descent for several allocations in one kernel call.

    Returns one certificate (or ``None``) per allocation. Allocations with an
    empty set of feasible starts fall back to the grid oracle.
    """
    insts = [_instance(ch, alloc) for alloc in allocs]
    blocks, owners = [], []
    for i, (alloc, inst, stream) in enumerate(zip(allocs, insts, streams)):
        if not _has_feasible_start(inst):
            continue
        warm = _warm_starts(ch, alloc)[: cfg.inner_multistarts]
        rand = _random_starts(inst, cfg.inner_multistarts - len(warm), cfg.seed, stream)
        starts = np.vstack(warm + [rand]) if warm else rand
        blocks.append(starts)
        owners.extend([i] * len(starts))

    results: list[GenieCertificate | None] = [None] * len(allocs)
    if blocks:
        starts = np.vstack(blocks)
        owner = np.asarray(owners)
        batch_insts = np.vstack([insts[i] for i in owners])
        xs, fs, _ = kernels.nelder_mead_batch(
            starts, _steps(starts), batch_insts, V_MIN, cfg.inner_max_iters, NM_FATOL, NM_XATOL
        )
        for i in np.unique(owner):
            rows = np.flatnonzero(owner == i)
            best = rows[int(np.argmin(fs[rows]))]
            if np.isfinite(fs[best]):
                results[i] = _certificate(ch, allocs[i], xs[best], cfg)

    for i, alloc in enumerate(allocs):
        if results[i] is None:
            results[i] = _grid_fallback(ch, alloc, insts[i], cfg)
    return results


def _grid_fallback(ch, alloc, inst, cfg):
    hit = brute_force_oracle(ch, alloc, 33, refine=True)
    if hit is None:
        return None
    x0 = np.array([hit[1].as_tuple()])
    xs, fs, _ = kernels.nelder_mead_batch(
        x0, _steps(x0), inst[None, :], V_MIN, cfg.inner_max_iters, NM_FATOL, NM_XATOL
    )
    x = xs[0] if fs[0] <= hit[0] else x0[0]
    return _certificate(ch, alloc, x, cfg)


def inner_min_g(
    ch: ChannelParams, alloc: PowerAllocation, cfg: OptimizerConfig | None = None, stream: int = 0
) -> GenieCertificate | None:
    """Smallest objective value found over the useful-genie set.

    Multistart Nelder-Mead from the smart-genie point (when one exists) and
    random feasible draws; ``stream`` selects the random substream. Returns
    ``None`` when no feasible genie is found, which means the bound is void.
    """
    cfg = cfg or OptimizerConfig()
    alloc.check(ch)
    return _solve_batch(ch, [alloc], [stream], cfg)[0]


def _oracle_axes(n: int):
    axis = np.arange(n) / (n - 1)
    return axis, axis


def brute_force_oracle(
    ch: ChannelParams, alloc: PowerAllocation, grid_per_axis: int, refine: bool = False
) -> tuple[float, GenieParams] | None:
    """Exhaustive minimum over the uniform grid ``k / (n - 1)`` on every axis.

    Grids with ``n - 1`` a power of two are nested, so a finer grid never
    does worse. With ``refine`` a second grid of the same size covers the
    cells around the first minimiser and the better of the two is returned.
    ``None`` when no grid point is feasible.
    """
    if grid_per_axis < 2:
        raise DomainError("grid_per_axis must be >= 2")
    alloc.check(ch)
    inst = _instance(ch, alloc)
    a_vals, v_vals = _oracle_axes(grid_per_axis)
    value, i, j, k, l = kernels.grid_search(a_vals, v_vals, inst, V_MIN)
    if not np.isfinite(value):
        return None
    x = np.array([a_vals[i], a_vals[j], v_vals[k], v_vals[l]])
    best = (float(value), x)
    if refine:
        h = 1.0 / (grid_per_axis - 1)
        lo = np.clip(x - h, 0.0, 1.0)
        hi = np.clip(x + h, 0.0, 1.0)
        # the kernel takes one a-axis and one v-axis, so refine on a box
        # spanning both coordinates of each pair
        a_fine = np.linspace(min(lo[0], lo[1]), max(hi[0], hi[1]), grid_per_axis)
        v_fine = np.linspace(min(lo[2], lo[3]), max(hi[2], hi[3]), grid_per_axis)
        value2, i, j, k, l = kernels.grid_search(a_fine, v_fine, inst, V_MIN)
        if value2 < best[0]:
            best = (float(value2), np.array([a_fine[i], a_fine[j], v_fine[k], v_fine[l]]))
    value, x = best
    gp = GenieParams(*(float(t) for t in x))
    return genie_objective_f(ch, alloc, gp), gp


def upper_bound_sum_capacity(ch: ChannelParams, cfg: OptimizerConfig | None = None) -> UpperBound:
    """Maximum over ``P1 = P2`` in ``[0, P]`` of the inner minimum.

    A uniform grid of ``outer_grid_points`` private powers, plus the private
    power that maximises the lower bound, then golden-section refinement
    between the neighbours of the best grid point. The bound is ``+inf``
    when any admissible ``P1`` has an empty useful-genie set; the set only
    shrinks as ``P1`` grows, so ``P1 = P`` is checked first. Among values
    within ``value_tol`` of the maximum the smallest ``P1`` is reported.
    """
    cfg = cfg or OptimizerConfig()
    P = ch.P
    top = inner_min_g(ch, PowerAllocation.symmetric(ch, 0.0), cfg, stream=cfg.outer_grid_points - 1)
    if top is None:
        return UpperBound(math.inf, None, None)
    if P == 0.0:
        # every genie gives exactly 0 here; the float evaluation may be off by an ulp
        return UpperBound(0.0, 0.0, top)

    n = cfg.outer_grid_points
    grid = [P * i / (n - 1) for i in range(n)] if n > 1 else [P]
    grid[-1] = P
    _, p0_star = max_lower_bound(ch)
    powers = grid[:-1] + [P - p0_star]
    allocs = [PowerAllocation(P - p1, p1, p1) for p1 in powers]
    certs = _solve_batch(ch, allocs, list(range(n - 1)) + [n], cfg)
    extra = certs.pop()
    powers.pop()
    certs.append(top)
    if any(cert is None for cert in certs) or extra is None:
        return UpperBound(math.inf, None, None)

    values = [cert.value_bits for cert in certs]
    gi = max(range(n), key=lambda i: (values[i], -i))
    lo = grid[max(gi - 1, 0)]
    hi = grid[min(gi + 1, n - 1)]
    candidates = list(zip(grid, certs)) + [(P - p0_star, extra)]
    refined = _golden_refine(ch, lo, hi, cfg, stream0=n + 1)
    if refined is not None and refined[1].value_bits > values[gi] + cfg.value_tol:
        candidates.append(refined)

    top_value = max(cert.value_bits for _, cert in candidates)
    candidates.sort(key=lambda t: t[0])
    p1, cert = next(t for t in candidates if t[1].value_bits >= top_value - cfg.value_tol)
    return UpperBound(top_value, p1, cert)


def _golden_refine(ch, lo, hi, cfg, stream0, iters=40):
    if hi <= lo:
        return None
    stream = [stream0]

    def g(p1):
        cert = _solve_batch(ch, [PowerAllocation(ch.P - p1, p1, p1)], [stream[0]], cfg)[0]
        stream[0] += 1
        return cert

    a, b = lo, hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    c1, c2 = g(x1), g(x2)
    if c1 is None or c2 is None:
        return None
    best = max(((x1, c1), (x2, c2)), key=lambda t: t[1].value_bits)
    for _ in range(iters):
        if b - a <= 1e-10 * max(1.0, b):
            break
        if c1.value_bits >= c2.value_bits:
            b, x2, c2 = x2, x1, c1
            x1 = b - _INVPHI * (b - a)
            c1 = g(x1)
            new = (x1, c1)
        else:
            a, x1, c1 = x1, x2, c2
            x2 = a + _INVPHI * (b - a)
            c2 = g(x2)
            new = (x2, c2)
        if new[1] is None:
            return None
        if new[1].value_bits > best[1].value_bits:
            best = new
    return best
