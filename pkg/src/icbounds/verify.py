"""Property suites cross-checking independent routes to the same numbers.

Each check returns a :class:`Check` with the number of cases, the largest
residual seen and a verdict. Suites are deterministic given ``seed``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    ChannelParams,
    GenieParams,
    PowerAllocation,
    genie_objective_f,
    lower_bound_sum_rate,
    max_lower_bound,
)
from .fme import (
    MAC_VARIABLES,
    LinearSystem,
    mac_rows_from_values,
    mac_system_from_channel,
    max_sum_rate,
    vertex_enumeration_max,
)
from .errors import InfeasibleError, UnboundedError
from .gaussian import build_model, gaussian_cmi, genie_gap, markov_check, outer_bound_mi_sum
from .optimizer import OptimizerConfig, brute_force_oracle, inner_min_g, upper_bound_sum_capacity
from .regimes import (
    SQRT2_MINUS_1,
    gamma_B_boundary_P,
    in_gamma_A,
    polynomial_identity_sides,
    sample_gamma_A,
    smart_genie_solve,
    sum_rate_derivative,
    verify_region_inclusion,
)


@dataclass
class Check:
    name: str
    count: int
    max_residual: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{verdict}  {self.name:<28} n={self.count:<6} max_residual={self.max_residual:.3e}{extra}"


def _rng(seed, stream):
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def _rel(x, y):
    scale = max(abs(x), abs(y))
    return abs(x - y) / scale if scale > 0 else 0.0


def random_genie_case(rng, symmetric=False):
    """Random channel, allocation and genie with every log argument positive."""
    P = rng.uniform(0.1, 50.0)
    c = rng.uniform(0.0, 2.0)
    ch = ChannelParams(P, c)
    P1 = rng.uniform(0.0, P)
    P2 = P1 if symmetric else rng.uniform(0.0, P)
    alloc = PowerAllocation.private(ch, P1, P2)
    a1_sq, a2_sq = rng.uniform(0.0, 0.95, 2)
    v1, v2 = rng.uniform(0.01, 1.0, 2)
    return ch, alloc, GenieParams(a1_sq, a2_sq, v1, v2)


def smart_genie_case(ch):
    sol = smart_genie_solve(ch)
    gp = GenieParams(sol.a_sq, sol.a_sq, sol.b_sq, sol.b_sq)
    return PowerAllocation.symmetric(ch, 0.0), gp


# ----- identities


def check_f_identity(samples=1000, seed=0, rtol=1e-9) -> Check:
    rng = _rng(seed, 1)
    worst = 0.0
    for _ in range(samples):
        ch, alloc, gp = random_genie_case(rng)
        closed = genie_objective_f(ch, alloc, gp)
        worst = max(worst, _rel(closed, outer_bound_mi_sum(build_model(ch, alloc, gp))))
    return Check("f-identity", samples, worst, worst <= rtol)


def check_gap_identity(samples=1000, seed=0, rtol=1e-9) -> Check:
    rng = _rng(seed, 2)
    worst = 0.0
    negative = 0.0
    for _ in range(samples):
        ch, alloc, gp = random_genie_case(rng, symmetric=True)
        gap = genie_gap(build_model(ch, alloc, gp))
        negative = min(negative, gap)
        lower = lower_bound_sum_rate(ch, alloc.P0)
        worst = max(worst, _rel(genie_objective_f(ch, alloc, gp), lower + gap))
    return Check("gap-identity", samples, worst, worst <= rtol and negative >= -1e-12,
                 f"min_gap={negative:.1e}")


def check_smart_gap(samples=200, seed=0, atol=1e-10) -> Check:
    P, c, _ = sample_gamma_A(samples, seed)
    worst = 0.0
    for Pi, ci in zip(P, c):
        ch = ChannelParams(float(Pi), float(ci))
        alloc, gp = smart_genie_case(ch)
        worst = max(worst, abs(genie_gap(build_model(ch, alloc, gp))))
    return Check("smart-genie-gap", samples, worst, worst <= atol)


def check_markov_consistency(samples=200, seed=0) -> Check:
    """Markov chain at smart-genie points implies a vanishing conditional information."""
    P, c, _ = sample_gamma_A(samples, seed + 1)
    worst = 0.0
    ok = True
    for Pi, ci in zip(P, c):
        ch = ChannelParams(float(Pi), float(ci))
        alloc, gp = smart_genie_case(ch)
        model = build_model(ch, alloc, gp)
        for k in (1, 2):
            holds, _ = markov_check(model, [f"Xt{k}G"], [f"Yt{k}G"], [f"Ut{k}G"])
            cmi = gaussian_cmi(model, [f"Xt{k}G"], [f"Ut{k}G"], [f"Yt{k}G"])
            ok &= holds and cmi <= 1e-10
            worst = max(worst, abs(cmi))
    return Check("markov-consistency", samples, worst, ok)


# ----- regions


def check_region_inclusion(samples=10_000, seed=0) -> Check:
    rep = verify_region_inclusion(samples, seed)
    return Check("region-inclusion", samples, max(rep.max_gamma_B_lhs, 0.0), rep.violations == 0,
                 f"violations={rep.violations} draws={rep.draws}")


def check_polynomial_identity(samples=100, seed=0, rtol=1e-9) -> Check:
    c = _rng(seed, 3).uniform(0.0, 3.0, samples)
    worst = max(_rel(*polynomial_identity_sides(float(ci))) for ci in c)
    return Check("polynomial-identity", samples, worst, worst <= rtol)


def check_smart_genie_in_gamma_A(samples=2000, seed=0) -> Check:
    P, c, _ = sample_gamma_A(samples, seed + 2)
    missing = sum(smart_genie_solve(ChannelParams(float(p), float(q))) is None for p, q in zip(P, c))
    return Check("smart-genie-exists", samples, float(missing), missing == 0)


def random_gamma_B_channel(rng, P_cap=500.0):
    c = rng.uniform(1e-3, SQRT2_MINUS_1)
    P_B = gamma_B_boundary_P(c)
    return ChannelParams(rng.uniform(0.0, min(P_B, P_cap)), c)


def check_monotonicity(channels=50, grid=1000, seed=0, step_tol=1e-12) -> Check:
    rng = _rng(seed, 4)
    worst = -math.inf
    for _ in range(channels):
        ch = random_gamma_B_channel(rng)
        p0 = np.linspace(0.0, ch.P, grid)
        R = np.array([lower_bound_sum_rate(ch, float(x)) for x in p0])
        steps = np.diff(R)
        deriv = max(sum_rate_derivative(ch, float(x))[0] for x in p0)
        worst = max(worst, float(steps.max(initial=-math.inf)), deriv)
    return Check("monotonicity", channels, worst, worst <= step_tol)


# ----- optimizer


def in_regime_points(count=20, seed=0, P_range=(0.5, 50.0)):
    """Deterministic ``Gamma_A`` points with ``P`` spread log-uniformly over ``P_range``."""
    rng = _rng(seed, 5)
    out = []
    lo, hi = np.log(P_range[0]), np.log(P_range[1])
    for i in range(count):
        P = float(np.exp(lo + (hi - lo) * i / max(count - 1, 1)))
        while True:
            c = float(rng.uniform(0.0, 0.5))
            ch = ChannelParams(P, c)
            if in_gamma_A(ch):
                out.append(ch)
                break
    return out


def check_oracle_agreement(channels, cfg=None, grid=65, atol=5e-3) -> Check:
    cfg = cfg or OptimizerConfig()
    worst = 0.0
    ok = True
    for ch in channels:
        alloc = PowerAllocation.symmetric(ch, 0.0)
        cert = inner_min_g(ch, alloc, cfg)
        oracle = brute_force_oracle(ch, alloc, grid)
        if cert is None or oracle is None:
            ok = False
            continue
        worst = max(worst, abs(cert.value_bits - oracle[0]))
        ok &= cert.feasible and min(cert.gp.v1, cert.gp.v2) >= 1e-6
    return Check("oracle-agreement", len(channels), worst, ok and worst <= atol)


def random_channel(rng):
    return ChannelParams(rng.uniform(0.0, 50.0), rng.uniform(0.0, 1.0))


def check_ordering(samples=500, seed=0, cfg=None, atol=1e-9) -> Check:
    """Upper bound never below the lower bound, over ``samples`` points with a finite upper bound."""
    cfg = cfg or OptimizerConfig(outer_grid_points=17, inner_multistarts=8)
    rng = _rng(seed, 6)
    worst = -math.inf
    done = tried = 0
    while done < samples:
        ch = random_channel(rng)
        tried += 1
        ub = upper_bound_sum_capacity(ch, cfg)
        if not ub.certified:
            continue
        lower, _ = max_lower_bound(ch)
        worst = max(worst, lower - ub.upper_bits)
        done += 1
    return Check("upper>=lower", samples, max(worst, 0.0), worst <= atol, f"tried={tried}")


# ----- fme


def _six_tuple(rng, den=12):
    vals = [Fraction(int(rng.integers(0, 8 * den)), den) for _ in range(6)]
    a, b, c, d, e, f = vals
    # impose a + b >= c and d + e >= f by clipping c, f
    c = min(c, a + b)
    f = min(f, d + e)
    return a, b, c, d, e, f


def check_fme_closed_form(samples=10_000, seed=0) -> Check:
    rng = _rng(seed, 7)
    bad = 0
    for _ in range(samples):
        a, b, c, d, e, f = _six_tuple(rng)
        got = max_sum_rate(mac_rows_from_values(a, b, c, d, e, f), MAC_VARIABLES)
        bad += got != min(a + b + e, b + d + e, c + e, b + f)
    return Check("fme-closed-form", samples, float(bad), bad == 0, f"mismatches={bad}")


def random_system(rng):
    n = int(rng.integers(2, 5))
    m = int(rng.integers(n + 1, 8))
    names = tuple(f"x{i}" for i in range(n))
    rows = []
    for _ in range(m):
        coeffs = [Fraction(int(rng.integers(-8, 9)), int(rng.integers(1, 3))) for _ in range(n)]
        rows.append((coeffs, Fraction(int(rng.integers(-6, 13)), int(rng.integers(1, 4)))))
    k = int(rng.integers(1, n + 1))
    objective = names[:k]
    return LinearSystem(names, tuple((tuple(c), b) for c, b in rows)), objective


def _outcome(fn, sys, objective):
    try:
        return fn(sys, objective)
    except UnboundedError:
        return "unbounded"
    except InfeasibleError:
        return "infeasible"


def check_fme_oracle(systems=200, seed=0) -> Check:
    """Agreement with vertex enumeration on ``systems`` random bounded feasible systems."""
    rng = _rng(seed, 8)
    agree = bounded = other = 0
    mismatch = 0
    while bounded < systems:
        sys, objective = random_system(rng)
        want = _outcome(vertex_enumeration_max, sys, objective)
        got = _outcome(max_sum_rate, sys, objective)
        same = want == got
        if isinstance(want, Fraction):
            bounded += 1
            agree += same
        else:
            other += 1
        mismatch += not same
    return Check("fme-vs-vertices", bounded, float(mismatch), mismatch == 0,
                 f"agree={agree}/{bounded} other_systems={other}")


def random_mac_case(rng):
    P = rng.uniform(0.0, 50.0)
    ch = ChannelParams(P, rng.uniform(0.0, 2.0))
    return ch, PowerAllocation.symmetric(ch, rng.uniform(0.0, P))


def check_mac_route(samples=100, seed=0, atol=1e-9) -> Check:
    rng = _rng(seed, 9)
    worst = 0.0
    for _ in range(samples):
        ch, alloc = random_mac_case(rng)
        via_fme = float(max_sum_rate(mac_system_from_channel(ch, alloc), MAC_VARIABLES))
        worst = max(worst, abs(via_fme - lower_bound_sum_rate(ch, alloc.P0)))
    return Check("mac-route", samples, worst, worst <= atol)


def suite_identities(seed=0):
    return [check_f_identity(seed=seed), check_gap_identity(seed=seed),
            check_smart_gap(seed=seed), check_markov_consistency(seed=seed)]


def suite_regions(seed=0):
    return [check_region_inclusion(seed=seed), check_polynomial_identity(seed=seed),
            check_smart_genie_in_gamma_A(seed=seed), check_monotonicity(seed=seed)]


def suite_optimizer(seed=0):
    return [check_oracle_agreement(in_regime_points(5, seed)), check_ordering(50, seed)]


def suite_fme(seed=0):
    return [check_fme_closed_form(2000, seed), check_fme_oracle(200, seed), check_mac_route(100, seed)]


SUITES = {
    "identities": suite_identities,
    "regions": suite_regions,
    "optimizer": suite_optimizer,
    "fme": suite_fme,
}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    if name == "all":
        return [check for suite in SUITES.values() for check in suite(seed)]
    return SUITES[name](seed)
