"""Closed-form regime tests for the (P, c) plane.

* smart-genie solvability: nonnegative ``a, b`` with ``ab = c(1 + c^2 P)``,
  ``c^2 P <= sqrt((1 - a^2 - b^2)(1 - b^2)) - b^2`` and ``a^2 + b^2 <= 1``;
* ``Gamma_A``: the sufficient conditions obtained with ``a^2 = 1/2``;
* ``Gamma_B``: the region where the superposition sum rate decreases in the
  common power, so that sending no common message is optimal.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import LN2, ChannelParams
from .errors import DomainError

SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class SmartGenieSolution:
    a_sq: float
    b_sq: float

    @property
    def a(self) -> float:
        return math.sqrt(self.a_sq)

    @property
    def b(self) -> float:
        return math.sqrt(self.b_sq)


@dataclass(frozen=True)
class DerivativeAnatomy:
    p1: float
    p2: float
    p3: float
    z1: float


def smart_genie_residuals(ch: ChannelParams, a_sq: float, b_sq: float) -> tuple[float, float, float]:
    """Residuals of the three smart-genie conditions.

    Returns ``(|ab - c(1 + c^2 P)|, slack of the useful-genie inequality,
    1 - a^2 - b^2)``; a solution has a zero first entry and nonnegative others.
    """
    m = ch.c * (1.0 + ch.c * ch.c * ch.P)
    eq1 = abs(math.sqrt(a_sq * b_sq) - m)
    prod = max(1.0 - a_sq - b_sq, 0.0) * max(1.0 - b_sq, 0.0)
    eq2 = math.sqrt(prod) - b_sq - ch.c * ch.c * ch.P
    eq3 = 1.0 - a_sq - b_sq
    return eq1, eq2, eq3


def _is_solution(ch, a_sq, b_sq, tol=1e-12):
    eq1, eq2, eq3 = smart_genie_residuals(ch, a_sq, b_sq)
    return eq1 <= tol * max(1.0, ch.c) and eq2 >= -tol and eq3 >= -tol


def smart_genie_solve(ch: ChannelParams) -> SmartGenieSolution | None:
    """Find ``(a^2, b^2)`` meeting the smart-genie conditions, or ``None``.

    The fixed choice ``a^2 = 1/2, b^2 = 2 m^2`` with ``m = c(1 + c^2 P)`` is
    returned whenever it works. Otherwise, with ``x = a^2``, ``b^2 = m^2 / x``
    and ``t = c^2 P``, the last two conditions reduce to the concave quadratic
    ``q(x) = -x^2 + (1 - t^2 + m^2) x - 2 m^2 (1 + t) >= 0`` and the maximizer
    of ``q`` is returned.
    """
    m = ch.c * (1.0 + ch.c * ch.c * ch.P)
    if _is_solution(ch, 0.5, 2.0 * m * m):
        return SmartGenieSolution(0.5, 2.0 * m * m)
    t = ch.c * ch.c * ch.P
    lin = 1.0 - t * t + m * m
    disc = lin * lin - 8.0 * m * m * (1.0 + t)
    if disc < 0.0 or m == 0.0:
        return None
    x = min(max(0.5 * lin, 1e-300), 1.0)
    candidate = SmartGenieSolution(x, m * m / x)
    if _is_solution(ch, candidate.a_sq, candidate.b_sq):
        return candidate
    return None


def smart_genie_scan(ch: ChannelParams, points: int = 10_000) -> SmartGenieSolution | None:
    """Grid scan of ``a^2`` over (0, 1) for a smart-genie solution.

    Independent of the quadratic reduction in :func:`smart_genie_solve`; the
    best grid point by useful-genie slack is polished by golden-section search.
    """
    m = ch.c * (1.0 + ch.c * ch.c * ch.P)
    t = ch.c * ch.c * ch.P
    x = (np.arange(points) + 0.5) / points
    b_sq = m * m / x
    prod = np.clip(1.0 - x - b_sq, 0.0, None) * np.clip(1.0 - b_sq, 0.0, None)
    slack = np.where(x + b_sq <= 1.0, np.sqrt(prod) - b_sq - t, -np.inf)
    i = int(np.argmax(slack))
    if not np.isfinite(slack[i]):
        return None

    def score(xs):
        bs = m * m / xs
        if xs + bs > 1.0:
            return -math.inf
        return math.sqrt((1.0 - xs - bs) * (1.0 - bs)) - bs - t

    lo = x[max(i - 1, 0)]
    hi = x[min(i + 1, points - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    for _ in range(100):
        x1 = b - invphi * (b - a)
        x2 = a + invphi * (b - a)
        if score(x1) >= score(x2):
            b = x2
        else:
            a = x1
    xs = 0.5 * (a + b)
    if score(xs) < score(x[i]):
        xs = float(x[i])
    if score(xs) < 0.0:
        return None
    return SmartGenieSolution(float(xs), m * m / float(xs))


def gamma_A_lhs(P, c):
    """Left-hand sides of the two ``Gamma_A`` inequalities (both compared to 1/2)."""
    m = c * (1.0 + c * c * P)
    eq4 = c ** 4 * P * P + (4.0 * c * c * P + 3.0) * m * m
    return eq4, m


def gamma_B_lhs(P, c):
    """Left-hand side of the ``Gamma_B`` inequality (compared to 0)."""
    return (c ** 4 + 2.0 * c ** 3 + c * c) * P + c * c + 2.0 * c - 1.0


def in_gamma_A(ch: ChannelParams) -> bool:
    eq4, eq5 = gamma_A_lhs(ch.P, ch.c)
    return bool(eq4 <= 0.5 and eq5 <= 0.5)


def in_gamma_B(ch: ChannelParams) -> bool:
    return bool(gamma_B_lhs(ch.P, ch.c) <= 0.0)


def gamma_B_boundary_P(c: float) -> float | None:
    """Power at which ``(c, P)`` leaves ``Gamma_B``; ``None`` if there is none.

    ``c = 0`` has no boundary (every ``P`` belongs to ``Gamma_B``), and for
    ``c > sqrt(2) - 1`` no ``P >= 0`` does.
    """
    if c < 0.0:
        raise DomainError(f"c must be >= 0, got {c}")
    if c == 0.0:
        return None
    if c > SQRT2_MINUS_1:
        return None
    num = 1.0 - 2.0 * c - c * c
    return max(num / (c ** 4 + 2.0 * c ** 3 + c * c), 0.0)


def polynomial_identity_sides(c):
    """Both sides of ``c^6 + 6c^5 - c^4 - 28c^3 + 31c^2 - 10c + 1 = (c-1)^2 (c^2+4c-1)^2``."""
    left = c ** 6 + 6 * c ** 5 - c ** 4 - 28 * c ** 3 + 31 * c ** 2 - 10 * c + 1
    right = (c - 1) ** 2 * (c * c + 4 * c - 1) ** 2
    return left, right


def _helper_symbols(P, c):
    inv = 1.0 / c
    a = P + inv * inv
    b = P + (1.0 + P) * inv * inv
    d = 2.0 * inv
    e = 1.0 + inv * inv
    return a, b, d, e


def derivative_numerator(ch: ChannelParams, P0):
    """Numerator of ``dR/dP0`` over the positive denominator; linear in ``P0``."""
    a, b, d, e = _helper_symbols(ch.P, ch.c)
    return (b * d - 2.0 * a * e * d - b * e) * P0 + a * b * d + 2.0 * b * b - a * b * e


def zero_location(P: float, c: float) -> float:
    """Root of the derivative numerator in factored form.

    ``z1 = (P c^2 + P + 1) * L(P, c) / (c * D(P, c))`` where ``L`` is the
    ``Gamma_B`` left-hand side and ``D > 0``, so ``z1 <= 0`` exactly on
    ``Gamma_B``.
    """
    den = c * (P * c ** 5 + 2 * P * c ** 4 + 2 * P * c ** 3 + 2 * P * c * c + P * c
               + c ** 3 + 2 * c * c + c + 4.0)
    return (P * c * c + P + 1.0) * gamma_B_lhs(P, c) / den


def sum_rate_derivative(ch: ChannelParams, P0: float) -> tuple[float, DerivativeAnatomy]:
    """``dR/dP0`` in bits per unit power, with pole and zero locations.

    ``R(P0)`` is :func:`~icbounds.core.lower_bound_sum_rate`. Requires ``c > 0``.
    """
    if ch.c <= 0.0:
        raise DomainError("the derivative anatomy needs c > 0")
    if not 0.0 <= P0 <= ch.P:
        raise DomainError(f"P0={P0} outside [0, P={ch.P}]")
    a, b, d, e = _helper_symbols(ch.P, ch.c)
    num = (b * d - 2.0 * a * e * d - b * e) * P0 + a * b * d + 2.0 * b * b - a * b * e
    den = (d * P0 + b) * (P0 - a) * (e * P0 - b)
    value = 0.5 * num / den / LN2

    z1 = zero_location(ch.P, ch.c)
    z1_direct = -(a * b * d + 2.0 * b * b - a * b * e) / (b * d - 2.0 * a * e * d - b * e)
    if abs(z1 - z1_direct) > 1e-6 * max(abs(z1), abs(z1_direct), 1e-300) + 1e-12:
        warnings.warn(
            f"zero location disagrees between routes: {z1!r} vs {z1_direct!r} (P={ch.P}, c={ch.c})",
            RuntimeWarning,
            stacklevel=2,
        )
    anatomy = DerivativeAnatomy(p1=-b / d, p2=a, p3=b / e, z1=z1)
    return value, anatomy


@dataclass
class InclusionReport:
    samples: int
    draws: int
    violations: int
    max_gamma_B_lhs: float


def _rejection_cap(c):
    # No point with c(1 + c^2 P) > 1/2 or c^4 P^2 > 1/2 lies in Gamma_A.
    with np.errstate(divide="ignore"):
        cap5 = (0.5 / c - 1.0) / (c * c)
        cap4 = math.sqrt(0.5) / (c * c)
    return np.minimum(cap5, cap4)


def sample_gamma_A(samples: int, seed: int, c_max: float = 0.5, batch: int = 65_536):
    """Rejection-sample ``samples`` points of ``Gamma_A``.

    ``c`` is uniform on ``(0, c_max]`` and ``P`` uniform on ``[0, Pmax(c)]``;
    batch ``k`` draws from a Philox stream keyed by ``(seed, k)``.
    Returns ``(P, c, draws)``.
    """
    Ps, cs = [], []
    got = draws = 0
    k = 0
    while got < samples:
        rng = np.random.Generator(np.random.Philox(key=[seed, k]))
        k += 1
        c = c_max * (1.0 - rng.random(batch))
        P = rng.random(batch) * _rejection_cap(c)
        eq4, eq5 = gamma_A_lhs(P, c)
        keep = (eq4 <= 0.5) & (eq5 <= 0.5)
        draws += batch
        Ps.append(P[keep])
        cs.append(c[keep])
        got += int(keep.sum())
    return np.concatenate(Ps)[:samples], np.concatenate(cs)[:samples], draws


def verify_region_inclusion(samples: int = 10_000, seed: int = 0) -> InclusionReport:
    """Check ``Gamma_A`` points against the ``Gamma_B`` inequality."""
    if samples < 1:
        raise DomainError("samples must be >= 1")
    P, c, draws = sample_gamma_A(samples, seed)
    lhs = gamma_B_lhs(P, c)
    return InclusionReport(
        samples=samples,
        draws=draws,
        violations=int(np.count_nonzero(lhs > 0.0)),
        max_gamma_B_lhs=float(lhs.max()),
    )
