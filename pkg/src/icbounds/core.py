"""Channel parameters and the direct evaluators of the two sum-rate bounds.

All rates are in bits per channel use (log base 2).

The channel is

    Y1 = X1 + c X2 + Z1
    Y2 = X2 + c X1 + Z2,    Zk ~ N(0, 1),   E[Xk^2] <= P.

Each transmitter spends power ``P0`` on a shared common codeword and the
remainder ``Pk = P - P0`` on its private codeword.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DomainError, GenieEvaluationError

LN2 = math.log(2.0)

# Lower clamp on the genie noise variances used by every search routine.
V_MIN = 1e-9


def _half_log2_1p(x):
    return 0.5 * math.log1p(x) / LN2


@dataclass(frozen=True)
class ChannelParams:
    P: float
    c: float

    def __post_init__(self):
        if not (self.P >= 0.0 and math.isfinite(self.P)):
            raise DomainError(f"power P must be finite and >= 0, got {self.P}")
        if not (self.c >= 0.0 and math.isfinite(self.c)):
            raise DomainError(f"cross gain c must be finite and >= 0, got {self.c}")


@dataclass(frozen=True)
class PowerAllocation:
    """Common power ``P0`` and private powers ``P1``, ``P2``."""

    P0: float
    P1: float
    P2: float

    def __post_init__(self):
        for name in ("P0", "P1", "P2"):
            value = getattr(self, name)
            if not (value >= 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be finite and >= 0, got {value}")

    @classmethod
    def symmetric(cls, ch: ChannelParams, P0: float) -> "PowerAllocation":
        if not 0.0 <= P0 <= ch.P:
            raise DomainError(f"P0={P0} outside [0, P={ch.P}]")
        return cls(P0, ch.P - P0, ch.P - P0)

    @classmethod
    def private(cls, ch: ChannelParams, P1: float, P2: float) -> "PowerAllocation":
        """Allocation given the two private powers; ``P0`` is what the larger leaves."""
        for name, value in (("P1", P1), ("P2", P2)):
            if not 0.0 <= value <= ch.P:
                raise DomainError(f"{name}={value} outside [0, P={ch.P}]")
        return cls(ch.P - max(P1, P2), P1, P2)

    @property
    def is_symmetric(self) -> bool:
        return self.P1 == self.P2

    def check(self, ch: ChannelParams) -> None:
        limit = ch.P * (1.0 + 1e-12)
        if self.P0 + self.P1 > limit or self.P0 + self.P2 > limit or max(self.P1, self.P2) > ch.P:
            raise DomainError(f"allocation {self} exceeds the power budget P={ch.P}")


@dataclass(frozen=True)
class GenieParams:
    """Squared noise correlations ``a_k^2`` and genie noise variances ``v_k = Var(Zt_k)``."""

    a1_sq: float
    a2_sq: float
    v1: float
    v2: float

    def __post_init__(self):
        for name in ("a1_sq", "a2_sq"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
        for name in ("v1", "v2"):
            value = getattr(self, name)
            if not (value >= 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be finite and >= 0, got {value}")

    @property
    def a1(self) -> float:
        return math.sqrt(self.a1_sq)

    @property
    def a2(self) -> float:
        return math.sqrt(self.a2_sq)

    def as_tuple(self):
        return (self.a1_sq, self.a2_sq, self.v1, self.v2)


class Status(str, enum.Enum):
    MATCHED = "Matched"
    GAP_OPEN = "GapOpen"
    NO_CERTIFICATE = "NoCertificate"

    def __str__(self):
        return self.value


@dataclass
class BoundReport:
    P: float
    c: float
    lower_bits: float
    upper_bits: float
    gap_bits: float
    optimal_P0: float
    status: Status
    in_gamma_A: bool
    in_gamma_B: bool
    smart_genie_solvable: bool
    certificate: GenieParams | None = None
    upper_P1: float | None = None
    smart_genie: object | None = field(default=None, repr=False)


def _check_alloc(ch: ChannelParams, alloc: PowerAllocation) -> None:
    alloc.check(ch)


def lower_bound_sum_rate(ch: ChannelParams, P0: float) -> float:
    """Sum rate of superposition coding with interference treated as noise.

    Both users put ``P0`` on the common message and ``P - P0`` on their
    private message; each receiver decodes the common and its own private
    message.
    """
    if not 0.0 <= P0 <= ch.P:
        raise DomainError(f"P0={P0} outside [0, P={ch.P}]")
    c2 = ch.c * ch.c
    P1 = P2 = ch.P - P0
    first = _half_log2_1p((P1 + (1.0 + ch.c) ** 2 * P0) / (c2 * P2 + 1.0))
    second = _half_log2_1p(P2 / (c2 * P1 + 1.0))
    return first + second


def max_lower_bound(ch: ChannelParams, steps: int = 101) -> tuple[float, float]:
    """Maximize :func:`lower_bound_sum_rate` over ``P0``.

    Grid search followed by golden-section refinement between the
    neighbours of the best grid point. Returns ``(rate, argmax P0)``;
    among equal grid values the smallest ``P0`` wins.
    """
    if steps < 2 or ch.P == 0.0:
        return lower_bound_sum_rate(ch, 0.0), 0.0
    grid = [ch.P * i / (steps - 1) for i in range(steps)]
    grid[-1] = ch.P
    values = [lower_bound_sum_rate(ch, p0) for p0 in grid]
    best = max(range(steps), key=lambda i: (values[i], -i))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, steps - 1)]
    x, fx = _golden_max(lambda p0: lower_bound_sum_rate(ch, p0), lo, hi)
    if fx > values[best]:
        return fx, x
    return values[best], grid[best]


def _golden_max(fn, lo, hi, iters=80):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        if b - a <= 1e-13 * max(1.0, abs(b)):
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fn(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def genie_objective_f(ch: ChannelParams, alloc: PowerAllocation, gp: GenieParams) -> float:
    """Genie-aided outer-bound expression for fixed private powers and genie.

    Sum of three base-2 logarithms scaled by 1/4: the received-power term,
    and one term per genie. The genie terms are evaluated in the expanded
    form ``v(Pk + c^2 Pj + 1 - ak^2) - 2 c ak Pk sqrt(v) + c^2 Pk (1 + c^2 Pj)``
    of ``(Pk + c^2 Pj + 1)(c^2 Pk + v) - (c Pk + ak sqrt(v))^2``, which avoids
    cancelling the ``c^2 Pk^2`` parts.
    """
    _check_alloc(ch, alloc)
    P, c = ch.P, ch.c
    c2 = c * c
    P1, P2 = alloc.P1, alloc.P2
    if gp.v1 <= 0.0:
        raise GenieEvaluationError("genie term 1", "Var(Zt1) must be > 0")
    if gp.v2 <= 0.0:
        raise GenieEvaluationError("genie term 2", "Var(Zt2) must be > 0")

    received = P + c2 * P + 2.0 * c * math.sqrt((P - P1) * (P - P2)) + 1.0
    head = 2.0 * math.log2(received) - math.log2(c2 * P1 + 1.0) - math.log2(c2 * P2 + 1.0)

    terms = []
    for k, (Pk, Pj, ak_sq, v, aj_sq) in enumerate(
        ((P1, P2, gp.a1_sq, gp.v1, gp.a2_sq), (P2, P1, gp.a2_sq, gp.v2, gp.a1_sq)), start=1
    ):
        ak = math.sqrt(ak_sq)
        num = v * (Pk + c2 * Pj + 1.0 - ak_sq) - 2.0 * c * ak * Pk * math.sqrt(v) + c2 * Pk * (1.0 + c2 * Pj)
        den = (c2 * Pk + 1.0 - aj_sq) * v
        if num <= 0.0:
            raise GenieEvaluationError(f"genie term {k}", f"numerator {num!r} is not positive")
        if den <= 0.0:
            raise GenieEvaluationError(f"genie term {k}", f"denominator {den!r} is not positive")
        terms.append(math.log2(num / den))
    return 0.25 * (head + terms[0] + terms[1])


def useful_genie_feasible(ch: ChannelParams, alloc: PowerAllocation, gp: GenieParams, tol: float = 0.0) -> bool:
    """Membership of ``gp`` in the useful-genie set for private powers ``(P1, P2)``.

    ``tol`` relaxes each inequality by an absolute amount.
    """
    c2 = ch.c * ch.c
    pairs = ((gp.v1, gp.a2_sq, alloc.P1), (gp.v2, gp.a1_sq, alloc.P2))
    for v, a_other_sq, Pk in pairs:
        if v < -tol or v > 1.0 - a_other_sq + tol:
            return False
        prod = max(1.0 - a_other_sq - v, 0.0) * max(1.0 - v, 0.0)
        if math.sqrt(prod) - v < c2 * Pk - tol:
            return False
    return True


def max_genie_variance(a_other_sq: float, load: float) -> float:
    """Largest ``v`` meeting the useful-genie pair for given ``a^2`` and ``load = c^2 Pk``.

    The pair ``0 <= v <= 1 - a^2`` and ``sqrt((1 - a^2 - v)(1 - v)) - v >= load``
    collapses to the linear bound ``v <= (1 - a^2 - load^2) / (2 - a^2 + 2 load)``.
    A negative return means the pair has no solution.
    """
    return (1.0 - a_other_sq - load * load) / (2.0 - a_other_sq + 2.0 * load)


@dataclass(frozen=True)
class MacBounds:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    sum_rate: float

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d, self.e, self.f)


def mac_sum_rate_closed_form(ch: ChannelParams, alloc: PowerAllocation) -> MacBounds:
    """Per-receiver Gaussian MAC bounds with the other private signal as noise.

    Receiver 1 gives ``R0 <= a``, ``R1 <= b``, ``R0 + R1 <= c``; receiver 2
    gives ``R0 <= d``, ``R2 <= e``, ``R0 + R2 <= f``. The sum rate is
    ``min(a+b+e, b+d+e, c+e, b+f)``.
    """
    if not alloc.is_symmetric:
        raise DomainError("the MAC closed form needs P1 == P2")
    _check_alloc(ch, alloc)
    gain = (1.0 + ch.c) ** 2
    c2 = ch.c * ch.c
    P0 = ch.P - alloc.P1
    P1 = P2 = alloc.P1
    noise1 = c2 * P2 + 1.0
    noise2 = c2 * P1 + 1.0
    a = _half_log2_1p(gain * P0 / noise1)
    b = _half_log2_1p(P1 / noise1)
    c = _half_log2_1p((P1 + gain * P0) / noise1)
    d = _half_log2_1p(gain * P0 / noise2)
    e = _half_log2_1p(P2 / noise2)
    f = _half_log2_1p((P2 + gain * P0) / noise2)
    total = min(a + b + e, b + d + e, c + e, b + f)
    return MacBounds(a, b, c, d, e, f, total)
