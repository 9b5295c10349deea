"""Single-point bound reports combining the lower bound, the genie upper
bound and the regime classification."""
from __future__ import annotations

import math

from .core import BoundReport, ChannelParams, GenieParams, Status, max_lower_bound
from .optimizer import OptimizerConfig, upper_bound_sum_capacity
from .regimes import in_gamma_A, in_gamma_B, smart_genie_solve

MATCH_TOL = 1e-4


def compute_bounds(
    ch: ChannelParams,
    cfg: OptimizerConfig | None = None,
    P0_steps: int = 101,
    tol: float = MATCH_TOL,
) -> BoundReport:
    """Lower and upper sum-rate bounds at ``ch`` with status and certificates.

    ``Matched`` when the gap is at most ``tol`` bits, ``NoCertificate`` when
    the useful-genie set is empty somewhere on the outer range.
    """
    cfg = cfg or OptimizerConfig()
    lower, P0 = max_lower_bound(ch, P0_steps)
    ub = upper_bound_sum_capacity(ch, cfg)
    smart = smart_genie_solve(ch)
    if not ub.certified:
        status = Status.NO_CERTIFICATE
        gap = math.inf
    else:
        gap = ub.upper_bits - lower
        status = Status.MATCHED if gap <= tol else Status.GAP_OPEN
    return BoundReport(
        P=ch.P,
        c=ch.c,
        lower_bits=lower,
        upper_bits=ub.upper_bits,
        gap_bits=gap,
        optimal_P0=P0,
        status=status,
        in_gamma_A=in_gamma_A(ch),
        in_gamma_B=in_gamma_B(ch),
        smart_genie_solvable=smart is not None,
        certificate=ub.certificate.gp if ub.certified else None,
        upper_P1=ub.P1,
        smart_genie=smart,
    )


def smart_certificate(ch: ChannelParams) -> GenieParams | None:
    """Symmetric genie ``(a^2, a^2, b^2, b^2)`` from the smart-genie solution, if any."""
    sol = smart_genie_solve(ch)
    if sol is None:
        return None
    return GenieParams(sol.a_sq, sol.a_sq, sol.b_sq, sol.b_sq)
