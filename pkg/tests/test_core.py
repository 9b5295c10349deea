import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icbounds.core import (
    ChannelParams,
    GenieParams,
    PowerAllocation,
    genie_objective_f,
    lower_bound_sum_rate,
    mac_sum_rate_closed_form,
    max_genie_variance,
    max_lower_bound,
    useful_genie_feasible,
)
from icbounds.errors import DomainError, GenieEvaluationError

# reference values from a 40-digit mpmath evaluation of the unexpanded formulas
LOWER_10_01 = 3.334984247712808707
F_SMART_10_01 = LOWER_10_01
F_V003_10_01 = 3.340580646907314745
SLACK_SMART = 0.6571850893584332


def test_lower_bound_no_interference():
    ch = ChannelParams(10.0, 0.0)
    assert lower_bound_sum_rate(ch, 0.0) == pytest.approx(math.log2(11.0), rel=1e-15)
    assert lower_bound_sum_rate(ch, 10.0) == pytest.approx(0.5 * math.log2(11.0), rel=1e-15)


def test_lower_bound_reference():
    assert lower_bound_sum_rate(ChannelParams(10.0, 0.1), 0.0) == pytest.approx(LOWER_10_01, rel=1e-14)


def test_lower_bound_domain():
    ch = ChannelParams(10.0, 0.1)
    with pytest.raises(DomainError):
        lower_bound_sum_rate(ch, -0.1)
    with pytest.raises(DomainError):
        lower_bound_sum_rate(ch, 10.5)


@pytest.mark.parametrize("P, c", [(-1.0, 0.1), (1.0, -0.1), (math.inf, 0.1), (math.nan, 0.1)])
def test_channel_invariants(P, c):
    with pytest.raises(DomainError):
        ChannelParams(P, c)


def test_allocation_checks():
    ch = ChannelParams(4.0, 0.2)
    alloc = PowerAllocation.symmetric(ch, 1.0)
    assert (alloc.P0, alloc.P1, alloc.P2) == (1.0, 3.0, 3.0)
    assert PowerAllocation.private(ch, 3.0, 1.0) == PowerAllocation(1.0, 3.0, 1.0)
    with pytest.raises(DomainError):
        PowerAllocation(3.0, 3.0, 3.0).check(ch)
    with pytest.raises(DomainError):
        PowerAllocation.private(ch, 5.0, 1.0)


def test_genie_params_invariants():
    with pytest.raises(DomainError):
        GenieParams(1.1, 0.0, 0.1, 0.1)
    with pytest.raises(DomainError):
        GenieParams(0.1, 0.0, -0.1, 0.1)
    assert GenieParams(0.25, 0.0, 0.1, 0.1).a1 == 0.5


def test_f_smart_genie_reference():
    ch = ChannelParams(10.0, 0.1)
    alloc = PowerAllocation.symmetric(ch, 0.0)
    f_smart = genie_objective_f(ch, alloc, GenieParams(0.5, 0.5, 0.0242, 0.0242))
    f_off = genie_objective_f(ch, alloc, GenieParams(0.5, 0.5, 0.03, 0.03))
    assert f_smart == pytest.approx(F_SMART_10_01, rel=1e-14)
    assert f_off == pytest.approx(F_V003_10_01, rel=1e-14)
    assert f_off > f_smart


def test_f_zero_variance_is_an_error():
    ch = ChannelParams(10.0, 0.1)
    with pytest.raises(GenieEvaluationError) as err:
        genie_objective_f(ch, PowerAllocation.symmetric(ch, 0.0), GenieParams(0.5, 0.5, 0.0, 0.1))
    assert err.value.term == "genie term 1"


def test_f_nonpositive_denominator_names_term():
    ch = ChannelParams(1.0, 0.0)
    with pytest.raises(GenieEvaluationError) as err:
        genie_objective_f(ch, PowerAllocation.symmetric(ch, 0.0), GenieParams(0.5, 1.0, 0.1, 0.1))
    assert err.value.term == "genie term 1"


@st.composite
def genie_cases(draw):
    P = draw(st.floats(0.01, 100.0))
    c = draw(st.floats(0.0, 3.0))
    ch = ChannelParams(P, c)
    P1 = draw(st.floats(0.0, 1.0)) * P
    P2 = draw(st.floats(0.0, 1.0)) * P
    gp = GenieParams(draw(st.floats(0.0, 0.95)), draw(st.floats(0.0, 0.95)),
                     draw(st.floats(0.01, 1.0)), draw(st.floats(0.01, 1.0)))
    return ch, PowerAllocation.private(ch, P1, P2), gp


@settings(max_examples=300, deadline=None)
@given(genie_cases())
def test_f_swap_symmetry(case):
    ch, alloc, gp = case
    swapped = genie_objective_f(ch, PowerAllocation(alloc.P0, alloc.P2, alloc.P1),
                                GenieParams(gp.a2_sq, gp.a1_sq, gp.v2, gp.v1))
    assert swapped == pytest.approx(genie_objective_f(ch, alloc, gp), rel=1e-12)


def test_f_swap_symmetry_1000_draws():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        P = rng.uniform(0.01, 100.0)
        ch = ChannelParams(P, rng.uniform(0.0, 3.0))
        P1, P2 = rng.uniform(0.0, P, 2)
        a1, a2 = rng.uniform(0.0, 0.95, 2)
        v1, v2 = rng.uniform(0.01, 1.0, 2)
        f = genie_objective_f(ch, PowerAllocation.private(ch, P1, P2), GenieParams(a1, a2, v1, v2))
        g = genie_objective_f(ch, PowerAllocation.private(ch, P2, P1), GenieParams(a2, a1, v2, v1))
        worst = max(worst, abs(f - g) / abs(f))
    assert worst <= 1e-12


def test_feasible_examples():
    ch = ChannelParams(10.0, 0.1)
    alloc = PowerAllocation.symmetric(ch, 0.0)
    assert useful_genie_feasible(ch, alloc, GenieParams(0.5, 0.5, 0.0242, 0.0242))
    assert not useful_genie_feasible(ch, alloc, GenieParams(0.5, 0.5, 0.6, 0.0242))
    ch0 = ChannelParams(3.0, 0.0)
    assert useful_genie_feasible(ch0, PowerAllocation.symmetric(ch0, 1.0), GenieParams(0.0, 0.0, 0.3, 0.3))


def test_feasible_slack_reference():
    v = 0.0242
    assert math.sqrt((1 - 0.5 - v) * (1 - v)) - v == pytest.approx(SLACK_SMART, rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 2.0), st.floats(0.0, 1.0))
def test_feasible_monotone_in_load(a_sq, v, c, shrink):
    ch = ChannelParams(10.0, c)
    gp = GenieParams(a_sq, a_sq, v, v)
    alloc = PowerAllocation.symmetric(ch, 0.0)
    if useful_genie_feasible(ch, alloc, gp):
        P1 = 10.0 * shrink
        assert useful_genie_feasible(ch, PowerAllocation.symmetric(ch, 10.0 - P1), gp)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 2.0), st.floats(0.0, 1.0))
def test_max_genie_variance_is_the_boundary(a_sq, load, frac):
    vmax = max_genie_variance(a_sq, load)
    c = 1.0
    ch = ChannelParams(load, c)
    alloc = PowerAllocation.symmetric(ch, 0.0)
    if vmax < 0:
        assert not useful_genie_feasible(ch, alloc, GenieParams(a_sq, a_sq, frac, frac))
        return
    inside = GenieParams(a_sq, a_sq, vmax * frac, vmax * frac)
    assert useful_genie_feasible(ch, alloc, inside, tol=1e-12)
    above = vmax * (1 + 1e-6) + 1e-9
    if above <= 1.0:
        assert not useful_genie_feasible(ch, alloc, GenieParams(a_sq, a_sq, above, above))


def test_mac_closed_form_reference():
    ch = ChannelParams(10.0, 0.1)
    mac = mac_sum_rate_closed_form(ch, PowerAllocation.symmetric(ch, 0.0))
    assert mac.a == 0.0 and mac.d == 0.0
    assert mac.sum_rate == pytest.approx(LOWER_10_01, rel=1e-14)
    ch0 = ChannelParams(10.0, 0.0)
    assert mac_sum_rate_closed_form(ch0, PowerAllocation.symmetric(ch0, 0.0)).sum_rate == pytest.approx(math.log2(11))


def test_mac_symmetric_min_is_b_plus_f():
    ch = ChannelParams(7.0, 0.4)
    mac = mac_sum_rate_closed_form(ch, PowerAllocation.symmetric(ch, 3.0))
    assert mac.a == mac.d and mac.b == mac.e and mac.c == mac.f
    assert mac.a + mac.b >= mac.c
    assert mac.sum_rate == pytest.approx(mac.b + mac.f, rel=1e-15)
    assert mac.sum_rate == pytest.approx(mac.c + mac.e, rel=1e-15)


def test_mac_rejects_asymmetric():
    ch = ChannelParams(7.0, 0.4)
    with pytest.raises(DomainError):
        mac_sum_rate_closed_form(ch, PowerAllocation(1.0, 6.0, 5.0))


def test_mac_equals_lower_bound_1000_draws():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        P = rng.uniform(0.0, 100.0)
        ch = ChannelParams(P, rng.uniform(0.0, 3.0))
        P0 = rng.uniform(0.0, P)
        lo = lower_bound_sum_rate(ch, P0)
        mac = mac_sum_rate_closed_form(ch, PowerAllocation.symmetric(ch, P0)).sum_rate
        worst = max(worst, abs(lo - mac) / max(lo, 1e-300))
    assert worst <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 100.0), st.floats(0.0, 3.0), st.floats(0.0, 1.0))
def test_lower_bound_nonnegative_and_continuous(P, c, frac):
    ch = ChannelParams(P, c)
    P0 = frac * P
    r = lower_bound_sum_rate(ch, P0)
    assert r >= 0.0
    h = 1e-9 * max(P, 1.0)
    if P0 + h <= P:
        assert abs(lower_bound_sum_rate(ch, P0 + h) - r) < 1e-6


def test_max_lower_bound_out_of_regime():
    # interior optimum, checked against a 20001-point evaluation at 40 digits
    rate, P0 = max_lower_bound(ChannelParams(5.0, 0.3))
    assert rate == pytest.approx(2.178047259272744, abs=1e-10)
    assert 0.0 < P0 < 5.0


def test_max_lower_bound_degenerate():
    assert max_lower_bound(ChannelParams(0.0, 0.3)) == (0.0, 0.0)
    assert max_lower_bound(ChannelParams(10.0, 0.1)) == (lower_bound_sum_rate(ChannelParams(10.0, 0.1), 0.0), 0.0)
