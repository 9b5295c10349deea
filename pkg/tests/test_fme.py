import itertools
from fractions import Fraction

import numpy as np
import pytest

from icbounds.core import ChannelParams, PowerAllocation, mac_sum_rate_closed_form
from icbounds.errors import InfeasibleError, ParseError, RowExplosionError, UnboundedError
from icbounds.fme import (
    MAC_VARIABLES,
    LinearSystem,
    fme_eliminate,
    format_system,
    mac_rows_from_values,
    mac_system_from_channel,
    max_sum_rate,
    parse_system,
    project,
    sum_rate_candidates,
    vertex_enumeration_max,
)

F = Fraction


def test_two_sided_bound_collapses():
    sys = parse_system("x <= 3\n-x <= -1\n")
    res = fme_eliminate(sys, "x")
    assert res.rows.variables == ()
    assert res.rows.rows == (((), F(2)),)
    assert format_system(res.rows) == "0 <= 2\n"


def test_one_sided_bound_disappears():
    res = fme_eliminate(parse_system("x + y <= 1"), "x")
    assert res.rows.rows == ()
    assert res.rows.variables == ("y",)


def test_mac_instance():
    sys = mac_rows_from_values(1, 2, F(5, 2), 1, 2, F(5, 2))
    assert max_sum_rate(sys, MAC_VARIABLES) == F(9, 2)
    assert vertex_enumeration_max(sys, MAC_VARIABLES) == F(9, 2)


def test_unpruned_candidates_contain_the_pairings():
    a, b, c, d, e, f = (F(x) for x in (3, 5, 7, 4, 6, 9))
    cands = set(sum_rate_candidates(mac_rows_from_values(a, b, c, d, e, f), MAC_VARIABLES, prune=False))
    assert {b + f, c + e, a + b + e, b + d + e} <= cands
    assert min(cands) == min(b + f, c + e, min(a, d) + b + e)


def test_parse_format_round_trip():
    text = "# comment\n2*a - 3/4*b + c <= 5\n-a <= -1/2  # trailing\n0 <= 2\nb - b <= 0\n"
    sys = parse_system(text)
    assert sys.variables == ("a", "b", "c")
    assert sys.rows[0] == ((F(2), F(-3, 4), F(1)), F(5))
    assert sys.rows[2] == ((F(0), F(0), F(0)), F(2))
    again = parse_system(format_system(sys))
    assert again == sys
    assert format_system(sys).splitlines()[0] == "2*a - 3/4*b + 1*c <= 5"


@pytest.mark.parametrize(
    "text, line",
    [
        ("x <= 1\ny >= 2\n", 2),
        ("x <= 1\n\n# c\nx y <= 2\n", 4),
        ("x <= 1/0\n", 1),
        ("x + 3 <= 1\n", 1),
        ("x <= 1 <= 2\n", 1),
        ("x <= a\n", 1),
        (" <= 1\n", 1),
        ("x <= 1\nx <= 2\n1.5*x <= 2\n", 3),
    ],
)
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_system(text)
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}:")


def _random_system(rng, n_vars=3, n_rows=6):
    names = tuple(f"x{i}" for i in range(n_vars))
    rows = []
    for _ in range(n_rows):
        coeffs = tuple(F(int(v)) for v in rng.integers(-3, 4, n_vars))
        rows.append((coeffs, F(int(rng.integers(-2, 10)))))
    return LinearSystem(names, tuple(rows))


def test_multipliers_reproduce_rows():
    rng = np.random.default_rng(4)
    for _ in range(30):
        sys = _random_system(rng)
        res = project(sys, ["x0", "x1"])
        for (coeffs, bound), mult in zip(res.rows.rows, res.multipliers):
            assert all(m >= 0 for m in mult)
            combo = [sum(m * r[0][j] for m, r in zip(mult, sys.rows)) for j in range(3)]
            assert combo[0] == 0 and combo[1] == 0 and combo[2] == coeffs[0]
            assert sum(m * r[1] for m, r in zip(mult, sys.rows)) == bound


def test_elimination_order_does_not_change_the_projection():
    rng = np.random.default_rng(5)
    for _ in range(30):
        sys = _random_system(rng)
        a = project(sys, ["x0", "x1"]).rows
        b = project(sys, ["x1", "x0"]).rows
        # compare as sets of feasible x2 on a grid
        for x in (F(k, 2) for k in range(-20, 21)):
            assert a.satisfied_by({"x2": x}) == b.satisfied_by({"x2": x})


def test_projection_contains_feasible_points():
    rng = np.random.default_rng(6)
    for _ in range(30):
        sys = _random_system(rng)
        res = project(sys, ["x0"])
        for p in itertools.product(range(-3, 4), repeat=3):
            point = dict(zip(sys.variables, map(F, p)))
            if sys.satisfied_by(point):
                assert res.rows.satisfied_by({"x1": point["x1"], "x2": point["x2"]})


def test_nonnegativity_rows_leave_the_mac_optimum_alone():
    plain = mac_rows_from_values(1, 2, F(5, 2), 1, 2, F(5, 2))
    nonneg = mac_rows_from_values(1, 2, F(5, 2), 1, 2, F(5, 2), nonnegative=True)
    assert max_sum_rate(nonneg, MAC_VARIABLES) == max_sum_rate(plain, MAC_VARIABLES)
    assert len(nonneg) == len(plain) + 3


def test_unbounded_and_infeasible():
    with pytest.raises(UnboundedError):
        max_sum_rate(parse_system("x <= 1\n-y <= 0"), ["x", "y"])
    with pytest.raises(UnboundedError):
        vertex_enumeration_max(parse_system("x <= 1\n-y <= 0"), ["x", "y"])
    with pytest.raises(InfeasibleError):
        max_sum_rate(parse_system("x <= 1\n-x <= -2"), ["x"])
    with pytest.raises(InfeasibleError):
        vertex_enumeration_max(parse_system("x <= 1\n-x <= -2"), ["x"])


def test_row_explosion_guard():
    # pairwise combinations blow past the cap without pruning
    n = 400
    rows = [((F(1), F(k)), F(k * k)) for k in range(n)] + [((F(-1), F(k)), F(k)) for k in range(n)]
    with pytest.raises(RowExplosionError):
        project(LinearSystem(("x", "y"), tuple(rows)), ["x"], prune=False)


def test_mac_system_from_channel():
    ch = ChannelParams(10.0, 0.0)
    alloc = PowerAllocation.symmetric(ch, 5.0)
    want = mac_sum_rate_closed_form(ch, alloc).sum_rate
    assert float(max_sum_rate(mac_system_from_channel(ch, alloc), MAC_VARIABLES)) == pytest.approx(want, rel=1e-12)
    ch0 = ChannelParams(0.0, 0.3)
    assert max_sum_rate(mac_system_from_channel(ch0, PowerAllocation.symmetric(ch0, 0.0)), MAC_VARIABLES) == 0


def _mac_like(rng):
    # a MAC always has max(a, b) <= c <= a + b, and likewise for (d, e, f)
    a, b, d, e = (F(int(x), 12) for x in rng.integers(0, 60, 4))
    c = max(a, b) + (a + b - max(a, b)) * F(int(rng.integers(0, 13)), 12)
    f = max(d, e) + (d + e - max(d, e)) * F(int(rng.integers(0, 13)), 12)
    return a, b, c, d, e, f


def test_nonnegativity_rows_on_mac_tuples():
    rng = np.random.default_rng(8)
    for _ in range(300):
        a, b, c, d, e, f = t = _mac_like(rng)
        plain = max_sum_rate(mac_rows_from_values(*t), MAC_VARIABLES)
        nonneg = max_sum_rate(mac_rows_from_values(*t, nonnegative=True), MAC_VARIABLES)
        assert plain == nonneg == min(a + b + e, b + d + e, c + e, b + f)


def test_nonnegativity_matters_when_c_is_below_b():
    # R0 >= 0 turns R0 + R1 <= c into R1 <= c, giving the extra bound c + f
    t = (F(43, 12), F(19, 12), F(5, 6), F(7, 6), F(59, 12), F(19, 12))
    a, b, c, d, e, f = t
    assert max_sum_rate(mac_rows_from_values(*t), MAC_VARIABLES) == min(a + b + e, b + d + e, c + e, b + f)
    nonneg = mac_rows_from_values(*t, nonnegative=True)
    assert max_sum_rate(nonneg, MAC_VARIABLES) == c + f == vertex_enumeration_max(nonneg, MAC_VARIABLES)
