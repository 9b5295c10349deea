"""Exact rational Fourier-Motzkin elimination for small inequality systems.

A system is a list of rows ``sum_j A[i, j] x_j <= b_i`` with ``Fraction``
coefficients. Eliminating ``x`` keeps the rows where ``x`` has a zero
coefficient and adds every positive combination of one row with a positive
and one row with a negative coefficient that cancels ``x``.

Text format, one row per line::

    1*R0 + 1*R1 <= 3/2
    -1*R0 <= 0

Blank lines and ``#`` comments are ignored.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import ChannelParams, PowerAllocation, mac_sum_rate_closed_form
from .errors import DomainError, InfeasibleError, ParseError, RowExplosionError, UnboundedError

MAX_ROWS = 100_000

Row = tuple[tuple[Fraction, ...], Fraction]


def _frac(x) -> Fraction:
    # Fraction(float) is exact, so channel values reach the eliminator unrounded
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class LinearSystem:
    variables: tuple[str, ...]
    rows: tuple[Row, ...] = ()

    def __post_init__(self):
        names = tuple(self.variables)
        if len(set(names)) != len(names):
            raise DomainError(f"variable names must be unique: {names}")
        rows = []
        for coeffs, bound in self.rows:
            coeffs = tuple(_frac(a) for a in coeffs)
            if len(coeffs) != len(names):
                raise DomainError(f"row has {len(coeffs)} coefficients for {len(names)} variables")
            rows.append((coeffs, _frac(bound)))
        object.__setattr__(self, "variables", names)
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def from_dicts(cls, variables: Sequence[str], rows: Iterable[tuple[Mapping[str, object], object]]):
        """Build from ``({name: coeff}, bound)`` pairs; missing names get 0."""
        variables = tuple(variables)
        out = []
        for coeffs, bound in rows:
            unknown = set(coeffs) - set(variables)
            if unknown:
                raise DomainError(f"unknown variables {sorted(unknown)}")
            out.append((tuple(_frac(coeffs.get(v, 0)) for v in variables), bound))
        return cls(variables, tuple(out))

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise DomainError(f"unknown variable {name!r}") from None

    def satisfied_by(self, point: Mapping[str, Fraction]) -> bool:
        x = [_frac(point[v]) for v in self.variables]
        return all(sum(a * xi for a, xi in zip(coeffs, x)) <= b for coeffs, b in self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class ProjectionResult:
    """Rows after elimination.

    ``multipliers[i]`` holds the nonnegative weights of the input rows whose
    sum is result row ``i`` (restricted to the remaining variables).
    """

    eliminated: tuple[str, ...]
    rows: LinearSystem
    redundant_removed: int
    multipliers: tuple[tuple[Fraction, ...], ...] = field(default=(), repr=False)


def _normal_key(coeffs):
    # scale so the first nonzero coefficient has magnitude 1
    for a in coeffs:
        if a != 0:
            s = abs(a)
            return tuple(x / s for x in coeffs), s
    return coeffs, Fraction(1)


def _prune(rows, mults):
    """Drop duplicates and rows dominated by a parallel row with a smaller bound."""
    best: dict = {}
    for i, (coeffs, b) in enumerate(rows):
        key, s = _normal_key(coeffs)
        nb = b / s
        if key not in best or nb < best[key][0]:
            best[key] = (nb, i)
    keep = sorted(i for _, i in best.values())
    return [rows[i] for i in keep], [mults[i] for i in keep], len(rows) - len(keep)


def _eliminate_rows(rows, mults, j, prune, max_support):
    zero, pos, neg = [], [], []
    for r, m in zip(rows, mults):
        a = r[0][j]
        (pos if a > 0 else neg if a < 0 else zero).append((r, m))
    if len(zero) + len(pos) * len(neg) > MAX_ROWS:
        raise RowExplosionError(
            f"eliminating column {j} would produce {len(zero) + len(pos) * len(neg)} rows (limit {MAX_ROWS})"
        )
    out_rows = [r for r, _ in zero]
    out_mults = [m for _, m in zero]
    removed_support = 0
    for (rp, mp), (rn, mn) in itertools.product(pos, neg):
        if prune and sum(1 for x, y in zip(mp, mn) if x or y) > max_support:
            # Chernikov: more parents than eliminations + 1 means redundant
            removed_support += 1
            continue
        lp, ln = -rn[0][j], rp[0][j]
        coeffs = tuple(lp * x + ln * y for x, y in zip(rp[0], rn[0]))
        out_rows.append((coeffs, lp * rp[1] + ln * rn[1]))
        out_mults.append(tuple(lp * x + ln * y for x, y in zip(mp, mn)))
    removed = removed_support
    if prune:
        out_rows, out_mults, dropped = _prune(out_rows, out_mults)
        removed += dropped
    return out_rows, out_mults, removed


def project(sys: LinearSystem, eliminate: Sequence[str], prune: bool = True) -> ProjectionResult:
    """Eliminate the variables in ``eliminate`` one after another.

    With ``prune`` each step drops duplicate rows, rows dominated by a
    parallel row with a smaller bound, and combinations built from more than
    ``k + 1`` input rows after ``k`` eliminations (Chernikov's rule), all of
    which are implied by the rows kept.
    """
    cols = [sys.index(v) for v in eliminate]
    if len(set(cols)) != len(cols):
        raise DomainError("each variable can be eliminated once")
    n = len(sys.rows)
    rows = list(sys.rows)
    mults = [tuple(Fraction(int(i == k)) for i in range(n)) for k in range(n)]
    removed = 0
    if prune:
        rows, mults, removed = _prune(rows, mults)
    for step, j in enumerate(cols, start=1):
        rows, mults, r = _eliminate_rows(rows, mults, j, prune, step + 1)
        removed += r
    keep = [i for i in range(len(sys.variables)) if i not in cols]
    names = tuple(sys.variables[i] for i in keep)
    out = tuple((tuple(c[i] for i in keep), b) for c, b in rows)
    return ProjectionResult(tuple(eliminate), LinearSystem(names, out), removed, tuple(mults))


def fme_eliminate(sys: LinearSystem, var: str, prune: bool = True) -> ProjectionResult:
    """Project ``var`` out of ``sys``."""
    return project(sys, [var], prune)


def _fresh_name(names, base="s"):
    name = base
    while name in names:
        name += "_"
    return name


def _with_sum(sys: LinearSystem, objective: Sequence[str]):
    for v in objective:
        sys.index(v)
    s = _fresh_name(sys.variables)
    names = sys.variables + (s,)
    rows = [(c + (Fraction(0),), b) for c, b in sys.rows]
    total = tuple(Fraction(1 if v in objective else 0) for v in sys.variables)
    rows.append((tuple(-a for a in total) + (Fraction(1),), Fraction(0)))
    rows.append((total + (Fraction(-1),), Fraction(0)))
    return LinearSystem(names, tuple(rows)), s


def sum_rate_candidates(sys: LinearSystem, objective: Sequence[str], prune: bool = True) -> list[Fraction]:
    """Upper bounds on ``sum(objective)`` left after eliminating every other variable."""
    lifted, s = _with_sum(sys, objective)
    res = project(lifted, sys.variables, prune)
    uppers, lowers = [], []
    for (k,), b in res.rows.rows:
        if k > 0:
            uppers.append(b / k)
        elif k < 0:
            lowers.append(b / k)
        elif b < 0:
            raise InfeasibleError(f"derived row 0 <= {b}")
    if uppers and lowers and max(lowers) > min(uppers):
        raise InfeasibleError("lower and upper bounds on the sum cross")
    if not uppers:
        raise UnboundedError(f"sum of {list(objective)} is unbounded above")
    return uppers


def max_sum_rate(sys: LinearSystem, objective: Sequence[str]) -> Fraction:
    """Exact maximum of ``sum(objective)`` over ``sys``."""
    return min(sum_rate_candidates(sys, objective))


def _solve(A, b):
    """Exact Gaussian elimination for a square system; ``None`` if singular."""
    n = len(A)
    M = [list(row) + [bi] for row, bi in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def _vertex_max(A, b, cost):
    """Largest ``cost . x`` over basic feasible points of ``A x <= b``.

    A batched floating-point pass discards singular bases and clearly
    infeasible points; every survivor is re-solved and re-checked exactly,
    so the returned value is exact.
    """
    n = len(cost)
    Af = np.array([[float(x) for x in row] for row in A])
    bf = np.array([float(x) for x in b])
    combos = np.array(list(itertools.combinations(range(len(A)), n)), dtype=np.int64)
    if combos.size == 0:
        return None
    M = Af[combos]
    norms = np.prod(np.linalg.norm(M, axis=2), axis=1)
    regular = np.abs(np.linalg.det(M)) > 1e-9 * np.maximum(norms, 1e-300)
    combos, M = combos[regular], M[regular]
    if combos.size == 0:
        return None
    X = np.linalg.solve(M, bf[combos][:, :, None])[:, :, 0]
    slack = X @ Af.T - bf
    tol = 1e-7 * (1.0 + np.abs(bf) + np.abs(X) @ np.abs(Af).T)
    survivors = combos[np.all(slack <= tol, axis=1)]
    best = None
    for idx in survivors:
        x = _solve([A[i] for i in idx], [b[i] for i in idx])
        if x is None:
            continue
        if all(sum(a * xi for a, xi in zip(row, x)) <= bi for row, bi in zip(A, b)):
            val = sum(ci * xi for ci, xi in zip(cost, x))
            if best is None or val > best:
                best = val
    return best


def vertex_enumeration_max(sys: LinearSystem, objective: Sequence[str], box: int = 10**6) -> Fraction:
    """Brute-force maximum of ``sum(objective)`` for small systems.

    Every basis of ``n`` rows is solved exactly. Unboundedness is decided on
    the recession cone ``{d : A d <= 0, |d_i| <= 1}``. The value itself is
    computed with ``|x_i| <= box`` added, which is exact whenever an optimal
    point lies inside the box.
    """
    n = len(sys.variables)
    if n > 6:
        raise DomainError("vertex enumeration is limited to small systems")
    for v in objective:
        sys.index(v)
    cost = [Fraction(1 if v in objective else 0) for v in sys.variables]
    A = [list(c) for c, _ in sys.rows]
    b = [bnd for _, bnd in sys.rows]
    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    cube_A = eye + [[-x for x in row] for row in eye]

    best = _vertex_max(A + cube_A, b + [Fraction(box)] * (2 * n), cost)
    if best is None:
        raise InfeasibleError("no feasible point")
    ray = _vertex_max(A + cube_A, [Fraction(0)] * len(A) + [Fraction(1)] * (2 * n), cost)
    if ray is not None and ray > 0:
        raise UnboundedError(f"sum of {list(objective)} is unbounded above")
    return best


MAC_VARIABLES = ("R0", "R1", "R2")


def mac_system_from_channel(ch: ChannelParams, alloc: PowerAllocation, nonnegative: bool = False) -> LinearSystem:
    """The six per-receiver MAC rows over ``(R0, R1, R2)``.

    Bounds are the exact rationals of the floating-point values from
    :func:`~icbounds.core.mac_sum_rate_closed_form`. ``nonnegative`` adds
    ``R >= 0`` rows.
    """
    return mac_rows_from_values(*mac_sum_rate_closed_form(ch, alloc).as_tuple(), nonnegative=nonnegative)


def mac_rows_from_values(a, b, c, d, e, f, nonnegative: bool = False) -> LinearSystem:
    """Same six-row layout with caller-supplied bounds."""
    rows = [
        ({"R0": 1}, a),
        ({"R1": 1}, b),
        ({"R0": 1, "R1": 1}, c),
        ({"R0": 1}, d),
        ({"R2": 1}, e),
        ({"R0": 1, "R2": 1}, f),
    ]
    if nonnegative:
        rows += [({v: -1}, 0) for v in MAC_VARIABLES]
    return LinearSystem.from_dicts(MAC_VARIABLES, rows)


_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*\s*)?([A-Za-z_]\w*|\d+(?:/\d+)?)\s*")
_NUMBER = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def _parse_fraction(text, line):
    if not _NUMBER.match(text):
        raise ParseError(line, f"expected an integer or p/q, got {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ParseError(line, f"zero denominator in {text!r}") from None


def _parse_lhs(lhs, line, names):
    coeffs: dict[str, Fraction] = {}
    pos = 0
    first = True
    if not lhs.strip():
        raise ParseError(line, "empty left-hand side")
    while pos < len(lhs):
        m = _TERM.match(lhs, pos)
        if not m or m.end() == pos or (not first and m.group(1) is None):
            raise ParseError(line, f"cannot read terms at {lhs[pos:].strip()!r}; expected <coeff>*<var>")
        sign, coeff_text, atom = m.groups()
        pos = m.end()
        first = False
        if atom[0].isdigit():
            # a bare number is only allowed as the empty sum 0
            if coeff_text is not None or _parse_fraction(atom, line) != 0:
                raise ParseError(line, f"constant term {atom!r} on the left-hand side")
            continue
        coeff = _parse_fraction(coeff_text, line) if coeff_text else Fraction(1)
        if sign == "-":
            coeff = -coeff
        if atom not in names:
            names.append(atom)
        coeffs[atom] = coeffs.get(atom, Fraction(0)) + coeff
    return coeffs


def parse_system(text: str) -> LinearSystem:
    """Parse the text format; variables are ordered by first appearance."""
    names: list[str] = []
    rows = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.count("<=") != 1:
            raise ParseError(n, "each row needs exactly one '<='")
        lhs, rhs = line.split("<=")
        rhs = rhs.strip().replace(" ", "")
        bound = _parse_fraction(rhs, n)
        rows.append((_parse_lhs(lhs, n, names), bound))
    return LinearSystem.from_dicts(names, rows)


def format_system(sys: LinearSystem) -> str:
    """Inverse of :func:`parse_system` (up to term order and zero terms)."""
    lines = []
    for coeffs, bound in sys.rows:
        terms = []
        for a, v in zip(coeffs, sys.variables):
            if a == 0:
                continue
            if not terms:
                terms.append(f"{a}*{v}")
            else:
                terms.append(f"{'-' if a < 0 else '+'} {abs(a)}*{v}")
        lines.append(f"{' '.join(terms) or '0'} <= {bound}")
    return "\n".join(lines) + ("\n" if lines else "")
