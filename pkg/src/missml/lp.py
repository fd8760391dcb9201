"""Dense two-phase simplex method over the rationals with Bland's rule.

Problems are tiny (tens of variables), so a dense ``Fraction`` tableau is
both fast enough and free of any floating-point tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class LPResult:
    status: str
    value: Optional[Fraction] = None
    x: Optional[List[Fraction]] = None


def _pivot(T, basis, r, col):
    row = T[r]
    piv = row[col]
    if piv != 1:
        row = [v / piv for v in row]
        T[r] = row
    nz = [j for j, v in enumerate(row) if v]
    for i, other in enumerate(T):
        if i != r:
            f = other[col]
            if f:
                for j in nz:
                    other[j] -= f * row[j]
    basis[r] = col


def _optimize(T, basis, allowed):
    """Maximise the objective stored in the last row of ``T`` (Bland's rule)."""
    obj = T[-1]
    while True:
        col = next((j for j in allowed if obj[j] > 0), None)
        if col is None:
            return OPTIMAL
        best, r = None, None
        for i in range(len(T) - 1):
            a = T[i][col]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                    best, r = ratio, i
        if r is None:
            return UNBOUNDED
        _pivot(T, basis, r, col)
        obj = T[-1]


def maximize(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
             A_eq: Sequence[Sequence] = (), b_eq: Sequence = ()) -> LPResult:
    """Maximise ``c·x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    All data are converted to :class:`fractions.Fraction`; the result is exact.
    """
    n = len(c)
    rows = [[Fraction(v) for v in a] + [Fraction(b)] for a, b in zip(A_ub, b_ub)]
    n_ub = len(rows)
    rows += [[Fraction(v) for v in a] + [Fraction(b)] for a, b in zip(A_eq, b_eq)]
    m = len(rows)
    if any(len(r) != n + 1 for r in rows):
        raise ValueError("constraint rows must have len(c) entries")
    # columns: x (n) | slacks (n_ub) | artificials (m) | rhs
    width = n + n_ub + m
    T = []
    for i, r in enumerate(rows):
        line = r[:n] + [Fraction(0)] * (n_ub + m) + [r[n]]
        if i < n_ub:
            line[n + i] = Fraction(1)
        if line[-1] < 0:
            line = [-v for v in line]
        line[n + n_ub + i] = Fraction(1)
        T.append(line)
    basis = [n + n_ub + i for i in range(m)]
    # phase 1: maximise minus the sum of artificials
    obj = [Fraction(0)] * (width + 1)
    for line in T:
        for j in range(n + n_ub):
            obj[j] += line[j]
        obj[-1] += line[-1]
    T.append(obj)
    _optimize(T, basis, range(n + n_ub))
    if T[-1][-1] != 0:
        return LPResult(INFEASIBLE)
    # drive remaining artificials out of the basis; drop redundant rows
    for i in reversed(range(m)):
        if basis[i] >= n + n_ub:
            col = next((j for j in range(n + n_ub) if T[i][j] != 0), None)
            if col is None:
                del T[i]
                del basis[i]
            else:
                _pivot(T, basis, i, col)
    # phase 2
    obj = [Fraction(-v) for v in c] + [Fraction(0)] * (width - n + 1)
    for i, b in enumerate(basis):
        f = obj[b]
        if f:
            obj = [a - f * v for a, v in zip(obj, T[i])]
    T[-1] = [-v for v in obj]
    status = _optimize(T, basis, range(n + n_ub))
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult(OPTIMAL, value, x)
