"""Regions of the multinomial hyperplane arrangement and their critical points.

The arrangement lives in the affine slice ``sum p_ij = 1`` and consists of
the ``mn + m + n`` hyperplanes ``p_ij = 0``, ``p_i+ = 0`` and ``p_+j = 0``.
A :class:`SignPartition` picks a sign for every one of these forms; the
corresponding open region is classified exactly by two rational LPs, and
independently by a purely combinatorial rule on the sign pattern.  Each
bounded region carries exactly one critical point of the discrete
log-likelihood, found by damped Newton ascent from the LP witness.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .errors import DegeneracyError, SizeError
from .lp import OPTIMAL, maximize
from .model import CountTable, ProbTable

EMPTY, UNBOUNDED, BOUNDED, NOT_BOUNDED = "empty", "unbounded", "bounded", "not_bounded"
ENUMERATION_LIMIT = 16
CRITICAL_POINT_LIMIT = 12


@dataclass(frozen=True)
class SignPartition:
    """Signs (+1 for P, -1 for N) of the cell, row-margin and column-margin forms."""

    cells: Tuple[Tuple[int, ...], ...]
    rows: Tuple[int, ...]
    cols: Tuple[int, ...]

    def __post_init__(self):
        m, n = len(self.rows), len(self.cols)
        if len(self.cells) != m or any(len(r) != n for r in self.cells):
            raise ValueError("cell signs do not match the margin lengths")
        if any(s not in (1, -1) for s in self.signs()):
            raise ValueError("signs must be +1 or -1")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.cols)

    def signs(self) -> List[int]:
        return [s for r in self.cells for s in r] + list(self.rows) + list(self.cols)

    @classmethod
    def from_index(cls, index: int, m: int, n: int) -> "SignPartition":
        """Bit ``k`` set means form ``k`` is in N; cells row-major, then rows, then columns."""
        bits = [-1 if (index >> k) & 1 else 1 for k in range(m * n + m + n)]
        cells = tuple(tuple(bits[i * n:(i + 1) * n]) for i in range(m))
        return cls(cells, tuple(bits[m * n:m * n + m]), tuple(bits[m * n + m:]))

    @classmethod
    def all_positive(cls, m: int, n: int) -> "SignPartition":
        return cls.from_index(0, m, n)

    def index(self) -> int:
        return sum(1 << k for k, s in enumerate(self.signs()) if s < 0)

    def label(self) -> str:
        ch = {1: "P", -1: "N"}
        cells = "/".join("".join(ch[s] for s in r) for r in self.cells)
        return f"{cells}|{''.join(ch[s] for s in self.rows)}|{''.join(ch[s] for s in self.cols)}"


@dataclass
class RegionClass:
    status: str
    witness: Optional[List[List[Fraction]]] = None   # interior point, sum 1
    ray: Optional[List[List[Fraction]]] = None       # recession direction, sum 0


def _forms(m: int, n: int) -> List[List[int]]:
    """Coefficient vectors (over the mn cells) of all cell and margin forms."""
    forms = []
    for k in range(m * n):
        forms.append([1 if j == k else 0 for j in range(m * n)])
    for i in range(m):
        forms.append([1 if j // n == i else 0 for j in range(m * n)])
    for c in range(n):
        forms.append([1 if j % n == c else 0 for j in range(m * n)])
    return forms


def _grid(v, m, n):
    return [list(v[i * n:(i + 1) * n]) for i in range(m)]


def classify_lp(partition: SignPartition) -> RegionClass:
    """Empty / unbounded / bounded status of one region by exact LPs.

    Cells are written ``p_ij = s_ij (delta + x_ij)`` with ``x, delta >= 0``.
    Nonemptiness maximises ``delta <= 1`` subject to ``s_f f(p) >= delta`` for
    the margin forms and ``sum p = 1``.  For a nonempty region, boundedness
    asks whether the recession cone ``{s_f f(d) >= 0, sum d = 0}`` is trivial:
    with ``d_ij = s_ij e_ij``, maximise ``sum_f s_f f(d)`` capped at 1.
    """
    m, n = partition.shape
    k = m * n
    s = [v for r in partition.cells for v in r]
    forms = _forms(m, n)
    margin_signs = list(partition.rows) + list(partition.cols)
    margin_forms = forms[k:]

    # variables: x_0..x_{k-1}, delta
    A_ub, b_ub = [], []
    for sf, f in zip(margin_signs, margin_forms):
        # -(s_f f(p)) + delta <= 0,  f(p) = sum_j f_j s_j (delta + x_j)
        row = [-sf * f[j] * s[j] for j in range(k)]
        row.append(1 - sf * sum(f[j] * s[j] for j in range(k)))
        A_ub.append(row)
        b_ub.append(0)
    A_ub.append([0] * k + [1])
    b_ub.append(1)
    A_eq = [s + [sum(s)]]
    res = maximize([0] * k + [1], A_ub, b_ub, A_eq, [1])
    if res.status != OPTIMAL or res.value <= 0:
        return RegionClass(EMPTY)
    delta = res.x[k]
    witness = [s[j] * (delta + res.x[j]) for j in range(k)]

    # recession cone, variables e_0..e_{k-1}
    A_ub, b_ub = [], []
    for sf, f in zip(margin_signs, margin_forms):
        A_ub.append([-sf * f[j] * s[j] for j in range(k)])
        b_ub.append(0)
    total = [sum(sf * f[j] * s[j] for sf, f in zip(partition.signs(), forms)) for j in range(k)]
    A_ub.append(total)
    b_ub.append(1)
    res = maximize(total, A_ub, b_ub, [s], [0])
    if res.status == OPTIMAL and res.value > 0:
        ray = [s[j] * res.x[j] for j in range(k)]
        return RegionClass(UNBOUNDED, _grid(witness, m, n), _grid(ray, m, n))
    return RegionClass(BOUNDED, _grid(witness, m, n))


def _is_lonesum(matrix) -> bool:
    rows = [frozenset(j for j, v in enumerate(r) if v) for r in matrix]
    return all(a <= b or b <= a for i, a in enumerate(rows) for b in rows[i + 1:])


def classify_combinatorial(partition: SignPartition) -> str:
    """Bounded-and-nonempty test from the sign pattern alone.

    A region is bounded and nonempty exactly when every margin form is
    positive, the 0/1 matrix of negative cells is lonesum (no 2x2 identity
    or anti-identity pattern), and no row or column is entirely negative.
    """
    if any(s < 0 for s in partition.rows) or any(s < 0 for s in partition.cols):
        return NOT_BOUNDED
    neg = [[s < 0 for s in r] for r in partition.cells]
    if any(all(r) for r in neg) or any(all(c) for c in zip(*neg)):
        return NOT_BOUNDED
    return BOUNDED if _is_lonesum(neg) else NOT_BOUNDED


def _check_enumerable(m: int, n: int, limit: int = ENUMERATION_LIMIT):
    if m < 2 or n < 2:
        raise ValueError("region enumeration needs m, n >= 2 (margins coincide with cells otherwise)")
    if m * n + m + n > limit:
        raise SizeError(f"mn+m+n = {m * n + m + n} exceeds the enumeration limit {limit}")


def iter_partitions(m: int, n: int, lo: int = 0, hi: Optional[int] = None) -> Iterator[SignPartition]:
    hi = (1 << (m * n + m + n)) if hi is None else hi
    for idx in range(lo, hi):
        yield SignPartition.from_index(idx, m, n)


def _count_range(args) -> int:
    m, n, lo, hi = args
    return sum(classify_lp(p).status == BOUNDED for p in iter_partitions(m, n, lo, hi))


def count_bounded_regions(m: int, n: int, jobs: int = 1) -> int:
    """Exhaustively classify all ``2^(mn+m+n)`` sign partitions by LP and count bounded ones."""
    _check_enumerable(m, n)
    total = 1 << (m * n + m + n)
    jobs = max(1, int(jobs))
    shards = [(m, n, total * j // jobs, total * (j + 1) // jobs) for j in range(jobs)]
    if jobs == 1:
        return _count_range(shards[0])
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return sum(pool.map(_count_range, shards))


def bounded_regions(m: int, n: int) -> List[Tuple[SignPartition, RegionClass]]:
    _check_enumerable(m, n)
    out = []
    for p in iter_partitions(m, n):
        rc = classify_lp(p)
        if rc.status == BOUNDED:
            out.append((p, rc))
    return out


def regions_csv(m: int, n: int) -> str:
    """One row per partition: index, sign label, LP status, combinatorial status, witness."""
    _check_enumerable(m, n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "signs", "status", "combinatorial", "witness"])
    for p in iter_partitions(m, n):
        rc = classify_lp(p)
        wit = "" if rc.witness is None else ";".join(str(v) for r in rc.witness for v in r)
        w.writerow([p.index(), p.label(), rc.status, classify_combinatorial(p), wit])
    return buf.getvalue()


# -- discrete likelihood -------------------------------------------------------

def _linear_forms(m: int, n: int) -> np.ndarray:
    return np.array(_forms(m, n), dtype=float)


def _weighted(w, v, f):
    """``w * f(v)`` with terms of zero weight dropped exactly (``0 log 0 = 0``, ``0 / 0 = 0``)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(w > 0, w * f(v), 0.0)


def discrete_loglik(table: CountTable, p: np.ndarray) -> float:
    """``sum t log|p_ij| + sum r log|p_i+| + sum s log|p_+j|`` (zero counts contribute nothing)."""
    p = np.asarray(p, dtype=float)
    log = lambda v: np.log(np.abs(v))
    return float(np.sum(_weighted(table.t, p, log)) + np.sum(_weighted(table.rvec, p.sum(axis=1), log))
                 + np.sum(_weighted(table.svec, p.sum(axis=0), log)))


def discrete_gradient(table: CountTable, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    inv = lambda v: 1.0 / v
    return (_weighted(table.t, p, inv) + _weighted(table.rvec, p.sum(axis=1), inv)[:, None]
            + _weighted(table.svec, p.sum(axis=0), inv)[None, :])


def critical_residual(table: CountTable, p: np.ndarray) -> float:
    """Relative violation of ``grad = lambda·1`` on the slice ``sum p = 1``.

    At a critical point the multiplier equals the total count by Euler's
    identity for this degree-zero-homogeneous likelihood.
    """
    g = discrete_gradient(table, p)
    return float(np.max(np.abs(g - table.total)) / table.total)


@dataclass
class DiscreteCriticalPoint:
    partition: SignPartition
    table: ProbTable
    loglik: float
    residual: float
    iterations: int

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.table.p >= 0))

    def to_dict(self) -> dict:
        return {"signs": self.partition.label(), "p": self.table.p.tolist(), "loglik": self.loglik,
                "residual": self.residual, "iterations": self.iterations, "nonnegative": self.nonnegative}


def region_maximum(table: CountTable, partition: SignPartition, start, tol: float = 1e-13,
                   max_iter: int = 200) -> DiscreteCriticalPoint:
    """Damped Newton ascent of the (concave) log-likelihood inside one region."""
    m, n = table.shape
    k = m * n
    L = _linear_forms(m, n)
    w = np.concatenate([table.t.reshape(-1), table.rvec, table.svec])
    sig = np.array(partition.signs(), dtype=float)
    # orthonormal basis of {d : sum d = 0}
    q, _ = np.linalg.qr(np.vstack([np.ones(k), np.eye(k)[:-1]]).T)
    Z = q[:, 1:]

    def f(x):
        return float(w @ np.log(np.abs(L @ x)))

    x = np.array([float(v) for r in start for v in r])
    it = 0
    for it in range(1, max_iter + 1):
        v = L @ x
        g = Z.T @ (L.T @ (w / v))
        H = -Z.T @ (L.T * (w / v ** 2)) @ L @ Z
        step = Z @ np.linalg.solve(H, -g)
        decrement = float(-g @ np.linalg.solve(H, g))
        # stay inside the region: every form keeps its sign
        dv = L @ step
        shrink = sig * dv < 0
        alpha = 1.0
        if np.any(shrink):
            alpha = min(1.0, 0.99 * float(np.min(-v[shrink] / dv[shrink])))
        f0 = f(x)
        while f(x + alpha * step) < f0 + 0.25 * alpha * decrement and alpha > 1e-16:
            alpha *= 0.5
        x = x + alpha * step
        x = x / x.sum()
        if decrement < tol * max(1.0, abs(f0)) and alpha == 1.0:
            break
    else:
        raise DegeneracyError(f"Newton ascent did not converge in region {partition.label()}")
    if not np.all(sig * (L @ x) > 0):
        raise DegeneracyError(f"ascent left region {partition.label()}")
    p = x.reshape(m, n)
    return DiscreteCriticalPoint(partition, ProbTable(p), discrete_loglik(table, p),
                                 critical_residual(table, p), it)


def discrete_critical_points(table: CountTable) -> List[DiscreteCriticalPoint]:
    """One critical point of the discrete log-likelihood per bounded region."""
    m, n = table.shape
    if np.any(table.t <= 0) or np.any(table.rvec <= 0) or np.any(table.svec <= 0):
        raise ValueError("critical points are computed for strictly positive tables only")
    _check_enumerable(m, n, CRITICAL_POINT_LIMIT)
    return [region_maximum(table, part, rc.witness) for part, rc in bounded_regions(m, n)]
