"""Exact integer combinatorics of the bivariate multinomial ML degree.

Everything here is computed with Python integers; alternating sums are
never evaluated in floating point.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb, factorial

from . import _kernels
from .errors import SizeError

LONESUM_CELL_LIMIT = 25


def _check_nonneg(*values):
    for v in values:
        if not isinstance(v, int) or v < 0:
            raise ValueError(f"expected a nonnegative integer, got {v!r}")


def stirling2(l: int, k: int) -> int:
    """Stirling number of the second kind from its alternating-sum formula."""
    _check_nonneg(l, k)
    if k > l:
        return 0
    total = sum((-1) ** (k - j) * comb(k, j) * j ** l for j in range(k + 1))
    return total // factorial(k)


@lru_cache(maxsize=None)
def stirling2_recurrence(l: int, k: int) -> int:
    """``S(l, k) = k S(l-1, k) + S(l-1, k-1)`` with ``S(0, 0) = 1``."""
    if l == 0 and k == 0:
        return 1
    if l == 0 or k == 0:
        return 0
    return k * stirling2_recurrence(l - 1, k) + stirling2_recurrence(l - 1, k - 1)


def poly_bernoulli(l: int, k: int) -> int:
    """Poly-Bernoulli number of negative index, ``B(l, k)``.

    ``B(l, k) = sum_{i>=0} (i!)^2 S(l+1, i+1) S(k+1, i+1)``, which counts the
    ``l x k`` lonesum 0/1 matrices.
    """
    _check_nonneg(l, k)
    return sum(factorial(i) ** 2 * stirling2(l + 1, i + 1) * stirling2(k + 1, i + 1)
               for i in range(min(l, k) + 1))


def ml_degree(m: int, n: int) -> int:
    """ML degree of the ``m x n`` multinomial model with both supplemental margins.

    Inclusion-exclusion over the rows and columns that are forced empty:
    ``sum_{k,l} (-1)^(k+l) C(m,k) C(n,l) B(m-k, n-l)``.
    """
    _check_nonneg(m, n)
    if m < 1 or n < 1:
        raise ValueError("table dimensions must be at least 1")
    return sum((-1) ** (k + l) * comb(m, k) * comb(n, l) * poly_bernoulli(m - k, n - l)
               for k in range(m + 1) for l in range(n + 1))


def ml_degree_two_rows(n: int) -> int:
    """Closed form ``2^(n+1) - 3`` for two-row tables."""
    return 2 ** (n + 1) - 3


def count_lonesum(m: int, n: int, require_positive_margins: bool = False, *,
                  override_limit: bool = False, jobs: int = 1) -> int:
    """Brute-force count of ``m x n`` 0/1 matrices without a 2x2 (anti-)identity pattern.

    With ``require_positive_margins`` matrices having a zero row or column are
    rejected as well.  The ``2^(mn)`` patterns are split into ``jobs`` ranges
    counted independently.
    """
    _check_nonneg(m, n)
    if m * n > LONESUM_CELL_LIMIT and not override_limit:
        raise SizeError(f"m*n = {m * n} exceeds the enumeration limit {LONESUM_CELL_LIMIT}")
    if m * n > 64:
        raise SizeError("at most 64 cells fit in a bit pattern")
    total = 1 << (m * n)
    if m == 0 or n == 0:
        return 0 if require_positive_margins and (m or n) else 1
    jobs = max(1, min(int(jobs), total))
    bounds = [total * j // jobs for j in range(jobs + 1)]
    shards = [(m, n, bounds[j], bounds[j + 1], bool(require_positive_margins)) for j in range(jobs)]
    if jobs == 1:
        return int(_kernels.count_lonesum_range(*shards[0]))
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return int(sum(pool.map(_count_shard, shards)))


def _count_shard(args):
    return _kernels.count_lonesum_range(*args)
