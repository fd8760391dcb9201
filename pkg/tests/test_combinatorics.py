import itertools

import pytest
from hypothesis import given, strategies as st
from sympy.functions.combinatorial.numbers import stirling

from missml.combinatorics import (LONESUM_CELL_LIMIT, count_lonesum, ml_degree, ml_degree_two_rows,
                                  poly_bernoulli, stirling2, stirling2_recurrence)
from missml.errors import SizeError


def brute_lonesum(m, n, positive_margins=False):
    """Independent oracle: reject any 2x2 submatrix equal to I or its anti-diagonal twin."""
    count = 0
    for bits in itertools.product((0, 1), repeat=m * n):
        M = [bits[i * n:(i + 1) * n] for i in range(m)]
        bad = any(M[i][j] == M[k][l] and M[i][l] == M[k][j] and M[i][j] != M[i][l]
                  for i, k in itertools.combinations(range(m), 2) for j, l in itertools.combinations(range(n), 2))
        if positive_margins and not bad:
            bad = any(sum(r) == 0 for r in M) or any(sum(M[i][j] for i in range(m)) == 0 for j in range(n))
        count += not bad
    return count


def test_stirling_examples():
    assert stirling2(0, 0) == 1
    assert stirling2(3, 2) == 3
    assert all(stirling2(l, 1) == 1 for l in range(1, 15))
    assert stirling2(5, 0) == 0 and stirling2(2, 5) == 0


def test_stirling_formula_equals_recurrence_and_sympy():
    for l in range(21):
        for k in range(l + 1):
            v = stirling2(l, k)
            assert v == stirling2_recurrence(l, k) == stirling(l, k, kind=2)
            assert isinstance(v, int)


def test_poly_bernoulli_examples():
    assert all(poly_bernoulli(0, k) == 1 for k in range(10))
    assert poly_bernoulli(1, 1) == 2
    assert poly_bernoulli(2, 2) == 14
    assert all(poly_bernoulli(1, k) == 2**k for k in range(10))


def test_poly_bernoulli_symmetric():
    for l in range(7):
        for k in range(7):
            assert poly_bernoulli(l, k) == poly_bernoulli(k, l)


@pytest.mark.parametrize("m,n", [(1, 1), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_lonesum_oracle_matches_brute_force(m, n):
    assert count_lonesum(m, n) == brute_lonesum(m, n) == poly_bernoulli(m, n)
    assert count_lonesum(m, n, True) == brute_lonesum(m, n, True)


def test_lonesum_examples():
    assert count_lonesum(1, 1) == 2
    assert count_lonesum(2, 2) == 14


def test_lonesum_size_limit():
    assert LONESUM_CELL_LIMIT == 25
    with pytest.raises(SizeError):
        count_lonesum(5, 6)
    with pytest.raises(SizeError):
        count_lonesum(9, 9, override_limit=True)


def test_lonesum_sharding_invariant():
    assert count_lonesum(3, 4, jobs=2) == count_lonesum(3, 4, jobs=1)


def test_ml_degree_examples():
    assert ml_degree(2, 2) == 5
    assert ml_degree(2, 3) == 13
    assert ml_degree(2, 4) == 29
    assert ml_degree(1, 1) == 1


def test_ml_degree_positive_margin_lonesum_count():
    # inclusion-exclusion over empty rows and columns
    for m, n in [(2, 2), (2, 3), (3, 3), (3, 4)]:
        assert ml_degree(m, n) == count_lonesum(m, n, True)


def test_ml_degree_two_rows_closed_form():
    for n in range(1, 13):
        assert ml_degree(2, n) == ml_degree_two_rows(n) == 2 ** (n + 1) - 3


def test_ml_degree_symmetric_and_monotone():
    for m in range(1, 7):
        for n in range(1, 7):
            assert ml_degree(m, n) == ml_degree(n, m)
    for m in range(2, 7):
        for n in range(2, 6):
            assert ml_degree(m, n + 1) > ml_degree(m, n)
            assert ml_degree(n + 1, m) > ml_degree(n, m)


def test_ml_degree_rejects_empty():
    with pytest.raises(ValueError):
        ml_degree(0, 3)


@given(st.integers(0, 30), st.integers(0, 30))
def test_exact_integers(l, k):
    v = poly_bernoulli(l, k)
    assert isinstance(v, int) and v >= 1
