from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from missml.polynomial import Poly, exact

small = st.integers(-5, 5)
polys = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), small, max_size=6).map(
    lambda d: Poly(2, d))
points = st.tuples(st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7))


@given(polys, polys, points)
def test_ring_operations_commute_with_evaluation(p, q, x):
    assert (p + q)(x) == p(x) + q(x)
    assert (p - q)(x) == p(x) - q(x)
    assert (p * q)(x) == p(x) * q(x)
    assert (p ** 2)(x) == p(x) ** 2


@given(polys, polys)
def test_exact_division_inverts_multiplication(p, q):
    if q.is_zero():
        return
    assert (p * q).exact_div(q) == p


@given(polys, polys)
def test_degree_of_product(p, q):
    if p.is_zero() or q.is_zero():
        return
    assert (p * q).degree() == p.degree() + q.degree()


def test_substitute_and_json_roundtrip():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    p = 3 * x * x * y - Fraction(1, 2) * y + 7
    q = p.substitute([x + y, x - y])
    for pt in [(1, 2), (Fraction(1, 3), -4)]:
        assert q(pt) == p((pt[0] + pt[1], pt[0] - pt[1]))
    assert Poly.from_json(2, p.map_coeffs(complex).to_json())(np.array([1.0, 2.0])) == pytest.approx(complex(p((1, 2))))
    assert p.degree_in([1]) == 1 and p.degree_in([0]) == 2


def test_arrays_evaluate_like_poly():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    p = (x - 2 * y) ** 3 + 5
    exps, coeffs = p.arrays()
    pt = np.array([0.7 + 0.1j, -1.3])
    assert np.sum(coeffs * np.prod(pt ** exps, axis=1)) == pytest.approx(p(pt))


def test_exact_converts_floats_losslessly():
    assert exact(0.1) == Fraction(0.1)
    assert float(exact(0.1)) == 0.1
    assert exact(3) == 3
