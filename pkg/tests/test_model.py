import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from missml.errors import DomainError
from missml.model import (CountTable, Dataset, GaussianParams, ProbTable, SuffStats, gamma_from_sigma,
                          is_relevant, reduce, sigma_from_gamma)

finite = st.floats(-50, 50, allow_nan=False)


def test_reduce_single_zero_row():
    st_ = reduce(Dataset(y=[(0.0, 0.0)]))
    assert (st_.n, st_.r, st_.s) == (1, 0, 0)
    assert st_.my1 == st_.my2 == st_.my11 == st_.my12 == st_.my22 == 0


def test_reduce_hand_means():
    st_ = reduce(Dataset(y=[(1, 2), (3, 4)]))
    assert (st_.my1, st_.my2, st_.my11, st_.my12, st_.my22) == (2, 3, 5, 7, 10)


def test_reduce_single_z():
    st_ = reduce(Dataset(z=[2.0]))
    assert (st_.n, st_.r, st_.s, st_.mz1, st_.mz2) == (0, 1, 0, 2, 4)


def test_dataset_rejects_empty_and_nonfinite():
    with pytest.raises(DomainError):
        Dataset()
    with pytest.raises(DomainError):
        Dataset(z=[np.nan])


@given(arrays(float, st.tuples(st.integers(1, 20), st.just(2)), elements=finite),
       arrays(float, st.integers(0, 10), elements=finite),
       arrays(float, st.integers(0, 10), elements=finite), st.randoms())
def test_reduce_permutation_invariant(y, z, w, rnd):
    a = reduce(Dataset(y, z, w))
    perm = lambda v: v[rnd.sample(range(len(v)), len(v))] if len(v) else v
    b = reduce(Dataset(perm(y), perm(z), perm(w)))
    np.testing.assert_allclose(list(a.to_dict().values()), list(b.to_dict().values()),
                               rtol=1e-12, atol=1e-12)


@given(arrays(float, st.tuples(st.integers(1, 30), st.just(2)), elements=finite),
       arrays(float, st.integers(0, 10), elements=finite),
       arrays(float, st.integers(0, 10), elements=finite))
def test_variances_nonnegative_within_tolerance(y, z, w):
    s = reduce(Dataset(y, z, w))
    assert s.my11 >= s.my1**2 - 1e-9
    assert s.my22 >= s.my2**2 - 1e-9
    if s.r:
        assert s.mz2 >= s.mz1**2 - 1e-9
    if s.s:
        assert s.mw2 >= s.mw1**2 - 1e-9
    assert s.variance_ok()


def test_moments_match_numpy_on_large_block():
    rng = np.random.default_rng(1)
    y = rng.normal(1e4, 1.0, size=(100000, 2))
    s = reduce(Dataset(y))
    assert s.my11 - s.my1**2 == pytest.approx(np.var(y[:, 0]), rel=1e-4)


@pytest.mark.parametrize("sigma,gamma", [
    ((1, 0, 1), (1, 0, 1)),
    ((2, 0, 2), (0.5, 0, 0.5)),
    ((2, 1, 2), (2 / 3, -1 / 3, 2 / 3)),
])
def test_gamma_from_sigma_examples(sigma, gamma):
    np.testing.assert_allclose(gamma_from_sigma(*sigma), gamma, rtol=1e-15, atol=1e-15)


def test_non_pd_rejected():
    with pytest.raises(DomainError):
        gamma_from_sigma(1.0, 2.0, 1.0)
    with pytest.raises(DomainError):
        sigma_from_gamma(-1.0, 0.0, 1.0)


pd_entries = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 3))


@given(pd_entries)
def test_sigma_gamma_roundtrip(abcd):
    a, b, c, eps = abcd
    A = np.array([[a, b], [c, 1.0]])
    S = A @ A.T + eps * np.eye(2)
    back = sigma_from_gamma(*gamma_from_sigma(S[0, 0], S[0, 1], S[1, 1]))
    np.testing.assert_allclose(back, (S[0, 0], S[0, 1], S[1, 1]), rtol=1e-12, atol=1e-12 * np.abs(S).max())


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_relevance_matches_eigenvalues(g11, g12, g22):
    G = np.array([[g11, g12], [g12, g22]])
    ev = np.linalg.eigvalsh(G)
    if abs(g11 * g22 - g12 * g12) < 1e-9 or min(abs(ev)) < 1e-9:
        return
    assert is_relevant(g11, g12, g22) == bool(np.all(ev > 0))
    if is_relevant(g11, g12, g22):
        S = np.array(sigma_from_gamma(g11, g12, g22))
        assert np.all(np.linalg.eigvalsh(np.array([[S[0], S[1]], [S[1], S[2]]])) > 0)


def test_params_roundtrip_json():
    p = GaussianParams.from_sigma(0.5, -1.0, 2.0, 0.3, 1.5)
    q = GaussianParams.from_dict(json.loads(json.dumps(p.to_dict())))
    assert q == p
    np.testing.assert_allclose(p.sigma, (2.0, 0.3, 1.5), rtol=1e-14)


def test_stats_json_roundtrip(generic_stats):
    assert SuffStats.from_dict(json.loads(json.dumps(generic_stats.to_dict()))) == generic_stats


def test_count_table_validation():
    with pytest.raises(DomainError):
        CountTable([[1, -1], [1, 1]], [0, 0], [0, 0])
    with pytest.raises(DomainError):
        CountTable([[1, 1], [1, 1]], [0, 0, 0], [0, 0])
    t = CountTable([[1, 2], [3, 4]], [1, 1], [2, 2])
    assert t.shape == (2, 2) and t.total == 16
    assert CountTable.from_dict(t.to_dict()).to_dict() == t.to_dict()


def test_prob_table_margins():
    p = ProbTable([[0.1, 0.2], [0.3, 0.4]])
    np.testing.assert_allclose(p.row_margins, [0.3, 0.7])
    np.testing.assert_allclose(p.col_margins, [0.4, 0.6])
    assert p.in_simplex()
    assert not ProbTable([[0.5, 0.6], [0.0, 0.0]]).in_simplex()
