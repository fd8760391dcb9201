import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import multivariate_normal, norm

from missml.errors import DomainError
from missml.gaussian_likelihood import hessian, loglik, loglik_density_sum, score
from missml.model import Dataset, GaussianParams, SuffStats, gamma_from_sigma, reduce


def random_chart_point(rng):
    A = rng.uniform(-1, 1, size=(2, 2))
    G = A @ A.T + 0.2 * np.eye(2)
    mu = rng.uniform(-2, 2, size=2)
    return GaussianParams(mu[0], mu[1], G[0, 0], G[0, 1], G[1, 1])


def random_dataset(rng, n=30, r=10, s=8):
    return Dataset(rng.normal(size=(n, 2)) @ [[1.0, 0.4], [0.0, 0.8]] + [0.3, -0.5],
                   rng.normal(0.2, 1.3, size=r), rng.normal(-0.4, 0.7, size=s))


def fd_gradient(f, x, rel=1e-6):
    g = np.zeros_like(x)
    for i in range(len(x)):
        h = rel * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_check_score(stats, p, tol=1e-5):
    an = score(stats, p).as_array()
    fd = fd_gradient(lambda v: loglik(stats, GaussianParams.from_vector(v)), p.vector())
    return np.max(np.abs(fd - an)) / max(1.0, np.max(np.abs(an))), tol


def fd_check_hessian(stats, p, tol=1e-4):
    H = hessian(stats, p)
    fd = np.column_stack([fd_gradient(lambda v, i=i: score(stats, GaussianParams.from_vector(v)).as_array()[i],
                                      p.vector()) for i in range(5)]).T
    return np.max(np.abs(fd - H)) / max(1.0, np.max(np.abs(H))), tol


def test_loglik_all_zero_point():
    assert loglik(reduce(Dataset(y=[(0.0, 0.0)])), GaussianParams(0, 0, 1, 0, 1)) == 0.0


def test_loglik_single_z_zero():
    assert loglik(reduce(Dataset(z=[0.0])), GaussianParams(0, 0, 1, 0, 1)) == 0.0


def test_loglik_matches_scipy_densities(rng):
    ds = random_dataset(rng)
    st_ = reduce(ds)
    for _ in range(10):
        p = random_chart_point(rng)
        S = np.array([[p.sigma[0], p.sigma[1]], [p.sigma[1], p.sigma[2]]])
        mu = np.array([p.mu1, p.mu2])
        ref = (multivariate_normal(mu, S).logpdf(ds.y).sum()
               + norm(mu[0], math.sqrt(S[0, 0])).logpdf(ds.z).sum()
               + norm(mu[1], math.sqrt(S[1, 1])).logpdf(ds.w).sum())
        const = -0.5 * (2 * st_.n + st_.r + st_.s) * math.log(2 * math.pi)
        assert loglik(st_, p) + const == pytest.approx(ref, rel=1e-10)
        assert loglik_density_sum(ds, mu, S) == pytest.approx(ref, rel=1e-10)


def test_chart_violation_raises(generic_stats):
    with pytest.raises(DomainError):
        loglik(generic_stats, GaussianParams(0, 0, -1, 0, 1))
    with pytest.raises(DomainError):
        score(generic_stats, GaussianParams(0, 0, 1, 2, 1))
    with pytest.raises(DomainError):
        score(generic_stats, GaussianParams(0, 0, 1, 1, 1), chart=False)


def test_score_vanishes_at_complete_data_mle(rng):
    ds = Dataset(rng.normal(size=(25, 2)))
    st_ = reduce(ds)
    cov = np.cov(ds.y.T, bias=True)
    g = gamma_from_sigma(cov[0, 0], cov[0, 1], cov[1, 1])
    p = GaussianParams(st_.my1, st_.my2, *g)
    np.testing.assert_allclose(score(st_, p).as_array(), 0.0, atol=1e-10)
    assert np.all(np.linalg.eigvalsh(hessian(st_, p)) < 0)


def test_score_matches_finite_differences(rng, generic_stats):
    for _ in range(20):
        err, tol = fd_check_score(generic_stats, random_chart_point(rng))
        assert err < tol


def test_hessian_matches_finite_differences(rng, generic_stats):
    for _ in range(20):
        err, tol = fd_check_hessian(generic_stats, random_chart_point(rng))
        assert err < tol


def test_off_diagonal_concentration_derivative_sign():
    # with r = s = 0 and n = 1 at a centred point, d/dg12 = -N g12/det - n*b
    st_ = SuffStats(1, 0, 0, 0, 0, 0, 0, 0)
    p = GaussianParams(0, 0, 2.0, 0.5, 1.0)
    assert score(st_, p).d_g12 == pytest.approx(-0.5 / p.det)
    h = 1e-6
    fd = (loglik(st_, GaussianParams(0, 0, 2.0, 0.5 + h, 1.0))
          - loglik(st_, GaussianParams(0, 0, 2.0, 0.5 - h, 1.0))) / (2 * h)
    assert fd == pytest.approx(-0.5 / p.det, rel=1e-8)


def test_score_swap_symmetry(rng, generic_stats):
    p = random_chart_point(rng)
    q = GaussianParams(p.mu2, p.mu1, p.g22, p.g12, p.g11)
    a = score(generic_stats, p).as_array()
    b = score(generic_stats.swapped(), q).as_array()
    np.testing.assert_allclose(b, a[[1, 0, 4, 3, 2]], rtol=1e-12, atol=1e-12)
    assert loglik(generic_stats.swapped(), q) == pytest.approx(loglik(generic_stats, p), rel=1e-13)


def test_hessian_exactly_symmetric(rng, generic_stats):
    for _ in range(10):
        H = hessian(generic_stats, random_chart_point(rng))
        assert np.array_equal(H, H.T)


def test_missing_blocks_dropped_exactly(rng):
    ds = random_dataset(rng)
    only_y = reduce(Dataset(ds.y))
    st_ = reduce(ds)
    p = random_chart_point(rng)
    assert loglik(only_y, p) == loglik(SuffStats(only_y.n, 0, 0, only_y.my1, only_y.my2, only_y.my11,
                                                 only_y.my12, only_y.my22, np.nan, np.nan, np.nan, np.nan), p)
    assert np.isfinite(loglik(st_, p))


@given(st.integers(0, 2**32 - 1))
def test_loglik_diverges_along_rays(seed):
    rng = np.random.default_rng(seed)
    st_ = reduce(random_dataset(rng))
    p0 = random_chart_point(rng)
    x0 = p0.vector()
    # rays towards infinity inside the chart: mean shift and scaling of Γ.  Both are
    # concave in t, so sample well past the vertex (data and start lie within ~10 of 0)
    u = rng.normal(size=2)
    direction = np.r_[u / np.linalg.norm(u), 0, 0, 0]
    vals = [loglik(st_, GaussianParams.from_vector(x0 + t * direction)) for t in (100, 200, 400, 800)]
    assert np.all(np.diff(vals) < 0)
    vals = [loglik(st_, GaussianParams.from_vector(np.r_[x0[:2], t * x0[2:]])) for t in (100, 200, 400, 800)]
    assert np.all(np.diff(vals) < 0)
    # towards the boundary of the positive definite cone: Γ -> Γ_b with det Γ_b = 0
    G = np.array([[x0[2], x0[3]], [x0[3], x0[4]]])
    w, V = np.linalg.eigh(G)
    vals = []
    for eps in (1e-2, 1e-3, 1e-4, 1e-5):
        Gb = V @ np.diag([eps * w[0], w[1]]) @ V.T
        vals.append(loglik(st_, GaussianParams(x0[0], x0[1], Gb[0, 0], Gb[0, 1], Gb[1, 1])))
    assert np.all(np.diff(vals) < 0)
