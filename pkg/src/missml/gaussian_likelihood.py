"""Observed-data log-likelihood of the bivariate normal with missing blocks.

Coordinates are ``(mu1, mu2, g11, g12, g22)`` where ``g`` are the entries of
the concentration matrix Γ = Σ⁻¹.  Additive constants are dropped, so
``loglik`` differs from the sum of log densities by ``(2n + r + s)/2 · log 2π``.
Blocks with zero count contribute nothing (their terms are skipped, not
multiplied by zero).
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .errors import DomainError
from .model import GaussianParams, SuffStats


@dataclass(frozen=True)
class ScoreVector:
    d_mu1: float
    d_mu2: float
    d_g11: float
    d_g12: float
    d_g22: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))


def _quadratics(st: SuffStats, mu1, mu2):
    """Mean squared deviations about ``mu`` for each block."""
    a = st.my11 - 2 * mu1 * st.my1 + mu1 * mu1
    b = st.my12 - (st.my1 * mu2 + st.my2 * mu1) + mu1 * mu2
    c = st.my22 - 2 * mu2 * st.my2 + mu2 * mu2
    zq = st.mz2 - 2 * mu1 * st.mz1 + mu1 * mu1
    wq = st.mw2 - 2 * mu2 * st.mw1 + mu2 * mu2
    return a, b, c, zq, wq


def _check(p: GaussianParams, chart: bool):
    if chart:
        if not (p.g11 > 0 and p.g22 > 0 and p.det > 0):
            raise DomainError("parameters outside the evaluation chart (Γ must be positive definite)")
    elif p.g11 == 0 or p.g22 == 0 or p.det == 0:
        raise DomainError("score is undefined where g11, g22 or det Γ vanish")


def loglik(stats: SuffStats, params: GaussianParams) -> float:
    _check(params, True)
    n, r, s = stats.n, stats.r, stats.s
    mu1, mu2, g11, g12, g22 = astuple(params)
    det = params.det
    a, b, c, zq, wq = _quadratics(stats, mu1, mu2)
    val = 0.5 * (n + r + s) * math.log(det)
    if n:
        val -= 0.5 * n * (a * g11 + 2 * b * g12 + c * g22)
    if r:
        val -= 0.5 * r * math.log(g22) + 0.5 * r * det / g22 * zq
    if s:
        val -= 0.5 * s * math.log(g11) + 0.5 * s * det / g11 * wq
    return val


def score(stats: SuffStats, params: GaussianParams, chart: bool = True) -> ScoreVector:
    """Gradient of :func:`loglik`.

    With ``chart=False`` the rational expression is evaluated anywhere off
    ``g11 · g22 · det Γ = 0`` (used to classify non-relevant critical points).
    """
    _check(params, chart)
    n, r, s = stats.n, stats.r, stats.s
    N = n + r + s
    mu1, mu2, g11, g12, g22 = astuple(params)
    det = params.det
    a, b, c, zq, wq = _quadratics(stats, mu1, mu2)
    d_mu1 = n * ((stats.my1 - mu1) * g11 + (stats.my2 - mu2) * g12) if n else 0.0
    d_mu2 = n * ((stats.my2 - mu2) * g22 + (stats.my1 - mu1) * g12) if n else 0.0
    d_g11 = 0.5 * N * g22 / det - 0.5 * n * a
    d_g22 = 0.5 * N * g11 / det - 0.5 * n * c
    d_g12 = -N * g12 / det - n * b
    if r:
        d_mu1 += r * det / g22 * (stats.mz1 - mu1)
        d_g11 -= 0.5 * r * zq
        d_g22 -= 0.5 * r / g22 + 0.5 * r * g12**2 / g22**2 * zq
        d_g12 += r * g12 / g22 * zq
    if s:
        d_mu2 += s * det / g11 * (stats.mw1 - mu2)
        d_g22 -= 0.5 * s * wq
        d_g11 -= 0.5 * s / g11 + 0.5 * s * g12**2 / g11**2 * wq
        d_g12 += s * g12 / g11 * wq
    return ScoreVector(d_mu1, d_mu2, d_g11, d_g12, d_g22)


def hessian(stats: SuffStats, params: GaussianParams, chart: bool = True) -> np.ndarray:
    """5x5 matrix of second derivatives of :func:`loglik`, symmetric by construction."""
    _check(params, chart)
    n, r, s = stats.n, stats.r, stats.s
    N = n + r + s
    mu1, mu2, g11, g12, g22 = astuple(params)
    det = params.det
    a, b, c, zq, wq = _quadratics(stats, mu1, mu2)
    H = np.zeros((5, 5))
    # indices: 0 mu1, 1 mu2, 2 g11, 3 g12, 4 g22
    d2 = det * det
    H[2, 2] = -0.5 * N * g22**2 / d2
    H[2, 3] = N * g22 * g12 / d2
    H[2, 4] = -0.5 * N * g12**2 / d2
    H[3, 3] = -N * (1 / det + 2 * g12**2 / d2)
    H[3, 4] = N * g11 * g12 / d2
    H[4, 4] = -0.5 * N * g11**2 / d2
    if n:
        H[0, 0] = -n * g11
        H[0, 1] = -n * g12
        H[1, 1] = -n * g22
        H[0, 2] = -n * (mu1 - stats.my1)
        H[0, 3] = -n * (mu2 - stats.my2)
        H[1, 3] = -n * (mu1 - stats.my1)
        H[1, 4] = -n * (mu2 - stats.my2)
    if r:
        # term -r/2 · u · zq with u = g11 - g12²/g22
        u = det / g22
        du = np.array([1.0, -2 * g12 / g22, g12**2 / g22**2])
        ddu = np.array([[0.0, 0.0, 0.0],
                        [0.0, -2 / g22, 2 * g12 / g22**2],
                        [0.0, 2 * g12 / g22**2, -2 * g12**2 / g22**3]])
        H[4, 4] += 0.5 * r / g22**2
        H[0, 0] += -r * u
        H[0, 2:] += -r * (mu1 - stats.mz1) * du
        H[2:, 2:] += np.triu(-0.5 * r * zq * ddu)
    if s:
        # term -s/2 · v · wq with v = g22 - g12²/g11
        v = det / g11
        dv = np.array([g12**2 / g11**2, -2 * g12 / g11, 1.0])
        ddv = np.array([[-2 * g12**2 / g11**3, 2 * g12 / g11**2, 0.0],
                        [2 * g12 / g11**2, -2 / g11, 0.0],
                        [0.0, 0.0, 0.0]])
        H[2, 2] += 0.5 * s / g11**2
        H[1, 1] += -s * v
        H[1, 2:] += -s * (mu2 - stats.mw1) * dv
        H[2:, 2:] += np.triu(-0.5 * s * wq * ddv)
    upper = np.triu(H)
    return upper + np.triu(H, 1).T


def loglik_density_sum(dataset, mu, sigma) -> float:
    """Sum of normal log densities over all observed blocks (no constant dropped)."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    total = 0.0
    if len(dataset.y):
        inv = np.linalg.inv(sigma)
        dev = dataset.y - mu
        quad = np.einsum("ij,jk,ik->i", dev, inv, dev)
        total += float(np.sum(-np.log(2 * np.pi) - 0.5 * np.log(np.linalg.det(sigma)) - 0.5 * quad))
    for vals, m, v in ((dataset.z, mu[0], sigma[0, 0]), (dataset.w, mu[1], sigma[1, 1])):
        if len(vals):
            total += float(np.sum(-0.5 * np.log(2 * np.pi * v) - 0.5 * (vals - m) ** 2 / v))
    return total
