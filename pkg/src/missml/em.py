"""EM iterations for the bivariate normal and the multinomial missing-data models."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .arrangement import discrete_gradient, discrete_loglik
from .errors import DegeneracyError, DomainError
from .gaussian_likelihood import loglik, score
from .model import CountTable, GaussianParams, ProbTable, SuffStats

EM_TOL = 1e-9
MAX_ITER = 10000
ASCENT_TOL = 1e-10


@dataclass
class EMTrace:
    """Iterates ``(params, loglik)`` starting with the initial point."""

    iterates: List[Tuple[object, float]] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    residual: float = math.inf

    @property
    def final(self):
        return self.iterates[-1][0]

    @property
    def logliks(self) -> np.ndarray:
        return np.array([ll for _, ll in self.iterates])

    def is_monotone(self, tol: float = ASCENT_TOL) -> bool:
        return bool(np.all(np.diff(self.logliks) >= -tol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        first = self.iterates[0][0]
        if isinstance(first, GaussianParams):
            names = ["mu1", "mu2", "g11", "g12", "g22"]
            rows = (astuple(p) for p, _ in self.iterates)
        else:
            m, n = first.p.shape
            names = [f"p{i + 1}{j + 1}" for i in range(m) for j in range(n)]
            rows = (tuple(p.p.reshape(-1)) for p, _ in self.iterates)
        w.writerow(["iteration", "loglik"] + names)
        for k, (vals, (_, ll)) in enumerate(zip(rows, self.iterates)):
            w.writerow([k, repr(float(ll))] + [repr(float(v)) for v in vals])
        return buf.getvalue()


# -- bivariate normal ------------------------------------------------------------

def default_gaussian_init(stats: SuffStats) -> GaussianParams:
    """Per-coordinate available-case means and variances, zero covariance."""
    n, r, s = stats.n, stats.r, stats.s
    if n + r <= 0 or n + s <= 0:
        raise DomainError("each coordinate needs at least one observation")
    m1 = (n * stats.my1 + r * stats.mz1) / (n + r)
    m2 = (n * stats.my2 + s * stats.mw1) / (n + s)
    v1 = (n * stats.my11 + r * stats.mz2) / (n + r) - m1 * m1
    v2 = (n * stats.my22 + s * stats.mw2) / (n + s) - m2 * m2
    if not (v1 > 0 and v2 > 0):
        raise DomainError("available-case variances are not positive")
    return GaussianParams.from_sigma(m1, m2, v1, 0.0, v2)


def _gaussian_step(stats: SuffStats, mu: np.ndarray, sig: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """One EM update in (mu, Sigma) from the expected completed-data sums."""
    n, r, s = stats.n, stats.r, stats.s
    N = n + r + s
    S1 = np.array([n * stats.my1, n * stats.my2])
    S2 = np.array([[n * stats.my11, n * stats.my12], [n * stats.my12, n * stats.my22]])
    for cnt, m1, m2, obs, mis in ((r, stats.mz1, stats.mz2, 0, 1), (s, stats.mw1, stats.mw2, 1, 0)):
        if not cnt:
            continue
        beta = sig[obs, mis] / sig[obs, obs]
        resid = sig[mis, mis] - sig[obs, mis] * beta
        alpha = mu[mis] - beta * mu[obs]          # E[X_mis | x_obs] = alpha + beta x_obs
        S1[obs] += cnt * m1
        S1[mis] += cnt * (alpha + beta * m1)
        S2[obs, obs] += cnt * m2
        cross = cnt * (alpha * m1 + beta * m2)
        S2[obs, mis] += cross
        S2[mis, obs] += cross
        S2[mis, mis] += cnt * (alpha * alpha + 2 * alpha * beta * m1 + beta * beta * m2 + resid)
    mu_new = S1 / N
    sig_new = S2 / N - np.outer(mu_new, mu_new)
    return mu_new, sig_new


def em_gaussian(stats: SuffStats, init: Optional[GaussianParams] = None, em_tol: float = EM_TOL,
                max_iter: int = MAX_ITER) -> EMTrace:
    """EM for the bivariate normal with one coordinate missing in two blocks.

    Stops once both the relative parameter change and the per-observation
    score norm fall below ``em_tol``.
    """
    params = default_gaussian_init(stats) if init is None else init
    if not params.is_relevant():
        raise DomainError("EM must start at a positive definite concentration matrix")
    N = stats.total
    mu = np.array([params.mu1, params.mu2])
    s11, s12, s22 = params.sigma
    sig = np.array([[s11, s12], [s12, s22]])
    trace = EMTrace([(params, loglik(stats, params))])
    for it in range(1, max_iter + 1):
        mu_new, sig_new = _gaussian_step(stats, mu, sig)
        if not (sig_new[0, 0] > 0 and np.linalg.det(sig_new) > 0):
            raise DegeneracyError("M-step covariance is not positive definite")
        old = np.r_[mu, sig[0, 0], sig[0, 1], sig[1, 1]]
        new = np.r_[mu_new, sig_new[0, 0], sig_new[0, 1], sig_new[1, 1]]
        mu, sig = mu_new, sig_new
        params = GaussianParams.from_sigma(mu[0], mu[1], sig[0, 0], sig[0, 1], sig[1, 1])
        trace.iterates.append((params, loglik(stats, params)))
        change = float(np.max(np.abs(new - old)) / (1.0 + np.max(np.abs(new))))
        trace.residual = float(np.linalg.norm(score(stats, params).as_array())) / N
        trace.iterations = it
        if change < em_tol and trace.residual < em_tol:
            trace.converged = True
            break
    return trace


# -- multinomial ------------------------------------------------------------------

def kkt_residual(table: CountTable, p: np.ndarray) -> float:
    """Relative KKT violation of ``p`` for the likelihood on the closed simplex.

    With ``g = grad / N - 1`` (zero at an interior optimum by Euler's
    identity) the residual is the larger of the dual infeasibility
    ``max(g, 0)`` and the scaled complementarity ``p |g| / max p``; the
    latter is the fixed-point defect of the EM update ``p <- p (1 + g)``.
    """
    p = np.asarray(p, dtype=float)
    g = discrete_gradient(table, p) / table.total - 1.0
    comp = np.abs(p * g) / np.max(np.abs(p))
    return float(max(np.max(np.maximum(g, 0.0)), np.max(comp)))


def em_multinomial(table: CountTable, init: Optional[ProbTable] = None, em_tol: float = EM_TOL,
                   max_iter: int = MAX_ITER) -> EMTrace:
    """EM by proportional allocation of the supplemental row and column counts."""
    m, n = table.shape
    p = np.full((m, n), 1.0 / (m * n)) if init is None else np.array(init.p, dtype=float)
    if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
        raise DomainError("initial table must be strictly positive and sum to one")
    total = table.total
    trace = EMTrace([(ProbTable(p), discrete_loglik(table, p))])
    for it in range(1, max_iter + 1):
        rows, cols = p.sum(axis=1), p.sum(axis=0)
        tiny = np.finfo(float).tiny
        if np.any((rows < tiny) & (table.rvec > 0)) or np.any((cols < tiny) & (table.svec > 0)):
            raise DegeneracyError("a margin needed for allocation vanished")
        with np.errstate(divide="ignore", invalid="ignore"):
            alloc = table.t + np.nan_to_num(table.rvec[:, None] * p / rows[:, None]) \
                + np.nan_to_num(table.svec[None, :] * p / cols[None, :])
        p = alloc / total
        trace.iterates.append((ProbTable(p), discrete_loglik(table, p)))
        trace.iterations = it
        with np.errstate(divide="ignore", invalid="ignore"):
            trace.residual = kkt_residual(table, p)
        if trace.residual < em_tol:
            trace.converged = True
            break
    return trace
