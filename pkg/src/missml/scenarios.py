"""Seeded data-generation regimes and the real-root-count experiment runner.

Every trial draws from its own stream ``SeedSequence([master_seed, trial])``
so results do not depend on trial order or on the number of workers.

Regimes
-------
``mcar``          Gaussian (or uniform) sample, each cell censored with a fixed probability.
``mar``           per row, a mixture of MCAR censoring and "X2 missing when X1 < -1".
``nmar``          strongly negatively correlated Gaussian, ``X_i`` missing when ``X_i < -1``.
``wild``          complete rows and X1-only rows from one centred Gaussian, X2-only rows
                  uniform on ``[5, 6]``.
``random_stats``  the twelve statistics drawn directly, with no underlying sample.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Union

import numpy as np

from .critical_system import build
from .errors import DegeneracyError, SolverError
from .homotopy import SolveReport, SolverOptions, solve_parameter_homotopy, solve_total_degree
from .model import Dataset, GaussianParams, SuffStats, reduce

log = logging.getLogger(__name__)

KINDS = ("mcar", "mar", "nmar", "wild", "random_stats")
REAL_COUNTS = (1, 3, 5, 7, 9)
MAX_REDRAWS = 50
ANCHOR_SEED = 20240601


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    samples_per_trial: int = 100
    trials: int = 200
    master_seed: int = 0
    mixture_weight: float = 0.5
    base_params: Union[GaussianParams, str] = "random"
    censor_prob: float = 0.2
    mar_threshold: float = -1.0
    nmar_correlation: float = -0.8
    distribution: str = "gaussian"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.kind != "random_stats" and self.samples_per_trial < 4:
            raise ValueError("samples_per_trial must be at least 4")
        if not 0.0 <= self.mixture_weight <= 1.0 or not 0.0 <= self.censor_prob <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if self.distribution not in ("gaussian", "uniform"):
            raise ValueError("distribution must be 'gaussian' or 'uniform'")
        if not (self.base_params == "random" or isinstance(self.base_params, GaussianParams)):
            raise ValueError("base_params must be GaussianParams or 'random'")
        if not -1.0 < self.nmar_correlation < 1.0:
            raise ValueError("nmar_correlation must lie in (-1, 1)")

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.base_params, GaussianParams):
            d["base_params"] = self.base_params.to_dict()
        return d


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial_index)]))


def random_gaussian(rng: np.random.Generator):
    """Mean uniform on ``[-2, 2]^2``; covariance ``A A^T + 0.1 I`` with ``A`` uniform on ``[-1, 1]``."""
    mu = rng.uniform(-2.0, 2.0, size=2)
    A = rng.uniform(-1.0, 1.0, size=(2, 2))
    return mu, A @ A.T + 0.1 * np.eye(2)


def _base(spec: ScenarioSpec, rng: np.random.Generator):
    if spec.base_params == "random":
        return random_gaussian(rng)
    p = spec.base_params
    s11, s12, s22 = p.sigma
    return np.array([p.mu1, p.mu2]), np.array([[s11, s12], [s12, s22]])


def _gaussian_sample(rng, mu, sigma, size):
    return mu + rng.standard_normal((size, 2)) @ np.linalg.cholesky(sigma).T


def _split(X: np.ndarray, miss: np.ndarray) -> Dataset:
    """Rows with both entries missing are dropped."""
    m1, m2 = miss[:, 0], miss[:, 1]
    return Dataset(X[~m1 & ~m2], X[~m1 & m2, 0], X[m1 & ~m2, 1])


def _mixture_mask(rng, X, spec: ScenarioSpec, weight: float) -> np.ndarray:
    """Per row: with probability ``weight`` hide X2 when X1 is below the threshold,
    otherwise censor each cell independently.  Draws are identical for every weight."""
    k = len(X)
    pick = rng.random(k)
    cells = rng.random((k, 2)) < spec.censor_prob
    threshold = np.column_stack([np.zeros(k, bool), X[:, 0] < spec.mar_threshold])
    return np.where((pick < weight)[:, None], threshold, cells)


def _draw_dataset(spec: ScenarioSpec, rng: np.random.Generator) -> Dataset:
    k = spec.samples_per_trial
    if spec.kind in ("mcar", "mar"):
        if spec.distribution == "uniform":
            X = rng.uniform(-1.0, 1.0, size=(k, 2))
        else:
            mu, sigma = _base(spec, rng)
            X = _gaussian_sample(rng, mu, sigma, k)
        weight = spec.mixture_weight if spec.kind == "mar" else 0.0
        return _split(X, _mixture_mask(rng, X, spec, weight))
    if spec.kind == "nmar":
        rho = spec.nmar_correlation
        if spec.base_params == "random":
            mu = rng.uniform(-1.0, 1.0, size=2)
        else:
            mu = np.array([spec.base_params.mu1, spec.base_params.mu2])
        X = _gaussian_sample(rng, mu, np.array([[1.0, rho], [rho, 1.0]]), k)
        return _split(X, X < spec.mar_threshold)
    if spec.kind == "wild":
        _, sigma = _base(spec, rng)
        X = _gaussian_sample(rng, np.zeros(2), sigma, k)
        miss = rng.random((k, 2)) < spec.censor_prob
        ds = _split(X, miss)
        w = rng.uniform(5.0, 6.0, size=len(ds.w))
        return Dataset(ds.y, ds.z, w)
    raise ValueError(spec.kind)


def random_stats(rng: np.random.Generator) -> SuffStats:
    """Statistics drawn directly: integer counts in [10, 100], first moments in [-3, 3],
    second moments equal to the squared first moment plus a uniform(0.1, 4) excess."""
    n, r, s = (int(v) for v in rng.integers(10, 101, size=3))
    my1, my2, mz1, mw1 = rng.uniform(-3.0, 3.0, size=4)
    ex = rng.uniform(0.1, 4.0, size=4)
    my11, my22, mz2, mw2 = my1**2 + ex[0], my2**2 + ex[1], mz1**2 + ex[2], mw1**2 + ex[3]
    my12 = my1 * my2 + rng.uniform(-1.0, 1.0) * np.sqrt(ex[0] * ex[1])
    return SuffStats(n, r, s, my1, my2, my11, my12, my22, mz1, mz2, mw1, mw2)


def random_integer_stats(rng: np.random.Generator) -> SuffStats:
    """Statistics of a random integer-valued sample (generic, exactly representable)."""
    while True:
        n, r, s = (int(v) for v in rng.integers(5, 40, size=3))
        y = rng.integers(-9, 10, size=(n, 2)).astype(float)
        z = rng.integers(-9, 10, size=r).astype(float)
        w = rng.integers(-9, 10, size=s).astype(float)
        st = reduce(Dataset(y, z, w))
        if _usable(st) and st.r and st.s:
            return st


def _usable(st: SuffStats) -> bool:
    """At least three complete cases with a nondegenerate sample covariance."""
    if st.n < 3:
        return False
    v1, v2 = st.my11 - st.my1**2, st.my22 - st.my2**2
    cov = st.my12 - st.my1 * st.my2
    return v1 * v2 - cov * cov > 1e-9 * max(1.0, v1 * v2)


def generate(spec: ScenarioSpec, trial_index: int) -> SuffStats:
    """Statistics of trial ``trial_index``; degenerate draws are redrawn from the same stream."""
    rng = trial_rng(spec.master_seed, trial_index)
    if spec.kind == "random_stats":
        return random_stats(rng)
    for _ in range(MAX_REDRAWS):
        st = reduce(_draw_dataset(spec, rng))
        if _usable(st):
            return st
    raise DegeneracyError(f"trial {trial_index}: no usable sample after {MAX_REDRAWS} draws")


# -- runner --------------------------------------------------------------------------

@dataclass
class TrialRecord:
    trial: int
    n_complex: int = 0
    n_real: int = 0
    n_relevant: int = 0
    n_relevant_max: int = 0
    method: str = ""
    error: str = ""


@dataclass
class Histogram:
    spec: ScenarioSpec
    records: List[TrialRecord] = field(default_factory=list)

    @property
    def ok_records(self) -> List[TrialRecord]:
        return [r for r in self.records if not r.error]

    @property
    def errors(self) -> int:
        return len(self.records) - len(self.ok_records)

    def counts(self) -> Dict[int, int]:
        c = Counter(r.n_real for r in self.ok_records)
        out = {k: c.get(k, 0) for k in REAL_COUNTS}
        out.update({k: v for k, v in c.items() if k not in out})
        return out

    def frequency(self, n_real: int) -> float:
        ok = self.ok_records
        return sum(r.n_real == n_real for r in ok) / len(ok) if ok else 0.0

    def profile(self, n_real: int) -> Dict[str, int]:
        """How often each ``(n_relevant, n_relevant_max)`` pair occurs among trials with ``n_real`` roots."""
        c = Counter(f"{r.n_relevant}/{r.n_relevant_max}" for r in self.ok_records if r.n_real == n_real)
        return dict(sorted(c.items()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "n_complex", "n_real", "n_relevant", "n_relevant_max", "method", "error"])
        for r in sorted(self.records, key=lambda r: r.trial):
            w.writerow([r.trial, r.n_complex, r.n_real, r.n_relevant, r.n_relevant_max, r.method, r.error])
        return buf.getvalue()

    def to_dict(self) -> dict:
        counts = self.counts()
        return {
            "spec": self.spec.to_dict(),
            "trials": len(self.records),
            "errors": self.errors,
            "counts": {str(k): v for k, v in sorted(counts.items())},
            "profiles": {str(k): self.profile(k) for k in sorted(counts) if counts[k]},
            "min_relevant_max": min((r.n_relevant_max for r in self.ok_records), default=None),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_ANCHORS: Dict[tuple, SolveReport] = {}


def anchor(options: SolverOptions = SolverOptions()) -> SolveReport:
    """Fully solved generic instance used as the start of every parameter homotopy (cached per process)."""
    key = (options.formulation, options)
    if key not in _ANCHORS:
        rng = np.random.default_rng(ANCHOR_SEED)
        for _ in range(10):
            st = random_stats(rng)
            rep = solve_total_degree(build(st, options.formulation), rng.integers(2**63), options)
            if rep.n_complex == options.expected_roots and not rep.paths_failed:
                _ANCHORS[key] = rep
                break
        else:
            raise SolverError("could not solve an anchor instance")
    return _ANCHORS[key]


def run_trial(spec: ScenarioSpec, trial_index: int, options: SolverOptions = SolverOptions()) -> TrialRecord:
    rec = TrialRecord(trial_index)
    try:
        st = generate(spec, trial_index)
        seed = np.random.SeedSequence([int(spec.master_seed), int(trial_index), 1])
        rep = solve_parameter_homotopy(build(st, options.formulation), anchor(options), seed, options)
    except (SolverError, DegeneracyError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    rec.n_complex, rec.n_real = rep.n_complex, rep.n_real
    rec.n_relevant, rec.n_relevant_max = rep.n_relevant, rep.n_relevant_max
    rec.method = rep.method
    return rec


def _run_chunk(args):
    spec, indices, options = args
    return [run_trial(spec, k, options) for k in indices]


def run(spec: ScenarioSpec, jobs: int = 1, options: SolverOptions = SolverOptions()) -> Histogram:
    """Run every trial of ``spec``; ``jobs > 1`` spreads trials over processes."""
    jobs = max(1, int(jobs))
    indices = list(range(spec.trials))
    if jobs == 1:
        records = _run_chunk((spec, indices, options))
    else:
        from concurrent.futures import ProcessPoolExecutor
        chunks = [(spec, indices[j::jobs], options) for j in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = [r for part in pool.map(_run_chunk, chunks) for r in part]
    return Histogram(spec, sorted(records, key=lambda r: r.trial))
