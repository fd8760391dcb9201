"""All complex critical points by homotopy continuation.

Total-degree homotopy: start system ``x_i^{d_i} - c_i`` joined to the target
by ``(1-t)·γ·G + t·F`` with random complex ``c_i`` and ``γ``.  Parameter
homotopy: the cached roots of an anchor instance are carried to a new
instance along two straight coefficient segments through a random complex
midpoint in the same family.

Endpoints are Newton-polished, paths ending on the denominator locus
(``saturant``) or at infinity are discarded, and nearby endpoints are merged.
Surviving points are classified as real / statistically relevant
(Γ positive definite) / local maximum.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from . import _kernels
from .critical_system import PolySystem, build, build_full, residual, sums_vector, template_arrays
from .errors import SolverError
from .gaussian_likelihood import hessian
from .model import GaussianParams, SuffStats, is_relevant

log = logging.getLogger(__name__)

ML_DEGREE = 9


@dataclass(frozen=True)
class SolverOptions:
    formulation: str = "sigma"
    sat_tol: float = 1e-8
    real_tol: float = 1e-6
    cluster_tol: float = 1e-6
    degen_tol: float = 1e-7
    div_norm: float = 1e10
    min_step: float = 1e-14
    max_step: float = 0.1
    h0: float = 0.01
    newton_tol: float = 1e-9
    pred_tol: float = 1e-2
    max_steps: int = 20000
    endgame_zone: float = 1e-6
    retries: int = 2
    expected_roots: int = ML_DEGREE

    def tracker(self, strictness: int = 0) -> dict:
        f = 4.0 ** strictness
        return dict(h0=self.h0 / f, min_step=self.min_step, max_step=self.max_step / f,
                    newton_tol=self.newton_tol, pred_tol=self.pred_tol / f,
                    div_norm=self.div_norm, max_steps=int(self.max_steps * f), max_newton=3)


@dataclass
class CriticalPoint:
    coords: np.ndarray
    residual: float
    is_real: bool = False
    is_relevant: bool = False
    hessian_class: Optional[str] = None
    cluster_size: int = 1

    def params(self) -> GaussianParams:
        return GaussianParams.from_vector(self.coords.real)

    def to_dict(self) -> dict:
        return {
            "coords": [[float(z.real), float(z.imag)] for z in self.coords],
            "residual": float(self.residual),
            "is_real": bool(self.is_real),
            "is_relevant": bool(self.is_relevant),
            "hessian_class": self.hessian_class,
            "cluster_size": self.cluster_size,
        }


@dataclass
class SolveReport:
    points: List[CriticalPoint]
    paths_tracked: int = 0
    paths_converged: int = 0
    paths_failed: int = 0
    paths_diverged: int = 0
    paths_on_saturant: int = 0
    method: str = "total_degree"
    formulation: str = "sigma"
    warning: bool = False
    anomaly: bool = False
    stats: Optional[SuffStats] = field(default=None, repr=False)

    @property
    def n_complex(self) -> int:
        return len(self.points)

    @property
    def n_real(self) -> int:
        return int(sum(p.is_real for p in self.points))

    @property
    def n_relevant(self) -> int:
        return int(sum(p.is_relevant for p in self.points))

    @property
    def n_relevant_max(self) -> int:
        return int(sum(p.is_relevant and p.hessian_class == "max" for p in self.points))

    def relevant_maxima(self) -> List[CriticalPoint]:
        return [p for p in self.points if p.is_relevant and p.hessian_class == "max"]

    def to_dict(self) -> dict:
        return {
            "n_complex": self.n_complex,
            "n_real": self.n_real,
            "n_relevant": self.n_relevant,
            "n_relevant_max": self.n_relevant_max,
            "paths_tracked": self.paths_tracked,
            "paths_converged": self.paths_converged,
            "paths_failed": self.paths_failed,
            "paths_diverged": self.paths_diverged,
            "paths_on_saturant": self.paths_on_saturant,
            "method": self.method,
            "formulation": self.formulation,
            "warning": self.warning,
            "anomaly": self.anomaly,
            "points": [p.to_dict() for p in self.points],
        }


# -- classification -----------------------------------------------------------

def classify(point: CriticalPoint, stats: SuffStats, options: SolverOptions = SolverOptions()) -> CriticalPoint:
    """Fill realness, relevance and Hessian class of ``point``."""
    x = np.asarray(point.coords, dtype=complex)
    scale = 1.0 + np.linalg.norm(x)
    is_real = bool(np.max(np.abs(x.imag)) <= options.real_tol * scale)
    relevant = False
    hclass = None
    if is_real:
        mu1, mu2, g11, g12, g22 = x.real
        relevant = bool(is_relevant(g11, g12, g22))
        p = GaussianParams(mu1, mu2, g11, g12, g22)
        if g11 == 0 or g22 == 0 or p.det == 0:
            hclass = "degenerate"
        else:
            H = hessian(stats, p, chart=False)
            # symmetric diagonal scaling keeps the inertia but removes the
            # parameter-scale spread of the eigenvalues
            d = np.sqrt(np.abs(np.diag(H)))
            if np.all(d > 0):
                H = H / np.outer(d, d)
            ev = np.linalg.eigvalsh(H)
            tol = options.degen_tol * max(1.0, float(np.max(np.abs(ev))))
            if np.any(np.abs(ev) <= tol):
                hclass = "degenerate"
            elif np.all(ev < 0):
                hclass = "max"
            elif np.all(ev > 0):
                hclass = "min"
            else:
                hclass = "saddle"
    return replace(point, is_real=is_real, is_relevant=relevant, hessian_class=hclass)


# -- array plumbing -------------------------------------------------------------

def _poly_arrays(polys):
    exps, ptr, coeffs = [], [0], []
    for p in polys:
        e, c = p.arrays()
        exps.append(e)
        coeffs.append(c)
        ptr.append(ptr[-1] + len(c))
    return (np.ascontiguousarray(np.vstack(exps), dtype=np.int32), np.array(ptr, dtype=np.int32),
            np.ascontiguousarray(np.concatenate(coeffs)))


def _total_degree_homotopy(system: PolySystem, rng: np.random.Generator):
    """Projective total-degree homotopy on a random affine patch.

    Every equation is homogenised with an extra coordinate ``X0`` and a
    random linear patch ``l·X = 1`` is appended, so paths heading to infinity
    end at finite points with ``X0 -> 0`` instead of blowing up.  Variable 0
    of the returned arrays is ``X0``; affine points are ``X[1:] / X0``.
    """
    nv = system.nvars
    degs = system.degrees()
    cs = np.exp(2j * np.pi * rng.random(nv))
    gamma = np.exp(2j * np.pi * rng.random())
    patch = rng.standard_normal(nv + 1) + 1j * rng.standard_normal(nv + 1)
    exps, ptr, c0, c1 = [], [0], [], []
    for i, p in enumerate(system.polys):
        d = degs[i]
        terms = {(d - sum(e),) + tuple(e): complex(c) for e, c in p.terms.items()}
        scale = max(abs(c) for c in terms.values())
        lead = (0,) + tuple(d if k == i else 0 for k in range(nv))
        start = {lead: gamma, (d,) + (0,) * nv: -gamma * cs[i]}
        for e in sorted(set(terms) | set(start)):
            exps.append(e)
            c1.append(terms.get(e, 0) / scale)
            c0.append(start.get(e, 0))
        ptr.append(len(exps))
    for k in range(nv + 1):
        exps.append(tuple(1 if j == k else 0 for j in range(nv + 1)))
        c0.append(patch[k])
        c1.append(patch[k])
    exps.append((0,) * (nv + 1))
    c0.append(-1.0)
    c1.append(-1.0)
    ptr.append(len(exps))
    roots = [cs[i] ** (1.0 / degs[i]) * np.exp(2j * np.pi * np.arange(degs[i]) / degs[i]) for i in range(nv)]
    affine = np.array(list(itertools.product(*roots)), dtype=complex)
    hom = np.hstack([np.ones((len(affine), 1)), affine])
    starts = hom / (hom @ patch)[:, None]
    return (np.array(exps, dtype=np.int32), np.array(ptr, dtype=np.int32),
            np.array(c0, dtype=complex), np.array(c1, dtype=complex), starts)


def _affine_target(system: PolySystem):
    """Row-normalised affine target arrays used for endpoint polishing."""
    polys = [p.map_coeffs(lambda c, s=max(abs(complex(v)) for v in p.terms.values()): complex(c) / s)
             for p in system.polys]
    return _poly_arrays(polys)


# -- endpoint processing ----------------------------------------------------

_CONVERGED, _FAILED, _DIVERGED, _SATURANT = "converged", "failed", "diverged", "saturant"


def _endpoint(system, target, x, status, options):
    """Classify an affine path endpoint; returns ``(category, polished point or None)``."""
    if status == _kernels.DIVERGED:
        return _DIVERGED, None
    exps, ptr, coeffs = target
    y, step, _ = _kernels.newton_refine(exps, ptr, coeffs, x, 30, 1e-13)
    refined = (status == _kernels.OK and np.all(np.isfinite(y))
               and step <= 1e-9 * (1.0 + np.linalg.norm(y))
               and np.linalg.norm(y - x) <= 1e-6 * (1.0 + np.linalg.norm(x)))
    probe = y if refined else x
    if system.saturant_distance(probe) <= options.sat_tol:
        return _SATURANT, None
    if not refined:
        return _FAILED, None
    return _CONVERGED, y


def _projective_endpoint(system, target, X, status, t, options):
    """Classify an endpoint of the projective tracker.

    A path that reached ``t = 1`` and Newton-polishes in affine coordinates
    is a root (or lies on the saturant).  A path that stalled inside the
    endgame zone ends at a singular point, which is attributed to infinity
    or to the saturant, whichever it is closer to in relative terms.
    Anything else is a failure and gets re-tracked.
    """
    nrm = float(np.linalg.norm(X))
    if status == _kernels.DIVERGED or not np.all(np.isfinite(X)) or nrm == 0.0:
        return _FAILED, None
    rel_inf = abs(X[0]) / nrm
    if status == _kernels.OK and rel_inf > 1.0 / options.div_norm:
        x = X[1:] / X[0]
        cat, y = _endpoint(system, target, x, status, options)
        if cat != _FAILED:
            return cat, y
    elif status == _kernels.OK:
        return _DIVERGED, None
    if t < 1.0 - options.endgame_zone:
        return _FAILED, None
    if rel_inf == 0.0:
        return _DIVERGED, None
    with np.errstate(all="ignore"):
        rel_sat = system.saturant_distance(X[1:] / X[0])
    if not np.isfinite(rel_sat) or rel_inf <= rel_sat:
        return _DIVERGED, None
    return _SATURANT, None


def _polish_gamma(stats: SuffStats, X, full_arrays):
    exps, ptr, coeffs = full_arrays
    Y, step, _ = _kernels.newton_refine(exps, ptr, coeffs, X, 10, 1e-15)
    if np.all(np.isfinite(Y)) and np.linalg.norm(Y - X) <= 1e-6 * (1.0 + np.linalg.norm(X)):
        return Y
    return X


def _cluster(coords: List[np.ndarray], tol: float):
    groups: List[List[np.ndarray]] = []
    for x in coords:
        for g in groups:
            if np.linalg.norm(g[0] - x) <= tol * (1.0 + np.linalg.norm(x)):
                g.append(x)
                break
        else:
            groups.append([x])
    return groups


def _assemble(system: PolySystem, good: List[np.ndarray], counts: dict, options: SolverOptions,
              method: str) -> SolveReport:
    stats = system.stats
    full = build_full(stats)
    full_arrays = _poly_arrays(full.polys)
    gcoords = []
    for y in good:
        X = system.gamma_coords(y)
        if np.all(np.isfinite(X)):
            gcoords.append(_polish_gamma(stats, X, full_arrays))
    points = []
    for grp in _cluster(gcoords, options.cluster_tol):
        X = grp[0]
        pt = CriticalPoint(coords=X, residual=residual(stats, X, full), cluster_size=len(grp))
        points.append(classify(pt, stats, options))
    points.sort(key=lambda p: tuple(np.round(np.r_[p.coords.real, p.coords.imag], 8)))
    rep = SolveReport(points=points, method=method, formulation=system.formulation, stats=stats, **counts)
    rep.warning = rep.paths_failed > 0
    rep.anomaly = rep.n_complex != options.expected_roots
    return rep


def _run(system, starts, homotopy, target, options, strictness=0, projective=False):
    exps, ptr, c0, c1 = homotopy
    ends, t_end, status, _ = _kernels.track_paths(exps, ptr, c0, c1, np.ascontiguousarray(starts),
                                                  options.tracker(strictness))
    if projective:
        return [_projective_endpoint(system, target, ends[k], status[k], t_end[k], options)
                for k in range(len(starts))]
    return [_endpoint(system, target, ends[k], status[k], options) for k in range(len(starts))]


def _counts(results) -> dict:
    cats = [c for c, _ in results]
    return dict(paths_tracked=len(cats), paths_converged=cats.count(_CONVERGED),
                paths_failed=cats.count(_FAILED), paths_diverged=cats.count(_DIVERGED),
                paths_on_saturant=cats.count(_SATURANT))


def solve_total_degree(system: PolySystem, seed=None, options: SolverOptions = SolverOptions()) -> SolveReport:
    """Track all Bézout-many paths of a total-degree homotopy for ``system``.

    Paths that stop short of the endgame zone are re-tracked with smaller
    steps and a tighter predictor, up to ``options.retries`` times.
    """
    rng = np.random.default_rng(seed)
    exps, ptr, c0, c1, starts = _total_degree_homotopy(system, rng)
    homotopy = (exps, ptr, c0, c1)
    target = _affine_target(system)
    results = _run(system, starts, homotopy, target, options, projective=True)
    for attempt in range(1, options.retries + 1):
        failed = [k for k, (cat, _) in enumerate(results) if cat == _FAILED]
        if not failed:
            break
        redo = _run(system, starts[failed], homotopy, target, options, strictness=attempt, projective=True)
        for k, res in zip(failed, redo):
            results[k] = res
    good = [y for c, y in results if c == _CONVERGED]
    return _assemble(system, good, _counts(results), options, "total_degree")


def solve_parameter_homotopy(system: PolySystem, cached: SolveReport, seed=None,
                             options: SolverOptions = SolverOptions()) -> SolveReport:
    """Carry the roots of ``cached`` (an anchor of the same family) to ``system``.

    Falls back to :func:`solve_total_degree` when a path fails or the root
    count comes out wrong; raises :class:`SolverError` when the fallback still
    has failed paths.  A fallback with a different root count is returned with
    ``anomaly`` set (degenerate data such as a one-point block).
    """
    if system.formulation == "gamma_reduced":
        raise ValueError("parameter homotopy needs a formulation linear in the statistics")
    if cached.stats is None or cached.n_complex != options.expected_roots:
        raise ValueError("anchor report must carry its statistics and a full root set")
    rng = np.random.default_rng(seed)
    exps, ptr, basis = template_arrays(system.formulation)
    anchor_sys = build(cached.stats, system.formulation)
    qa = sums_vector(cached.stats)
    qt = sums_vector(system.stats)
    qa = qa / np.linalg.norm(qa)
    qt = qt / np.linalg.norm(qt)
    starts = np.array([anchor_sys.from_gamma_coords(p.coords) for p in cached.points])
    target = (exps, ptr, (basis @ qt).astype(complex))
    for attempt in range(options.retries + 1):
        spread = 0.5 * (np.abs(qa) + np.abs(qt)) + 1e-3
        qm = 0.5 * (qa + qt) + spread * (rng.standard_normal(12) + 1j * rng.standard_normal(12)) * 0.5
        cm = basis @ qm
        leg1 = (exps, ptr, (basis @ qa).astype(complex), cm)
        ends, _, st1, _ = _kernels.track_paths(*leg1, np.ascontiguousarray(starts), options.tracker(attempt))
        if np.any(st1 != _kernels.OK):
            continue
        leg2 = (exps, ptr, cm, target[2])
        results = _run(system, ends, leg2, target, options, strictness=attempt)
        cats = [c for c, _ in results]
        if all(c == _CONVERGED for c in cats):
            rep = _assemble(system, [y for _, y in results], _counts(results), options, "parameter")
            if rep.n_complex == options.expected_roots:
                return rep
        log.debug("parameter homotopy attempt %d failed: %s", attempt, cats)
    rep = solve_total_degree(system, rng.integers(2**63), options)
    rep.method = "total_degree_fallback"
    if rep.paths_failed:
        raise SolverError(f"fallback produced {rep.n_complex} roots with {rep.paths_failed} failed paths")
    return rep


def solve(stats: SuffStats, seed=None, options: SolverOptions = SolverOptions()) -> SolveReport:
    return solve_total_degree(build(stats, options.formulation), seed, options)
