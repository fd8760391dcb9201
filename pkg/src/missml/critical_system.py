"""Polynomial forms of the Gaussian score equations.

Three formulations share one contract: off the zero set of ``saturant`` the
solutions of ``polys`` are exactly the critical points of the observed-data
log-likelihood, and ``polys(x) = multipliers(x) @ score(gamma_coords(x))``.

``gamma_full``
    variables ``(mu1, mu2, g11, g12, g22)``; each score component cleared by
    its denominator, degrees ``(3, 3, 6, 6, 6)`` (1944 start paths).
``sigma``
    variables ``(mu1, mu2, s11, s12, s22)`` with Σ = Γ⁻¹.  The μ-equations are
    premultiplied by Σ, which drops degrees to ``(2, 2, 4, 4, 4)``
    (256 start paths).  Default solving formulation.
``gamma_reduced``
    μ eliminated from ``gamma_full`` by solving its two linear equations
    with the adjugate; three equations in ``(g11, g12, g22)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from .model import SuffStats
from .polynomial import Exponent, Poly, exact

FORMULATIONS = ("sigma", "gamma_full", "gamma_reduced")
STAT_NAMES = ("n", "r", "s", "Sy1", "Sy2", "Sy11", "Sy12", "Sy22", "Sz1", "Sz2", "Sw1", "Sw2")
NX = 5


@dataclass
class PolySystem:
    formulation: str
    vars: Tuple[str, ...]
    polys: List[Poly]
    saturant: Poly
    multipliers: List[List[Poly]]
    stats: Optional[SuffStats] = None
    back_sub: Optional[Tuple[Poly, Poly, Poly]] = field(default=None, repr=False)
    saturant_factors: Tuple[Poly, ...] = field(default=(), repr=False)

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def degrees(self) -> Tuple[int, ...]:
        return tuple(p.degree() for p in self.polys)

    def bezout_number(self) -> int:
        return int(np.prod(self.degrees()))

    def evaluate(self, x) -> np.ndarray:
        return np.array([p(x) for p in self.polys], dtype=complex)

    def saturant_value(self, x) -> complex:
        return complex(self.saturant(x))

    def saturant_distance(self, x) -> float:
        """Scale-free closeness of ``x`` to the saturant locus (0 on the locus).

        Each factor is judged on its own: a single-variable factor by
        ``|x_i| / (1 + |x|)``, any other factor by the cancellation ratio
        ``|f(x)| / sum_e |c_e x^e|``.  The smallest value is returned.
        """
        x = np.asarray(x, dtype=complex)
        ax = np.abs(x)
        scale = 1.0 + float(np.linalg.norm(x))
        best = np.inf
        for f in self.saturant_factors or (self.saturant,):
            if len(f.terms) == 1:
                (e, _), = f.terms.items()
                val = min((ax[i] / scale for i, k in enumerate(e) if k), default=1.0)
            else:
                mags = sum(abs(complex(c)) * float(np.prod(ax ** np.array(e))) for e, c in f.terms.items())
                val = abs(complex(f(x))) / mags if mags > 0 else 0.0
            best = min(best, float(val))
        return best

    def gamma_coords(self, x) -> np.ndarray:
        """Map a point of this system to ``(mu1, mu2, g11, g12, g22)``."""
        x = np.asarray(x, dtype=complex)
        if self.formulation == "gamma_full":
            return x.copy()
        if self.formulation == "sigma":
            mu1, mu2, a, c, b = x
            det = a * b - c * c
            return np.array([mu1, mu2, b / det, -c / det, a / det])
        p1, p2, delta = self.back_sub
        d = delta(x)
        return np.array([p1(x) / d, p2(x) / d, x[0], x[1], x[2]])

    def from_gamma_coords(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if self.formulation == "gamma_full":
            return X.copy()
        if self.formulation == "sigma":
            mu1, mu2, g11, g12, g22 = X
            det = g11 * g22 - g12 * g12
            return np.array([mu1, mu2, g22 / det, -g12 / det, g11 / det])
        return X[2:].copy()

    def multiplier_matrix(self, x) -> np.ndarray:
        return np.array([[m(x) for m in row] for row in self.multipliers], dtype=complex)

    def to_json(self) -> dict:
        return {
            "formulation": self.formulation,
            "vars": list(self.vars),
            "polys": [p.to_json() for p in self.polys],
            "saturant": self.saturant.to_json(),
            "saturant_factors": [f.to_json() for f in self.saturant_factors],
            "degrees": list(self.degrees()),
        }

    @classmethod
    def from_json(cls, d: dict) -> "PolySystem":
        nv = len(d["vars"])
        polys = [Poly.from_json(nv, p) for p in d["polys"]]
        factors = tuple(Poly.from_json(nv, f) for f in d.get("saturant_factors", []))
        return cls(d["formulation"], tuple(d["vars"]), polys, Poly.from_json(nv, d["saturant"]), [],
                   saturant_factors=factors)


# -- symbolic templates (polynomial in x, linear in the block sums) ---------

def _sym(formulation: str):
    """Equations, saturant and multipliers over variables ``x (5) + sums (12)``."""
    nv = NX + len(STAT_NAMES)
    X = [Poly.var(nv, i) for i in range(NX)]
    n, r, s, Sy1, Sy2, Sy11, Sy12, Sy22, Sz1, Sz2, Sw1, Sw2 = [Poly.var(nv, NX + k) for k in range(12)]
    N = n + r + s
    mu1, mu2 = X[0], X[1]
    # block sums of squared deviations about mu
    nA = Sy11 - 2 * mu1 * Sy1 + n * mu1 * mu1
    nB = Sy12 - mu2 * Sy1 - mu1 * Sy2 + n * mu1 * mu2
    nC = Sy22 - 2 * mu2 * Sy2 + n * mu2 * mu2
    rZ = Sz2 - 2 * mu1 * Sz1 + r * mu1 * mu1
    sW = Sw2 - 2 * mu2 * Sw1 + s * mu2 * mu2
    zero = Poly(nv)
    if formulation == "gamma_full":
        g11, g12, g22 = X[2], X[3], X[4]
        D = g11 * g22 - g12 * g12
        eqs = [
            g22 * g11 * (Sy1 - n * mu1) + g22 * g12 * (Sy2 - n * mu2) + D * (Sz1 - r * mu1),
            g11 * g22 * (Sy2 - n * mu2) + g11 * g12 * (Sy1 - n * mu1) + D * (Sw1 - s * mu2),
            N * g22 * g11 * g11 - s * D * g11 - D * g11 * g11 * (nA + rZ) - g12 * g12 * D * sW,
            -N * g12 * g11 * g22 - nB * D * g11 * g22 + rZ * g12 * g11 * D + sW * g12 * g22 * D,
            N * g11 * g22 * g22 - r * D * g22 - D * g22 * g22 * (nC + sW) - g12 * g12 * D * rZ,
        ]
        sat = (g11, g22, D)
        diag = [g22, g11, 2 * D * g11 * g11, D * g11 * g22, 2 * D * g22 * g22]
        mult = [[diag[i] if i == j else zero for j in range(5)] for i in range(5)]
    elif formulation == "sigma":
        a, c, b = X[2], X[3], X[4]
        eqs = [
            b * (Sy1 - n * mu1) + b * (Sz1 - r * mu1) + c * (Sw1 - s * mu2),
            a * (Sy2 - n * mu2) + c * (Sz1 - r * mu1) + a * (Sw1 - s * mu2),
            b * b * (n * a - nA) + b * b * (r * a - rZ) + c * c * (s * b - sW),
            a * b * (n * c - nB) + b * c * (r * a - rZ) + a * c * (s * b - sW),
            a * a * (n * b - nC) + a * a * (s * b - sW) + c * c * (r * a - rZ),
        ]
        sat = (a, b, a * b - c * c)
        mult = [[b * a, b * c, zero, zero, zero],
                [a * c, a * b, zero, zero, zero],
                [zero, zero, 2 * b * b, zero, zero],
                [zero, zero, zero, a * b, zero],
                [zero, zero, zero, zero, 2 * a * a]]
    else:
        raise ValueError(f"no linear template for formulation {formulation!r}")
    return eqs, sat, mult


def _split(p: Poly):
    """Map x-exponent -> integer vector over the 12 sums (p is linear in sums)."""
    out: Dict[Exponent, List[int]] = {}
    for e, c in p.terms.items():
        ex, eq = e[:NX], e[NX:]
        vec = out.setdefault(ex, [0] * 12)
        if sum(eq) == 1:
            vec[eq.index(1)] += c
        elif sum(eq) == 0:
            raise AssertionError("template term without a statistic")
        else:
            raise AssertionError("template is not linear in the statistics")
    return out


def _strip(p: Poly) -> Poly:
    return Poly(NX, {e[:NX]: c for e, c in p.terms.items()})


@lru_cache(maxsize=None)
def template(formulation: str):
    eqs, sat, mult = _sym(formulation)
    return ([_split(e) for e in eqs], tuple(_strip(f) for f in sat), [[_strip(m) for m in row] for row in mult])


def _instantiate(tpl: Dict[Exponent, List[int]], q: Tuple[Fraction, ...]) -> Poly:
    terms = {}
    for ex, vec in tpl.items():
        c = sum((k * qi for k, qi in zip(vec, q) if k), Fraction(0))
        terms[ex] = c
    return Poly(NX, terms)


def _sums(stats: SuffStats) -> Tuple[Fraction, ...]:
    st = [exact(v) for v in (stats.n, stats.r, stats.s, stats.my1, stats.my2, stats.my11, stats.my12,
                             stats.my22, stats.mz1, stats.mz2, stats.mw1, stats.mw2)]
    n, r, s = st[:3]
    return (n, r, s, n * st[3], n * st[4], n * st[5], n * st[6], n * st[7],
            r * st[8], r * st[9], s * st[10], s * st[11])


def build(stats: SuffStats, formulation: str = "sigma") -> PolySystem:
    if formulation == "gamma_reduced":
        return eliminate_mu(build_full(stats))
    tpl, sat, mult = template(formulation)
    q = _sums(stats)
    polys = [_instantiate(t, q) for t in tpl]
    names = ("mu1", "mu2", "g11", "g12", "g22") if formulation == "gamma_full" else \
        ("mu1", "mu2", "s11", "s12", "s22")
    return PolySystem(formulation, names, polys, _product(sat), mult, stats, saturant_factors=sat)


def build_full(stats: SuffStats) -> PolySystem:
    """Cleared score equations in ``(mu, Γ)``; multipliers are diagonal."""
    return build(stats, "gamma_full")


def build_sigma(stats: SuffStats) -> PolySystem:
    return build(stats, "sigma")


def _product(factors) -> Poly:
    out = factors[0]
    for f in factors[1:]:
        out = out * f
    return out


def _mu_parts(p: Poly, nv_out: int):
    """Split p(mu1, mu2, g) into {(i, j): coefficient poly in g}."""
    parts: Dict[Tuple[int, int], Poly] = {}
    for e, c in p.terms.items():
        key = (e[0], e[1])
        parts[key] = parts.get(key, Poly(nv_out)) + Poly(nv_out, {e[2:]: c})
    return parts


def eliminate_mu(system: PolySystem) -> PolySystem:
    """Substitute the adjugate solution μ(Γ) of the two μ-equations.

    The first two cleared equations are linear in μ: ``M(Γ) μ = b(Γ)``.
    With ``Δ = det M`` the back-substitution is ``μ = adj(M) b / Δ``;
    the three remaining equations (quadratic in μ) are multiplied by ``Δ²``.
    """
    if system.formulation != "gamma_full":
        raise ValueError("eliminate_mu expects the gamma_full formulation")
    nv = 3
    lin = []
    for p in system.polys[:2]:
        parts = _mu_parts(p, nv)
        zero = Poly(nv)
        lin.append((-parts.get((1, 0), zero), -parts.get((0, 1), zero), parts.get((0, 0), zero)))
    (m11, m12, b1), (m21, m22, b2) = lin
    g = [Poly.var(nv, i) for i in range(3)]
    D = g[0] * g[2] - g[1] * g[1]
    # adjugate numerators and determinant share the factor det Γ; cancel it
    delta = (m11 * m22 - m12 * m21).exact_div(D)
    p1 = (m22 * b1 - m12 * b2).exact_div(D)
    p2 = (m11 * b2 - m21 * b1).exact_div(D)
    dpow = [Poly.const(nv, 1), delta, delta * delta]
    polys = []
    for p in system.polys[2:]:
        out = Poly(nv)
        for (i, j), coef in _mu_parts(p, nv).items():
            out = out + coef * (p1 ** i) * (p2 ** j) * dpow[2 - i - j]
        polys.append(out)
    sat = (g[0], g[2], D, delta)
    d2 = delta * delta
    zero = Poly(nv)
    diag = [2 * D * g[0] * g[0] * d2, D * g[0] * g[2] * d2, 2 * D * g[2] * g[2] * d2]
    mult = [[zero, zero] + [diag[i] if i == j else zero for j in range(3)] for i in range(3)]
    return PolySystem("gamma_reduced", ("g11", "g12", "g22"), polys, _product(sat), mult, system.stats,
                      back_sub=(p1, p2, delta), saturant_factors=sat)


def residual(stats: SuffStats, X, full: Optional[PolySystem] = None) -> float:
    """Scaled residual of the cleared ``gamma_full`` equations at ``(mu, Γ)``.

    Each equation value is divided by the sum of absolute term magnitudes,
    so the result is a relative cancellation measure.
    """
    full = full or build_full(stats)
    X = np.asarray(X, dtype=complex)
    worst = 0.0
    for p in full.polys:
        exps, coeffs = p.arrays()
        terms = coeffs * np.prod(X[None, :] ** exps, axis=1)
        scale = float(np.sum(np.abs(terms)))
        val = abs(complex(np.sum(terms)))
        worst = max(worst, val / scale if scale else val)
    return worst


@lru_cache(maxsize=None)
def template_arrays(formulation: str):
    """Fixed support ``(exps, eq_ptr)`` and integer basis ``B`` with coefficients ``B @ sums``."""
    tpl, _, _ = template(formulation)
    exps, ptr, rows = [], [0], []
    for t in tpl:
        for ex in sorted(t):
            exps.append(ex)
            rows.append(t[ex])
        ptr.append(len(exps))
    exps = np.array(exps, dtype=np.int32)
    exps.setflags(write=False)
    basis = np.array(rows, dtype=float)
    basis.setflags(write=False)
    return exps, np.array(ptr, dtype=np.int32), basis


def sums_vector(stats: SuffStats) -> np.ndarray:
    return np.array([float(v) for v in _sums(stats)])
