"""Sparse multivariate polynomials used to assemble the score systems.

Coefficients may be any ring element supporting ``+``, ``-`` and ``*``
(``int``, ``fractions.Fraction``, ``complex``).  Construction is done with
exact rationals and converted to floating point once.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

Exponent = Tuple[int, ...]


class Poly:
    """Polynomial as a mapping ``exponent tuple -> coefficient``."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Dict[Exponent, object] | None = None):
        self.nvars = nvars
        self.terms: Dict[Exponent, object] = {}
        if terms:
            for e, c in terms.items():
                if c != 0:
                    self.terms[tuple(e)] = c

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v == 0:
                out.pop(e, None)
            else:
                out[e] = v
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            if other == 0:
                return Poly(self.nvars)
            return Poly(self.nvars, {e: c * other for e, c in self.terms.items()})
        out: Dict[Exponent, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"Poly({self.nvars}, {len(self.terms)} terms, deg {self.degree()})"

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, idx: Iterable[int]) -> int:
        idx = list(idx)
        return max((sum(e[i] for i in idx) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def leading(self):
        e = max(self.terms)
        return e, self.terms[e]

    def exact_div(self, other: "Poly") -> "Poly":
        """Quotient of an exact division (lex order); raises if not divisible."""
        q = Poly(self.nvars)
        rem = self
        le, lc = other.leading()
        while rem.terms:
            e, c = rem.leading()
            d = tuple(a - b for a, b in zip(e, le))
            if min(d) < 0:
                raise ArithmeticError("polynomial division is not exact")
            qc = Fraction(c) / lc if isinstance(c, int) and isinstance(lc, int) else c / lc
            t = Poly(self.nvars, {d: qc})
            q = q + t
            rem = rem - t * other
        return q

    def map_coeffs(self, f) -> "Poly":
        return Poly(self.nvars, {e: f(c) for e, c in self.terms.items()})

    def __call__(self, x: Sequence):
        total = 0
        for e, c in self.terms.items():
            m = c
            for xi, k in zip(x, e):
                if k:
                    m = m * xi**k
            total = total + m
        return total

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Compose: replace variable ``i`` by ``images[i]`` (all in a common ring)."""
        nv = images[0].nvars
        out = Poly(nv)
        cache: Dict[Tuple[int, int], Poly] = {}
        for e, c in self.terms.items():
            m = Poly.const(nv, c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in cache:
                        cache[key] = images[i] ** k
                    m = m * cache[key]
            out = out + m
        return out

    def arrays(self, dtype=complex) -> Tuple[np.ndarray, np.ndarray]:
        """Exponent matrix and coefficient vector (sorted for reproducibility)."""
        items = sorted(self.terms.items())
        if not items:
            return np.zeros((0, self.nvars), dtype=np.int32), np.zeros(0, dtype=dtype)
        exps = np.array([e for e, _ in items], dtype=np.int32)
        coeffs = np.array([complex(c) if dtype is complex else c for _, c in items], dtype=dtype)
        return exps, coeffs

    def to_json(self) -> list:
        out = []
        for e, c in sorted(self.terms.items()):
            z = complex(c)
            out.append({"exp": list(e), "coeff": [z.real, z.imag]})
        return out

    @classmethod
    def from_json(cls, nvars: int, data: list) -> "Poly":
        return cls(nvars, {tuple(t["exp"]): complex(*t["coeff"]) for t in data})


def exact(x) -> Fraction:
    """Exact rational for a finite float or int."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))
