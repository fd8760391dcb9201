"""Domain types for bivariate missing data and their JSON forms.

A bivariate sample splits into three blocks: complete pairs ``y``, values
observed only in the first coordinate ``z`` and values observed only in the
second coordinate ``w``.  Everything downstream works on the twelve
sufficient statistics of :class:`SuffStats`.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from .errors import DomainError

VARIANCE_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    y: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    z: np.ndarray = field(default_factory=lambda: np.zeros(0))
    w: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        y = _frozen(self.y).reshape(-1, 2)
        z = _frozen(self.z).reshape(-1)
        w = _frozen(self.w).reshape(-1)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)
        if len(y) + len(z) + len(w) < 1:
            raise DomainError("dataset must contain at least one observation")
        for block in (y, z, w):
            if not np.all(np.isfinite(block)):
                raise DomainError("dataset values must be finite")

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def r(self) -> int:
        return len(self.z)

    @property
    def s(self) -> int:
        return len(self.w)

    def to_dict(self) -> dict:
        return {"y": self.y.tolist(), "z": self.z.tolist(), "w": self.w.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        return cls(np.array(d.get("y", []), dtype=float).reshape(-1, 2), d.get("z", []), d.get("w", []))


@dataclass(frozen=True)
class SuffStats:
    """Block counts and block means of the transforms appearing in the likelihood.

    Counts are reals so that directly drawn statistics are representable.
    Moments of a block with count zero carry no meaning.
    """

    n: float
    r: float
    s: float
    my1: float = 0.0
    my2: float = 0.0
    my11: float = 0.0
    my12: float = 0.0
    my22: float = 0.0
    mz1: float = 0.0
    mz2: float = 0.0
    mw1: float = 0.0
    mw2: float = 0.0

    @property
    def total(self) -> float:
        return self.n + self.r + self.s

    def sums(self) -> tuple:
        """Block sums ``(n, r, s, Σy1, Σy2, Σy1², Σy1y2, Σy2², Σz, Σz², Σw, Σw²)``.

        The score equations are linear in this vector.
        """
        n, r, s = self.n, self.r, self.s
        return (n, r, s, n * self.my1, n * self.my2, n * self.my11, n * self.my12,
                n * self.my22, r * self.mz1, r * self.mz2, s * self.mw1, s * self.mw2)

    def swapped(self) -> "SuffStats":
        """Statistics of the data with the two coordinates exchanged."""
        return SuffStats(self.n, self.s, self.r, self.my2, self.my1, self.my22, self.my12,
                         self.my11, self.mw1, self.mw2, self.mz1, self.mz2)

    def variance_ok(self, tol: float = VARIANCE_TOL) -> bool:
        checks = []
        if self.n:
            checks += [self.my11 >= self.my1**2 - tol, self.my22 >= self.my2**2 - tol]
        if self.r:
            checks.append(self.mz2 >= self.mz1**2 - tol)
        if self.s:
            checks.append(self.mw2 >= self.mw1**2 - tol)
        return all(checks)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SuffStats":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise DomainError(f"unknown SuffStats fields: {sorted(unknown)}")
        vals = {k: float(v) for k, v in d.items()}
        for k in ("n", "r", "s"):
            if k not in vals:
                raise DomainError(f"SuffStats requires field {k!r}")
        st = cls(**vals)
        if min(st.n, st.r, st.s) < 0 or not all(math.isfinite(v) for v in vals.values()):
            raise DomainError("SuffStats counts must be nonnegative and all fields finite")
        return st


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else 0.0


def reduce(dataset: Dataset) -> SuffStats:
    """Sufficient statistics of ``dataset`` (compensated sums)."""
    y, z, w = dataset.y, dataset.z, dataset.w
    return SuffStats(
        n=dataset.n, r=dataset.r, s=dataset.s,
        my1=_mean(y[:, 0]), my2=_mean(y[:, 1]),
        my11=_mean(y[:, 0] * y[:, 0]), my12=_mean(y[:, 0] * y[:, 1]), my22=_mean(y[:, 1] * y[:, 1]),
        mz1=_mean(z), mz2=_mean(z * z),
        mw1=_mean(w), mw2=_mean(w * w),
    )


def _check_pd(a11: float, a12: float, a22: float, what: str) -> float:
    det = a11 * a22 - a12 * a12
    if not (a11 > 0 and det > 0):
        raise DomainError(f"{what} is not positive definite")
    return det


def gamma_from_sigma(s11: float, s12: float, s22: float) -> tuple:
    """Concentration matrix entries from covariance entries (2x2 adjugate)."""
    det = _check_pd(s11, s12, s22, "covariance matrix")
    return s22 / det, -s12 / det, s11 / det


def sigma_from_gamma(g11: float, g12: float, g22: float) -> tuple:
    det = _check_pd(g11, g12, g22, "concentration matrix")
    return g22 / det, -g12 / det, g11 / det


@dataclass(frozen=True)
class GaussianParams:
    mu1: float
    mu2: float
    g11: float
    g12: float
    g22: float

    @classmethod
    def from_sigma(cls, mu1, mu2, s11, s12, s22) -> "GaussianParams":
        return cls(mu1, mu2, *gamma_from_sigma(s11, s12, s22))

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "GaussianParams":
        return cls(*(float(v) for v in x))

    @property
    def det(self) -> float:
        return self.g11 * self.g22 - self.g12 ** 2

    @property
    def sigma(self) -> tuple:
        return sigma_from_gamma(self.g11, self.g12, self.g22)

    def vector(self) -> np.ndarray:
        return np.array([self.mu1, self.mu2, self.g11, self.g12, self.g22])

    def is_relevant(self) -> bool:
        return is_relevant(self.g11, self.g12, self.g22)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianParams":
        return cls(**{k: float(v) for k, v in d.items()})


def is_relevant(g11: float, g12: float, g22: float) -> bool:
    """Γ lies in the cone of positive definite 2x2 matrices."""
    return g11 > 0 and g11 * g22 - g12 * g12 > 0


@dataclass(frozen=True, eq=False)
class CountTable:
    t: np.ndarray
    rvec: np.ndarray
    svec: np.ndarray

    def __post_init__(self):
        t = _frozen(self.t)
        if t.ndim != 2 or min(t.shape) < 1:
            raise DomainError("count table must be a nonempty 2-d grid")
        rvec = _frozen(self.rvec).reshape(-1)
        svec = _frozen(self.svec).reshape(-1)
        if rvec.shape != (t.shape[0],) or svec.shape != (t.shape[1],):
            raise DomainError("margin vectors do not match the table shape")
        for a in (t, rvec, svec):
            if not np.all(np.isfinite(a)) or np.any(a < 0):
                raise DomainError("counts must be finite and nonnegative")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "rvec", rvec)
        object.__setattr__(self, "svec", svec)

    @property
    def shape(self) -> tuple:
        return self.t.shape

    @property
    def total(self) -> float:
        return float(self.t.sum() + self.rvec.sum() + self.svec.sum())

    def to_dict(self) -> dict:
        return {"t": self.t.tolist(), "rvec": self.rvec.tolist(), "svec": self.svec.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "CountTable":
        try:
            return cls(np.array(d["t"], dtype=float), d["rvec"], d["svec"])
        except KeyError as exc:
            raise DomainError(f"count table missing field {exc}") from None


@dataclass(frozen=True, eq=False)
class ProbTable:
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(self.p))

    @property
    def row_margins(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def col_margins(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def in_simplex(self, tol: float = 1e-10) -> bool:
        return bool(np.all(self.p >= -tol) and abs(self.p.sum() - 1.0) <= tol)

    def to_dict(self) -> dict:
        return {"p": self.p.tolist()}


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
