"""Pure-Python twin of the compiled kernels (same algorithm, same status codes)."""
from __future__ import annotations

import numpy as np

OK, DIVERGED, MINSTEP, MAXSTEPS = 0, 1, 2, 3

_DEFAULTS = dict(h0=0.01, min_step=1e-14, max_step=0.1, newton_tol=1e-9, pred_tol=1e-3,
                 div_norm=1e10, max_steps=20000, max_newton=3)


class _System:
    def __init__(self, exps, ptr, c0, c1):
        self.exps = np.asarray(exps, dtype=np.int64)
        self.ptr = np.asarray(ptr)
        self.nv = self.exps.shape[1]
        if len(self.ptr) - 1 != self.nv:
            raise ValueError("system must be square")
        self.c0 = np.asarray(c0, dtype=complex)
        self.c1 = np.asarray(c1, dtype=complex)
        self.eq_of_term = np.repeat(np.arange(self.nv), np.diff(self.ptr))
        self.maxdeg = int(self.exps.max()) if len(self.exps) else 0

    def eval(self, x, t, want_t=True):
        nv = self.nv
        pw = np.ones((nv, self.maxdeg + 1), dtype=complex)
        for e in range(1, self.maxdeg + 1):
            pw[:, e] = pw[:, e - 1] * x
        factors = pw[np.arange(nv)[None, :], self.exps]          # terms x nv
        mono = np.prod(factors, axis=1)
        c = (1.0 - t) * self.c0 + t * self.c1
        H = np.bincount(self.eq_of_term, weights=(c * mono).real, minlength=nv) + \
            1j * np.bincount(self.eq_of_term, weights=(c * mono).imag, minlength=nv)
        # derivative of each monomial w.r.t. each variable
        dpw = np.zeros_like(pw)
        dpw[:, 1:] = pw[:, :-1] * np.arange(1, self.maxdeg + 1)
        J = np.zeros((nv, nv), dtype=complex)
        for v in range(nv):
            f = factors.copy()
            f[:, v] = dpw[v, self.exps[:, v]]
            dm = np.prod(f, axis=1) * c
            J[:, v] = np.bincount(self.eq_of_term, weights=dm.real, minlength=nv) + \
                1j * np.bincount(self.eq_of_term, weights=dm.imag, minlength=nv)
        Ht = None
        if want_t:
            d = (self.c1 - self.c0) * mono
            Ht = np.bincount(self.eq_of_term, weights=d.real, minlength=nv) + \
                1j * np.bincount(self.eq_of_term, weights=d.imag, minlength=nv)
        return H, J, Ht


def _solve(A, b):
    try:
        out = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(out)):
        return None
    return out


def _tangent(S, x, t):
    _, J, Ht = S.eval(x, t)
    return _solve(J, -Ht)


def _newton(S, x, t, o):
    prev = np.inf
    for it in range(o["max_newton"]):
        H, J, _ = S.eval(x, t, want_t=False)
        d = _solve(J, -H)
        if d is None:
            return x, False
        nd = np.linalg.norm(d)
        x = x + d
        if nd <= o["newton_tol"] * (1.0 + np.linalg.norm(x)):
            return x, True
        if it > 0 and nd > 0.5 * prev:
            return x, False
        prev = nd
    return x, False


def _track(S, x, o):
    t, h, steps, good = 0.0, o["h0"], 0, 0
    status = OK
    while t < 1.0:
        if steps >= o["max_steps"]:
            status = MAXSTEPS
            break
        steps += 1
        h = min(h, 1.0 - t)
        scale = 1.0 + np.linalg.norm(x)
        ok = False
        k1 = _tangent(S, x, t)
        if k1 is not None:
            xe = x + h * k1
            k2 = _tangent(S, xe, t + h)
            if k2 is not None:
                xp = x + 0.5 * h * (k1 + k2)
                if np.linalg.norm(xp - xe) / scale <= o["pred_tol"]:
                    xp, ok = _newton(S, xp, t + h, o)
                    ok = ok and np.linalg.norm(xp - x) <= 0.5 * scale
        if ok:
            x = xp
            t = t + h
            good += 1
            if good >= 3:
                h = min(2.0 * h, o["max_step"])
                good = 0
            if np.linalg.norm(x) > o["div_norm"]:
                status = DIVERGED
                break
        else:
            good = 0
            h *= 0.5
            if h < o["min_step"]:
                status = MINSTEP
                break
    return x, t, status, steps


def track_paths(exps, ptr, c0, c1, starts, options):
    S = _System(exps, ptr, c0, c1)
    o = {**_DEFAULTS, **options}
    starts = np.asarray(starts, dtype=complex)
    ends = starts.copy()
    t_end = np.zeros(len(starts))
    status = np.zeros(len(starts), dtype=np.int32)
    steps = np.zeros(len(starts), dtype=np.int32)
    for p in range(len(starts)):
        ends[p], t_end[p], status[p], steps[p] = _track(S, starts[p].copy(), o)
    return ends, t_end, status, steps


def newton_refine(exps, ptr, coeffs, x0, max_iter=20, tol=1e-14):
    S = _System(exps, ptr, coeffs, coeffs)
    x = np.array(x0, dtype=complex)
    nd = np.inf
    for it in range(max_iter):
        H, J, _ = S.eval(x, 1.0, want_t=False)
        d = _solve(J, -H)
        if d is None:
            return x, np.inf, it
        nd = float(np.linalg.norm(d))
        x = x + d
        if nd <= tol * (1.0 + np.linalg.norm(x)):
            return x, nd, it + 1
    return x, nd, max_iter


def evaluate(exps, ptr, c0, c1, x, t):
    return _System(exps, ptr, c0, c1).eval(np.asarray(x, dtype=complex), t)


def count_lonesum_range(m, n, lo, hi, require_positive_margins):
    rowmask = (1 << n) - 1
    count = 0
    for mask in range(lo, hi):
        rows = [(mask >> (i * n)) & rowmask for i in range(m)]
        bad = any((rows[i] & ~rows[k]) and (rows[k] & ~rows[i])
                  for i in range(m) for k in range(i + 1, m))
        if not bad and require_positive_margins:
            union = 0
            for row in rows:
                union |= row
            bad = 0 in rows or union != rowmask
        if not bad:
            count += 1
    return count
