# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path tracker and lonesum counter.

Homotopies are coefficient-linear: ``H(x, t) = sum_k ((1-t) c0[k] + t c1[k]) x^exps[k]``
with the terms of equation ``i`` stored in ``eq_ptr[i]:eq_ptr[i+1]``.
"""
import numpy as np
from libc.math cimport sqrt

ctypedef double complex cplx

cdef extern from "complex.h" nogil:
    double cabs(double complex)

cdef enum:
    MAXV = 8
    MAXD = 32

cdef enum:
    OK = 0
    DIVERGED = 1
    MINSTEP = 2
    MAXSTEPS = 3


cdef struct Sys:
    int nv
    int neq
    int maxdeg
    const int* exps
    const int* ptr
    const cplx* c0
    const cplx* c1


cdef struct Opts:
    double h0
    double min_step
    double max_step
    double newton_tol
    double pred_tol
    double div_norm
    int max_steps
    int max_newton


cdef void _eval(Sys* S, cplx* x, double t, cplx* H, cplx* J, cplx* Ht) noexcept nogil:
    cdef int nv = S.nv
    cdef int i, k, v, w, e
    cdef cplx pw[MAXV][MAXD + 1]
    cdef cplx c, dc, mono, d
    for v in range(nv):
        pw[v][0] = 1.0
        for e in range(1, S.maxdeg + 1):
            pw[v][e] = pw[v][e - 1] * x[v]
    for i in range(S.neq):
        H[i] = 0
        if Ht != NULL:
            Ht[i] = 0
        for v in range(nv):
            J[i * nv + v] = 0
        for k in range(S.ptr[i], S.ptr[i + 1]):
            c = (1.0 - t) * S.c0[k] + t * S.c1[k]
            mono = 1.0
            for v in range(nv):
                mono = mono * pw[v][S.exps[k * nv + v]]
            H[i] = H[i] + c * mono
            if Ht != NULL:
                dc = S.c1[k] - S.c0[k]
                Ht[i] = Ht[i] + dc * mono
            for v in range(nv):
                e = S.exps[k * nv + v]
                if e == 0:
                    continue
                d = e * pw[v][e - 1]
                for w in range(nv):
                    if w != v:
                        d = d * pw[w][S.exps[k * nv + w]]
                J[i * nv + v] = J[i * nv + v] + c * d


cdef int _solve(cplx* A, cplx* b, int n) noexcept nogil:
    """In-place Gaussian elimination with partial pivoting; 0 if singular."""
    cdef int i, j, k, p
    cdef double best, a
    cdef cplx tmp, f
    for k in range(n):
        p = k
        best = cabs(A[k * n + k])
        for i in range(k + 1, n):
            a = cabs(A[i * n + k])
            if a > best:
                best = a
                p = i
        if best == 0.0 or best != best:
            return 0
        if p != k:
            for j in range(n):
                tmp = A[k * n + j]
                A[k * n + j] = A[p * n + j]
                A[p * n + j] = tmp
            tmp = b[k]
            b[k] = b[p]
            b[p] = tmp
        for i in range(k + 1, n):
            f = A[i * n + k] / A[k * n + k]
            if f != 0:
                for j in range(k, n):
                    A[i * n + j] = A[i * n + j] - f * A[k * n + j]
                b[i] = b[i] - f * b[k]
    for i in range(n - 1, -1, -1):
        tmp = b[i]
        for j in range(i + 1, n):
            tmp = tmp - A[i * n + j] * b[j]
        b[i] = tmp / A[i * n + i]
    return 1


cdef double _norm(cplx* x, int n) noexcept nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(n):
        s += x[i].real * x[i].real + x[i].imag * x[i].imag
    return sqrt(s)


cdef int _tangent(Sys* S, cplx* x, double t, cplx* out, cplx* H, cplx* J, cplx* Ht) noexcept nogil:
    cdef int i
    _eval(S, x, t, H, J, Ht)
    for i in range(S.nv):
        out[i] = -Ht[i]
    return _solve(J, out, S.nv)


cdef int _newton(Sys* S, cplx* x, double t, Opts* o, cplx* H, cplx* J) noexcept nogil:
    """Corrector; 1 when the last update is below tolerance with contraction."""
    cdef int it, i, nv = S.nv
    cdef double nd, prev = 1e300, scale
    for it in range(o.max_newton):
        _eval(S, x, t, H, J, NULL)
        for i in range(nv):
            H[i] = -H[i]
        if not _solve(J, H, nv):
            return 0
        nd = _norm(H, nv)
        for i in range(nv):
            x[i] = x[i] + H[i]
        scale = 1.0 + _norm(x, nv)
        if nd <= o.newton_tol * scale:
            return 1
        if it > 0 and nd > 0.5 * prev:
            return 0
        prev = nd
    return 0


cdef int _track(Sys* S, cplx* x, Opts* o, double* t_out, int* steps_out) noexcept nogil:
    cdef int nv = S.nv, i, steps = 0, good = 0, ok
    cdef double t = 0.0, h = o.h0, err, scale
    cdef cplx k1[MAXV]
    cdef cplx k2[MAXV]
    cdef cplx xe[MAXV]
    cdef cplx xp[MAXV]
    cdef cplx H[MAXV]
    cdef cplx Ht[MAXV]
    cdef cplx J[MAXV * MAXV]
    cdef int status = OK
    while t < 1.0:
        if steps >= o.max_steps:
            status = MAXSTEPS
            break
        steps += 1
        if t + h > 1.0:
            h = 1.0 - t
        scale = 1.0 + _norm(x, nv)
        ok = _tangent(S, x, t, k1, H, J, Ht)
        if ok:
            for i in range(nv):
                xe[i] = x[i] + h * k1[i]
            ok = _tangent(S, xe, t + h, k2, H, J, Ht)
        if ok:
            for i in range(nv):
                xp[i] = x[i] + 0.5 * h * (k1[i] + k2[i])
                xe[i] = xp[i] - xe[i]
            err = _norm(xe, nv) / scale
            ok = err <= o.pred_tol
        if ok:
            ok = _newton(S, xp, t + h, o, H, J)
        if ok:
            for i in range(nv):
                xe[i] = xp[i] - x[i]
            # reject corrections that move further than the step itself allows
            ok = _norm(xe, nv) <= 0.5 * scale
        if ok:
            for i in range(nv):
                x[i] = xp[i]
            t = t + h
            good += 1
            if good >= 3:
                h = min(2.0 * h, o.max_step)
                good = 0
            if _norm(x, nv) > o.div_norm:
                status = DIVERGED
                break
        else:
            good = 0
            h = 0.5 * h
            if h < o.min_step:
                status = MINSTEP
                break
    t_out[0] = t
    steps_out[0] = steps
    return status


cdef Opts _opts(dict options):
    cdef Opts o
    o.h0 = options.get("h0", 0.01)
    o.min_step = options.get("min_step", 1e-14)
    o.max_step = options.get("max_step", 0.1)
    o.newton_tol = options.get("newton_tol", 1e-9)
    o.pred_tol = options.get("pred_tol", 1e-3)
    o.div_norm = options.get("div_norm", 1e10)
    o.max_steps = options.get("max_steps", 20000)
    o.max_newton = options.get("max_newton", 3)
    return o


cdef Sys _sys(const int[:, ::1] exps, const int[::1] ptr, const cplx[::1] c0, const cplx[::1] c1):
    cdef Sys S
    S.nv = exps.shape[1]
    S.neq = ptr.shape[0] - 1
    if S.nv > MAXV or S.neq != S.nv:
        raise ValueError("system must be square with at most 8 variables")
    S.maxdeg = int(np.max(exps)) if exps.shape[0] else 0
    if S.maxdeg > MAXD:
        raise ValueError("degree exceeds the kernel limit")
    S.exps = &exps[0, 0] if exps.shape[0] else NULL
    S.ptr = &ptr[0]
    S.c0 = &c0[0] if c0.shape[0] else NULL
    S.c1 = &c1[0] if c1.shape[0] else NULL
    return S


def track_paths(const int[:, ::1] exps, const int[::1] ptr, const cplx[::1] c0, const cplx[::1] c1,
                const cplx[:, ::1] starts, dict options):
    """Track every start point from t=0 to t=1.

    Returns ``(endpoints, t_end, status, steps)``; status codes are
    0 reached t=1, 1 diverged, 2 step underflow, 3 step budget exhausted.
    """
    cdef Sys S = _sys(exps, ptr, c0, c1)
    cdef Opts o = _opts(options)
    cdef Py_ssize_t npaths = starts.shape[0], p
    ends = np.array(starts, dtype=np.complex128, copy=True)
    cdef cplx[:, ::1] E = ends
    t_end = np.zeros(npaths)
    status = np.zeros(npaths, dtype=np.int32)
    steps = np.zeros(npaths, dtype=np.int32)
    cdef double[::1] T = t_end
    cdef int[::1] ST = status
    cdef int[::1] NS = steps
    with nogil:
        for p in range(npaths):
            ST[p] = _track(&S, &E[p, 0], &o, &T[p], &NS[p])
    return ends, t_end, status, steps


def newton_refine(const int[:, ::1] exps, const int[::1] ptr, const cplx[::1] coeffs, const cplx[::1] x0,
                  int max_iter=20, double tol=1e-14):
    """Newton iteration on the fixed system; returns ``(x, last_step_norm, iterations)``."""
    cdef Sys S = _sys(exps, ptr, coeffs, coeffs)
    cdef int nv = S.nv, it, i
    cdef cplx H[MAXV]
    cdef cplx J[MAXV * MAXV]
    x = np.array(x0, dtype=np.complex128, copy=True)
    cdef cplx[::1] X = x
    cdef double nd = np.inf
    for it in range(max_iter):
        _eval(&S, &X[0], 1.0, H, J, NULL)
        for i in range(nv):
            H[i] = -H[i]
        if not _solve(J, H, nv):
            return x, np.inf, it
        nd = _norm(H, nv)
        for i in range(nv):
            X[i] = X[i] + H[i]
        if nd <= tol * (1.0 + _norm(&X[0], nv)):
            return x, nd, it + 1
    return x, nd, max_iter


def evaluate(const int[:, ::1] exps, const int[::1] ptr, const cplx[::1] c0, const cplx[::1] c1,
             const cplx[::1] x, double t):
    """``(H, J, dH/dt)`` at ``(x, t)``."""
    cdef Sys S = _sys(exps, ptr, c0, c1)
    cdef int nv = S.nv, i
    H = np.zeros(nv, dtype=np.complex128)
    J = np.zeros((nv, nv), dtype=np.complex128)
    Ht = np.zeros(nv, dtype=np.complex128)
    cdef cplx[::1] Hv = H
    cdef cplx[:, ::1] Jv = J
    cdef cplx[::1] Htv = Ht
    cdef cplx xs[MAXV]
    for i in range(nv):
        xs[i] = x[i]
    _eval(&S, xs, t, &Hv[0], &Jv[0, 0], &Htv[0])
    return H, J, Ht


cdef inline bint _has_pattern(unsigned long long* rows, int m) noexcept nogil:
    cdef int i, k
    for i in range(m):
        for k in range(i + 1, m):
            if (rows[i] & ~rows[k]) and (rows[k] & ~rows[i]):
                return True
    return False


def count_lonesum_range(int m, int n, unsigned long long lo, unsigned long long hi,
                        bint require_positive_margins):
    """Count lonesum m x n 0/1 matrices with bit patterns in ``[lo, hi)``."""
    cdef unsigned long long mask, rowmask = (1ULL << n) - 1, colunion
    cdef unsigned long long rows[64]
    cdef long long count = 0
    cdef int i
    cdef bint bad
    with nogil:
        mask = lo
        while mask < hi:
            for i in range(m):
                rows[i] = (mask >> (i * n)) & rowmask
            if not _has_pattern(rows, m):
                bad = False
                if require_positive_margins:
                    colunion = 0
                    for i in range(m):
                        if rows[i] == 0:
                            bad = True
                        colunion = colunion | rows[i]
                    if colunion != rowmask:
                        bad = True
                if not bad:
                    count += 1
            mask += 1
    return count
