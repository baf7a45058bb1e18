# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see confellip.kernels for the contracts."""

import numpy as np

from libc.math cimport log, sqrt, isfinite
from libc.stdlib cimport malloc, free
from libc.float cimport DBL_EPSILON


cdef double _select(double* a, Py_ssize_t n, Py_ssize_t kth) noexcept nogil:
    # Hoare quickselect, in place; returns the kth smallest (0-based).
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j
    cdef double pivot, tmp
    while lo < hi:
        pivot = a[lo + (hi - lo) // 2]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                tmp = a[i]; a[i] = a[j]; a[j] = tmp
                i += 1
                j -= 1
        if kth <= j:
            hi = j
        elif kth >= i:
            lo = i
        else:
            return a[kth]
    return a[kth]


cdef int _cholesky(double* S, Py_ssize_t p) noexcept nogil:
    # In-place lower Cholesky of a row-major p x p matrix; upper part untouched.
    cdef Py_ssize_t i, j, r
    cdef double s, maxd = 0.0, thresh
    for i in range(p):
        if S[i * p + i] > maxd:
            maxd = S[i * p + i]
    thresh = p * DBL_EPSILON * maxd
    if maxd <= 0.0:
        return 1
    for j in range(p):
        s = S[j * p + j]
        for r in range(j):
            s -= S[j * p + r] * S[j * p + r]
        if not (s > thresh) or not isfinite(s):
            return 1
        S[j * p + j] = sqrt(s)
        for i in range(j + 1, p):
            s = S[i * p + j]
            for r in range(j):
                s -= S[i * p + r] * S[j * p + r]
            S[i * p + j] = s / S[j * p + j]
    return 0


cdef inline double _fwd_sq(const double* L, const double* b, double* y,
                           Py_ssize_t p, Py_ssize_t upto) noexcept nogil:
    # Solve L y = b (first p rows); return sum of y_i^2 for i < upto.
    cdef Py_ssize_t i, r
    cdef double s, acc = 0.0
    for i in range(p):
        s = b[i]
        for r in range(i):
            s -= L[i * p + r] * y[r]
        y[i] = s / L[i * p + i]
        if i < upto:
            acc += y[i] * y[i]
    return acc


def ccle_batch(V, int k, Py_ssize_t n_alpha, double lam):
    cdef double[:, :, ::1] Vv = np.ascontiguousarray(V, dtype=np.float64)
    cdef Py_ssize_t m = Vv.shape[0], n1 = Vv.shape[1], p = Vv.shape[2]
    cdef Py_ssize_t n = n1 - 1
    q_out = np.full(m, np.nan)
    mx_out = np.full(m, np.nan)
    ld_out = np.full(m, np.nan)
    rs_out = np.full(m, np.nan)
    st_out = np.zeros(m, dtype=np.int32)
    cdef double[::1] q = q_out, mx = mx_out, ld = ld_out, rs = rs_out
    cdef int[::1] st = st_out

    cdef double* S = <double*> malloc(p * p * sizeof(double))
    cdef double* mean = <double*> malloc(p * sizeof(double))
    cdef double* b = <double*> malloc(p * sizeof(double))
    cdef double* y = <double*> malloc(p * sizeof(double))
    cdef double* lev = <double*> malloc(n * sizeof(double))
    cdef Py_ssize_t t, i, a, c
    cdef double acc, full, xpart, inv_n = 1.0 / n
    if S == NULL or mean == NULL or b == NULL or y == NULL or lev == NULL:
        free(S); free(mean); free(b); free(y); free(lev)
        raise MemoryError()
    try:
        with nogil:
            for t in range(m):
                for a in range(p):
                    acc = 0.0
                    for i in range(n):
                        acc += Vv[t, i, a]
                    mean[a] = acc * inv_n
                for a in range(p * p):
                    S[a] = 0.0
                for i in range(n):
                    for a in range(p):
                        b[a] = Vv[t, i, a] - mean[a]
                    for a in range(p):
                        for c in range(a + 1):
                            S[a * p + c] += b[a] * b[c]
                for a in range(p):
                    for c in range(a + 1):
                        S[a * p + c] *= inv_n
                    S[a * p + a] += lam
                if _cholesky(S, p) != 0:
                    st[t] = 1
                    continue
                for i in range(n):
                    for a in range(p):
                        b[a] = Vv[t, i, a] - mean[a]
                    lev[i] = _fwd_sq(S, b, y, p, p) * inv_n
                q[t] = n * _select(lev, n, n_alpha - 1)
                for a in range(p):
                    b[a] = Vv[t, n, a] - mean[a]
                full = _fwd_sq(S, b, y, p, p)
                xpart = 0.0
                for a in range(k):
                    xpart += y[a] * y[a]
                mx[t] = xpart
                rs[t] = full - xpart
                acc = 0.0
                for a in range(k, p):
                    acc += log(S[a * p + a])
                ld[t] = 2.0 * acc
    finally:
        free(S); free(mean); free(b); free(y); free(lev)
    return q_out, mx_out, ld_out, rs_out, st_out


def exact_membership(G, H, w, cdiag, R, Py_ssize_t n_alpha):
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[:, ::1] Hv = np.ascontiguousarray(H, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(cdiag, dtype=np.float64)
    cdef double[:, ::1] Rv = np.ascontiguousarray(np.atleast_2d(R), dtype=np.float64)
    cdef Py_ssize_t n = Gv.shape[0], p = Gv.shape[1], m = Rv.shape[0]
    member_out = np.zeros(m, dtype=np.uint8)
    last_out = np.empty(m)
    thr_out = np.empty(m)
    cdef unsigned char[::1] member = member_out
    cdef double[::1] last = last_out, thr = thr_out
    cdef double* s = <double*> malloc(n * sizeof(double))
    cdef double* hr = <double*> malloc(p * sizeof(double))
    cdef Py_ssize_t j, i, a, c
    cdef double d, acc, bi, inv_n = 1.0 / n, denom
    if s == NULL or hr == NULL:
        free(s); free(hr)
        raise MemoryError()
    try:
        with nogil:
            for j in range(m):
                d = 0.0
                for a in range(p):
                    acc = 0.0
                    for c in range(p):
                        acc += Hv[a, c] * Rv[j, c]
                    hr[a] = acc
                    d += Rv[j, a] * acc
                d *= inv_n
                denom = 1.0 + d
                for i in range(n):
                    acc = 0.0
                    for a in range(p):
                        acc += Gv[i, a] * Rv[j, a]
                    bi = acc * inv_n - wv[i]
                    s[i] = n * cv[i] - n * bi * bi / denom
                last[j] = n * (n / (n + 1.0)) * d / denom
                thr[j] = _select(s, n, n_alpha - 1)
                member[j] = 1 if last[j] <= thr[j] else 0
    finally:
        free(s); free(hr)
    return member_out, last_out, thr_out
