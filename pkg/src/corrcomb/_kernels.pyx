# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, NAN, fabs

cnp.import_array()

cdef enum:
    MAXN = 64


cdef int _chol_solve(double* A, double* b, int m, double tol) noexcept nogil:
    """In-place Cholesky of the m x m row-major A, then solve A x = b into b.
    Returns 0 on success, 1 when a pivot falls below tol."""
    cdef int i, j, k
    cdef double s
    for j in range(m):
        s = A[j * m + j]
        for k in range(j):
            s -= A[j * m + k] * A[j * m + k]
        if s <= tol:
            return 1
        A[j * m + j] = sqrt(s)
        for i in range(j + 1, m):
            s = A[i * m + j]
            for k in range(j):
                s -= A[i * m + k] * A[j * m + k]
            A[i * m + j] = s / A[j * m + j]
    for i in range(m):
        s = b[i]
        for k in range(i):
            s -= A[i * m + k] * b[k]
        b[i] = s / A[i * m + i]
    for i in range(m - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, m):
            s -= A[k * m + i] * b[k]
        b[i] = s / A[i * m + i]
    return 0


def ar1_ssr_profile(F, y, int h, gammas):
    cdef double[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(gammas, dtype=np.float64)
    cdef Py_ssize_t T = Fv.shape[0], n = Fv.shape[1], G = gv.shape[0]
    cdef int m = <int>n - 1
    if m + 1 > MAXN:
        from ._kernels_py import ar1_ssr_profile as slow
        return slow(F, y, h, gammas)
    out = np.empty(G, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double[:, ::1] D = np.empty((T, max(m, 1)), dtype=np.float64)
    cdef double[::1] r0 = np.empty(T, dtype=np.float64)
    cdef double A[MAXN * MAXN]
    cdef double b[MAXN]
    cdef double z[MAXN]
    cdef double g, r, s, ssr, scale
    cdef Py_ssize_t t, i, j, k
    for t in range(T):
        r0[t] = yv[t] - Fv[t, n - 1]
        for i in range(m):
            D[t, i] = Fv[t, i] - Fv[t, n - 1]
    with nogil:
        for k in range(G):
            g = gv[k]
            for i in range(m * m):
                A[i] = 0.0
            for i in range(m):
                b[i] = 0.0
            for t in range(h, T):
                r = r0[t] - g * r0[t - h]
                for i in range(m):
                    z[i] = D[t, i] - g * D[t - h, i]
                    b[i] += z[i] * r
                    for j in range(i + 1):
                        A[i * m + j] += z[i] * z[j]
            for i in range(m):
                for j in range(i + 1, m):
                    A[i * m + j] = A[j * m + i]
            scale = 0.0
            for i in range(m):
                if A[i * m + i] > scale:
                    scale = A[i * m + i]
            if m > 0 and _chol_solve(A, b, m, scale * 1e-13) != 0:
                ov[k] = NAN
                continue
            ssr = 0.0
            for t in range(h, T):
                r = r0[t] - g * r0[t - h]
                s = 0.0
                for i in range(m):
                    s += (D[t, i] - g * D[t - h, i]) * b[i]
                ssr += (r - s) * (r - s)
            ov[k] = ssr
    return out


def lag_moment_cumsums(lead, lag, usable):
    cdef double[::1] a = np.ascontiguousarray(lead, dtype=np.float64)
    cdef double[::1] l = np.ascontiguousarray(lag, dtype=np.float64)
    cdef cnp.uint8_t[::1] u = np.ascontiguousarray(usable, dtype=np.uint8)
    cdef Py_ssize_t T = a.shape[0], t
    num = np.empty(T, dtype=np.float64)
    den = np.empty(T, dtype=np.float64)
    cnt = np.empty(T, dtype=np.int64)
    cdef double[::1] nv = num, dv = den
    cdef cnp.int64_t[::1] cv = cnt
    cdef double sn = 0.0, sd = 0.0
    cdef cnp.int64_t sc = 0
    with nogil:
        for t in range(T):
            if u[t]:
                sn += a[t] * l[t]
                sd += l[t] * l[t]
                sc += 1
            nv[t] = sn
            dv[t] = sd
            cv[t] = sc
    return num, den, cnt


def centered_acov_sums(e, int max_lag):
    cdef double[::1] x = np.array(e, dtype=np.float64)
    cdef Py_ssize_t T = x.shape[0], t, k
    cdef double m = 0.0, s
    for t in range(T):
        m += x[t]
    m /= T
    for t in range(T):
        x[t] -= m
    out = np.empty(max_lag + 1, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for k in range(max_lag + 1):
            s = 0.0
            for t in range(k, T):
                s += x[t] * x[t - k]
            ov[k] = s
    return out
