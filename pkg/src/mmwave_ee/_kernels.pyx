# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled interference-moment kernel."""
import numpy as np

from libc.math cimport expm1, log1p


def scaled_moments(const double[:, ::1] u, const double[:, ::1] w, int m, int nmax):
    """Weighted sums S_0 = sum w (1 - (1+u)^-m), S_n = sum w u^n (1+u)^-(m+n).

    One output row per input row; see ``_kernels_py.scaled_moments``.
    """
    cdef Py_ssize_t rows = u.shape[0]
    cdef Py_ssize_t cols = u.shape[1]
    cdef Py_ssize_t i, j
    cdef int n, k
    cdef double uu, ww, inv, p, base, q, s0
    cdef double acc[64]
    if nmax >= 64:
        raise ValueError("nmax must be below 64")
    out = np.zeros((rows, nmax + 1), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(rows):
        s0 = 0.0
        for n in range(nmax + 1):
            acc[n] = 0.0
        for j in range(cols):
            ww = w[i, j]
            if ww == 0.0:
                continue
            uu = u[i, j]
            inv = 1.0 / (1.0 + uu)
            # (1+u)^-m by repeated products; m is a small integer
            p = inv
            for k in range(1, m):
                p *= inv
            if uu < 0.25:
                s0 -= ww * expm1(-m * log1p(uu))
            else:
                s0 += ww * (1.0 - p)
            if nmax > 0:
                base = ww * p
                q = uu * inv
                for n in range(1, nmax + 1):
                    base *= q
                    acc[n] += base
        o[i, 0] = s0
        for n in range(1, nmax + 1):
            o[i, n] = acc[n]
    return out
