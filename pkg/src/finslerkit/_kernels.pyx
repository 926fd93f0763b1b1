# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for truncated multivariate Taylor arithmetic.

Both functions operate on batches of dense coefficient rows laid out in
graded-lex order.  The pair tables ``ia, ib, ik`` enumerate every product of
monomials whose total degree stays within the truncation order.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def mul(const double[:, ::1] a, const double[:, ::1] b,
        const cnp.intp_t[::1] ia, const cnp.intp_t[::1] ib,
        const cnp.intp_t[::1] ik, Py_ssize_t m):
    cdef Py_ssize_t nb = a.shape[0]
    cdef Py_ssize_t npairs = ia.shape[0]
    cdef Py_ssize_t r, p
    out = np.zeros((nb, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for r in range(nb):
            for p in range(npairs):
                o[r, ik[p]] += a[r, ia[p]] * b[r, ib[p]]
    return out


def compose(const double[:, ::1] d, const double[:, ::1] coef,
            const cnp.intp_t[::1] ia, const cnp.intp_t[::1] ib,
            const cnp.intp_t[::1] ik, Py_ssize_t m):
    """Horner evaluation of sum_k coef[:, k] * d**k with d nilpotent."""
    cdef Py_ssize_t nb = d.shape[0]
    cdef Py_ssize_t K = coef.shape[1] - 1
    cdef Py_ssize_t npairs = ia.shape[0]
    cdef Py_ssize_t r, p, k, j
    out = np.zeros((nb, m), dtype=np.float64)
    tmp = np.zeros(m, dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] t = tmp
    with nogil:
        for r in range(nb):
            o[r, 0] = coef[r, K]
            for k in range(K - 1, -1, -1):
                for j in range(m):
                    t[j] = 0.0
                for p in range(npairs):
                    if ia[p] == 0:
                        # d has no constant term
                        continue
                    t[ik[p]] += d[r, ia[p]] * o[r, ib[p]]
                t[0] += coef[r, k]
                for j in range(m):
                    o[r, j] = t[j]
    return out
