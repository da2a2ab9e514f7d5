# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float kernels; same contracts as the NumPy fallback."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def evaluate_sparse(exps, coefs, points):
    cdef const long long[:, ::1] e = np.ascontiguousarray(exps, dtype=np.int64)
    cdef const double[::1] c = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef const double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], m = e.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, k, j
    cdef long long p
    cdef double acc, term, base
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            acc = 0.0
            for k in range(m):
                term = c[k]
                for j in range(d):
                    p = e[k, j]
                    base = x[i, j]
                    while p > 0:
                        term *= base
                        p -= 1
                acc += term
            o[i] = acc
    return out


def gram_contract(gram, index, Py_ssize_t n_out):
    cdef const double[:, ::1] g = np.ascontiguousarray(gram, dtype=np.float64)
    cdef const long long[:, ::1] idx = np.ascontiguousarray(index, dtype=np.int64)
    cdef Py_ssize_t a, b
    out = np.zeros(n_out, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for a in range(g.shape[0]):
            for b in range(g.shape[1]):
                o[idx[a, b]] += g[a, b]
    return out
