# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


def sqe_gram(points, q):
    cdef const double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[::1] Q = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], d = P.shape[1]
    cdef Py_ssize_t j, p, a
    cdef double acc, diff
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] K = out
    for j in range(n):
        K[j, j] = 1.0
        for p in range(j + 1, n):
            acc = 0.0
            for a in range(d):
                diff = P[j, a] - P[p, a]
                acc += Q[a] * diff * diff
            K[j, p] = exp(-acc)
            K[p, j] = K[j, p]
    return out


def mode_product3(t3, mat):
    """One dgemm per trailing index: ``out[:, :, r] = t3[:, :, r] @ mat.T``."""
    t3 = np.asfortranarray(t3, dtype=np.float64)
    mat = np.ascontiguousarray(mat, dtype=np.float64)
    cdef const double[::1, :, :] T = t3
    # a C-ordered A x J matrix is the column-major J x A matrix mat.T
    cdef const double[:, ::1] M = mat
    cdef int L = T.shape[0], J = T.shape[1], R = T.shape[2]
    cdef int A = M.shape[0]
    cdef int r
    cdef double one = 1.0, zero = 0.0
    cdef char n = b"N"
    out = np.zeros((L, A, R), dtype=np.float64, order="F")
    cdef double[::1, :, :] O = out
    if L == 0 or A == 0 or J == 0:
        return out
    for r in range(R):
        dgemm(&n, &n, &L, &A, &J, &one, <double*>&T[0, 0, r], &L,
              <double*>&M[0, 0], &J, &zero, &O[0, 0, r], &L)
    return out


def empirical_cov(d):
    cdef const double[:, :, :] D = np.asarray(d, dtype=np.float64)
    cdef int m1 = D.shape[0], m2 = D.shape[1], m3 = D.shape[2]
    cdef Py_ssize_t s, b, t
    cdef double acc
    # per mode-3 column, an m1 x m2 column-major block of centred values
    centred = np.empty((m1, m2, m3), dtype=np.float64, order="F")
    cdef double[::1, :, :] C = centred
    for t in range(m3):
        for b in range(m2):
            acc = 0.0
            for s in range(m1):
                acc += D[s, b, t]
            acc /= m1
            for s in range(m1):
                C[s, b, t] = D[s, b, t] - acc
    out = np.zeros((m2, m2), dtype=np.float64, order="F")
    cdef double[::1, :] E = out
    cdef double scale = 1.0 / (m1 * (m3 - 1))
    cdef double one = 1.0
    cdef char tr = b"T"
    cdef char n = b"N"
    for t in range(m3):
        dgemm(&tr, &n, &m2, &m2, &m1, &scale, &C[0, 0, t], &m1,
              &C[0, 0, t], &m1, &one, &E[0, 0], &m2)
    return np.ascontiguousarray(0.5 * (out + out.T))


def hpd_window(sorted_samples, Py_ssize_t w):
    cdef const double[::1] x = np.ascontiguousarray(sorted_samples, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], i, best = 0
    cdef double width, best_width = x[w - 1] - x[0]
    for i in range(1, n - w + 1):
        width = x[i + w - 1] - x[i]
        if width < best_width:
            best_width = width
            best = i
    return best
