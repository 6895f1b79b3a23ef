# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled segmented reductions; semantics match ``_kernels_py``."""

import numpy as np
from libc.math cimport exp, log, INFINITY, isfinite

BACKEND = "cython"


def seg_mean(const double[:, ::1] x, const double[::1] w,
             const long long[::1] offsets, const double[::1] mass):
    cdef Py_ssize_t rows = x.shape[0], ncell = offsets.shape[0] - 1
    out_arr = np.empty((rows, ncell), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, j
    cdef double acc, v
    cdef bint pinf, ninf
    with nogil:
        for r in range(rows):
            for c in range(ncell):
                acc = 0.0
                pinf = False
                ninf = False
                for j in range(offsets[c], offsets[c + 1]):
                    v = x[r, j]
                    if v == INFINITY:
                        pinf = True
                    elif v == -INFINITY:
                        ninf = True
                    else:
                        acc += w[j] * v
                if ninf:
                    out[r, c] = -INFINITY
                elif pinf:
                    out[r, c] = INFINITY
                else:
                    out[r, c] = acc / mass[c]
    return out_arr


def seg_entropic(const double[:, ::1] x, const double[::1] logw,
                 const long long[::1] offsets, const double[::1] logmass,
                 double gamma):
    cdef Py_ssize_t rows = x.shape[0], ncell = offsets.shape[0] - 1
    out_arr = np.empty((rows, ncell), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, j
    cdef double m, a, s, lse
    with nogil:
        for r in range(rows):
            for c in range(ncell):
                m = -INFINITY
                for j in range(offsets[c], offsets[c + 1]):
                    a = logw[j] + gamma * x[r, j]
                    if a > m:
                        m = a
                if isfinite(m):
                    s = 0.0
                    for j in range(offsets[c], offsets[c + 1]):
                        s += exp(logw[j] + gamma * x[r, j] - m)
                    lse = m + log(s) - logmass[c]
                else:
                    lse = m
                out[r, c] = lse / gamma
    return out_arr


def seg_min(const double[:, ::1] x, const long long[::1] offsets):
    cdef Py_ssize_t rows = x.shape[0], ncell = offsets.shape[0] - 1
    out_arr = np.empty((rows, ncell), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, j
    cdef double m
    with nogil:
        for r in range(rows):
            for c in range(ncell):
                m = INFINITY
                for j in range(offsets[c], offsets[c + 1]):
                    if x[r, j] < m:
                        m = x[r, j]
                out[r, c] = m
    return out_arr


def seg_max(const double[:, ::1] x, const long long[::1] offsets):
    cdef Py_ssize_t rows = x.shape[0], ncell = offsets.shape[0] - 1
    out_arr = np.empty((rows, ncell), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, j
    cdef double m
    with nogil:
        for r in range(rows):
            for c in range(ncell):
                m = -INFINITY
                for j in range(offsets[c], offsets[c + 1]):
                    if x[r, j] > m:
                        m = x[r, j]
                out[r, c] = m
    return out_arr
