# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled flat-scan kernel: one pass over contiguous rows, float64 sums."""

from libc.math cimport fabs, sqrt

import numpy as np

BACKEND = "cython"


def scan_scores(double[:, ::1] matrix, double[::1] norms, double[::1] q, bint absolute):
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t d = matrix.shape[1]
    if q.shape[0] != d:
        raise ValueError("query dimension does not match index")
    cdef double qn = 0.0
    cdef Py_ssize_t i, j
    for j in range(d):
        qn += q[j] * q[j]
    qn = sqrt(qn)
    if qn == 0.0:
        raise ValueError("query vector has zero norm")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc += matrix[i, j] * q[j]
        if absolute:
            acc = fabs(acc)
        ov[i] = acc / (norms[i] * qn)
    return out
