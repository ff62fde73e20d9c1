# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the hot kernels.

Same contracts as `_fallback`; compiled without fast-math so that wrapped
differences, squares and comparisons agree bit-for-bit with numpy.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

BACKEND = "native"


cdef inline double _wrap(double d) nogil:
    return d - floor(d + 0.5)


cdef inline int _separated(const double[:, :, ::1] orbits, Py_ssize_t i,
                           Py_ssize_t j, double eps2) nogil:
    """1 if orbits i, j have some time step with squared distance > eps2."""
    cdef Py_ssize_t n = orbits.shape[1]
    cdef Py_ssize_t d = orbits.shape[2]
    cdef Py_ssize_t k, c
    cdef double sq, w
    for k in range(n):
        sq = 0.0
        for c in range(d):
            w = _wrap(orbits[i, k, c] - orbits[j, k, c])
            sq += w * w
        if sq > eps2:
            return 1
    return 0


def greedy_separated(orbits, double eps):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] arr = np.ascontiguousarray(
        orbits, dtype=np.float64)
    cdef const double[:, :, ::1] view = arr
    cdef Py_ssize_t N = view.shape[0]
    cdef double eps2 = eps * eps
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sel = np.empty(N, dtype=np.int64)
    cdef long long[::1] selv = sel
    cdef Py_ssize_t nsel = 0, i, j
    cdef int ok
    with nogil:
        for i in range(N):
            ok = 1
            for j in range(nsel):
                if not _separated(view, i, <Py_ssize_t>selv[j], eps2):
                    ok = 0
                    break
            if ok:
                selv[nsel] = i
                nsel += 1
    return sel[:nsel].copy()


def cover_matrix(orbits, double eps):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] arr = np.ascontiguousarray(
        orbits, dtype=np.float64)
    cdef const double[:, :, ::1] view = arr
    cdef Py_ssize_t N = view.shape[0]
    cdef double eps2 = eps * eps
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((N, N), dtype=np.uint8)
    cdef unsigned char[:, ::1] ov = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(N):
            for j in range(N):
                if not _separated(view, i, j, eps2):
                    ov[i, j] = 1
    return out


def pairwise_bowen(orbits, pairs):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] arr = np.ascontiguousarray(
        orbits, dtype=np.float64)
    cdef const double[:, :, ::1] view = arr
    cdef cnp.ndarray[cnp.int64_t, ndim=2] prs = np.ascontiguousarray(
        pairs, dtype=np.int64)
    cdef const long long[:, ::1] pv = prs
    cdef Py_ssize_t K = pv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(K, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t k, t, c
    cdef Py_ssize_t n = view.shape[1], d = view.shape[2]
    cdef double best, sq, w
    with nogil:
        for k in range(K):
            best = 0.0
            for t in range(n):
                sq = 0.0
                for c in range(d):
                    w = _wrap(view[pv[k, 0], t, c] - view[pv[k, 1], t, c])
                    sq += w * w
                if sq > best:
                    best = sq
            ov[k] = sqrt(best)
    return out


def min_pairwise_bowen(orbits):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] arr = np.ascontiguousarray(
        orbits, dtype=np.float64)
    cdef const double[:, :, ::1] view = arr
    cdef Py_ssize_t N = view.shape[0]
    cdef Py_ssize_t n = view.shape[1], d = view.shape[2]
    cdef Py_ssize_t i, j, t, c
    cdef double best = -1.0, mx, sq, w
    with nogil:
        for i in range(N - 1):
            for j in range(i + 1, N):
                mx = 0.0
                for t in range(n):
                    sq = 0.0
                    for c in range(d):
                        w = _wrap(view[i, t, c] - view[j, t, c])
                        sq += w * w
                    if sq > mx:
                        mx = sq
                if best < 0.0 or mx < best:
                    best = mx
    if best < 0.0:
        return float("inf")
    return sqrt(best)
