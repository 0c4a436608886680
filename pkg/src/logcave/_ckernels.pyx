# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the discrete Legendre-Fenchel transform.

Mirrors :mod:`logcave._pykernels` function for function; the pure-Python
module is the reference and the fallback.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, isfinite

cnp.import_array()


cdef Py_ssize_t _hull(const double[::1] x, const double[::1] u,
                      Py_ssize_t[::1] out) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, m = 0, a, b
    cdef double cross
    for i in range(n):
        if not isfinite(u[i]):
            continue
        while m >= 2:
            a = out[m - 2]
            b = out[m - 1]
            # drop b unless it lies strictly below the chord a -> i
            cross = (u[b] - u[a]) * (x[i] - x[a]) - (u[i] - u[a]) * (x[b] - x[a])
            if cross >= 0.0:
                m -= 1
            else:
                break
        out[m] = i
        m += 1
    return m


def lower_hull(const double[::1] x, const double[::1] u):
    cdef Py_ssize_t[::1] buf = np.empty(x.shape[0], dtype=np.intp)
    cdef Py_ssize_t m
    with nogil:
        m = _hull(x, u, buf)
    return np.asarray(buf[:m]).copy()


cdef void _llt(const double[::1] x, const double[::1] u, const double[::1] y,
               Py_ssize_t[::1] hull, double[::1] val, Py_ssize_t[::1] arg) noexcept nogil:
    cdef Py_ssize_t m = _hull(x, u, hull)
    cdef Py_ssize_t ny = y.shape[0]
    cdef Py_ssize_t j, k = 0, a, b
    if m == 0:
        for j in range(ny):
            val[j] = -INFINITY
            arg[j] = -1
        return
    for j in range(ny):
        # y is sorted: the optimal hull vertex only moves right
        while k < m - 1:
            a = hull[k]
            b = hull[k + 1]
            if (u[b] - u[a]) < y[j] * (x[b] - x[a]):
                k += 1
            else:
                break
        a = hull[k]
        val[j] = x[a] * y[j] - u[a]
        arg[j] = a


def llt_conjugate(const double[::1] x, const double[::1] u, const double[::1] y):
    """Discrete conjugate max_i (x_i y_j - u_i) for ascending ``y``."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t ny = y.shape[0]
    cdef Py_ssize_t[::1] hull = np.empty(n, dtype=np.intp)
    cdef double[::1] val = np.empty(ny, dtype=np.float64)
    cdef Py_ssize_t[::1] arg = np.empty(ny, dtype=np.intp)
    with nogil:
        _llt(x, u, y, hull, val, arg)
    return np.asarray(val), np.asarray(arg)


def llt_conjugate_rows(const double[::1] x, const double[:, ::1] u, const double[::1] y):
    """Row-wise :func:`llt_conjugate` over a 2-D array (last axis transformed)."""
    cdef Py_ssize_t rows = u.shape[0]
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t ny = y.shape[0]
    cdef Py_ssize_t r
    cdef Py_ssize_t[::1] hull = np.empty(n, dtype=np.intp)
    cdef double[:, ::1] val = np.empty((rows, ny), dtype=np.float64)
    cdef Py_ssize_t[:, ::1] arg = np.empty((rows, ny), dtype=np.intp)
    with nogil:
        for r in range(rows):
            _llt(x, u[r], y, hull, val[r], arg[r])
    return np.asarray(val), np.asarray(arg)


def brute_conjugate(const double[::1] x, const double[::1] u, const double[::1] y):
    """Quadratic-time reference transform; smallest index wins ties."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t ny = y.shape[0]
    cdef Py_ssize_t i, j, best
    cdef double v, bv
    cdef double[::1] val = np.empty(ny, dtype=np.float64)
    cdef Py_ssize_t[::1] arg = np.empty(ny, dtype=np.intp)
    with nogil:
        for j in range(ny):
            bv = -INFINITY
            best = -1
            for i in range(n):
                if not isfinite(u[i]):
                    continue
                v = x[i] * y[j] - u[i]
                if v > bv:
                    bv = v
                    best = i
            val[j] = bv
            arg[j] = best
    return np.asarray(val), np.asarray(arg)
