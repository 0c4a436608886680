"""Pure-Python kernels for the discrete Legendre-Fenchel transform.

Reference implementation and fallback for the compiled ``_ckernels``
extension. Every function takes contiguous float64 arrays; ``+inf`` entries
of the potential are skipped.
"""
import numpy as np


def lower_hull(x, u):
    """Indices of the vertices of the lower convex hull of ``(x_i, u_i)``."""
    out = []
    for i in np.flatnonzero(np.isfinite(u)):
        xi, ui = x[i], u[i]
        while len(out) >= 2:
            a, b = out[-2], out[-1]
            cross = (u[b] - u[a]) * (xi - x[a]) - (ui - u[a]) * (x[b] - x[a])
            if cross >= 0.0:
                out.pop()
            else:
                break
        out.append(i)
    return np.asarray(out, dtype=np.intp)


def llt_conjugate(x, u, y):
    """Discrete conjugate ``max_i (x_i y_j - u_i)`` for ascending ``y``.

    Returns the values and the maximizing index (smallest index on ties).
    """
    hull = lower_hull(x, u)
    if hull.size == 0:
        return np.full(y.shape, -np.inf), np.full(y.shape, -1, dtype=np.intp)
    xh, uh = x[hull], u[hull]
    slopes = np.diff(uh) / np.diff(xh)
    k = np.searchsorted(slopes, y, side="left")
    return xh[k] * y - uh[k], hull[k]


def llt_conjugate_rows(x, u, y):
    val = np.empty((u.shape[0], y.size))
    arg = np.empty((u.shape[0], y.size), dtype=np.intp)
    for r in range(u.shape[0]):
        val[r], arg[r] = llt_conjugate(x, u[r], y)
    return val, arg


def brute_conjugate(x, u, y):
    fin = np.flatnonzero(np.isfinite(u))
    if fin.size == 0:
        return np.full(y.shape, -np.inf), np.full(y.shape, -1, dtype=np.intp)
    table = np.outer(y, x[fin]) - u[fin][None, :]
    k = np.argmax(table, axis=1)
    return table[np.arange(y.size), k], fin[k]
