"""Legendre-Fenchel conjugation and the operations built on it.

The transform is the discrete one, ``u*(y) = max_i (<x_i, y> - u(x_i))``,
computed in linear time per grid line from the lower convex hull of the
samples (non-convex noise is convexified implicitly). Two-dimensional
grids are transformed one axis at a time.

Where the finite region of ``u`` reaches the grid edge the samples are a
window onto a function finite beyond it; the conjugate is then reported
as ``+inf`` past the slope attained at that edge, and a target grid that
does not reach that slope raises :class:`SlopeRangeError`.
"""
from __future__ import annotations

import numpy as np

from ._backend import kernels
from .grid import Grid, PotentialGrid

__all__ = [
    "SlopeRangeError",
    "fenchel_conjugate",
    "conjugate_at",
    "fenchel_involution_residual",
    "inf_convolution",
    "right_scalar_mult",
    "spike",
    "gradient",
    "convexity_margin",
    "convex_envelope_1d",
    "default_slope_grid",
    "merge_grids",
    "aligned_grid",
]

MAX_POINTS_1D = 400_001
MAX_POINTS_2D = 2_001


class SlopeRangeError(ValueError):
    """The target grid does not contain the slopes attained by the potential."""


def _lines(x, U, y, refine):
    """Conjugate every row of ``U`` (samples at ``x``) at the ascending ``y``."""
    U = np.ascontiguousarray(U, dtype=float)
    val, arg = kernels.llt_conjugate_rows(np.ascontiguousarray(x, dtype=float), U,
                                          np.ascontiguousarray(y, dtype=float))
    if refine and x.size >= 5:
        val = _refine(x, U, y, val, arg)
    return val, arg


def _refine(x, U, y, val, arg):
    # local quadratic model of u around the discrete maximizer, used only
    # where neighbouring second differences agree (no kink nearby)
    n = x.size
    h = x[1] - x[0]
    rows = np.arange(U.shape[0])[:, None]
    k = np.clip(arg, 2, n - 3)
    um2, um, u0, up, up2 = (U[rows, k + j] for j in (-2, -1, 0, 1, 2))
    with np.errstate(invalid="ignore", over="ignore"):
        d1 = (up - um) / (2 * h)
        d2 = (up - 2 * u0 + um) / h**2
        d2m = (u0 - 2 * um + um2) / h**2
        d2p = (up2 - 2 * up + u0) / h**2
        lo = np.minimum(np.minimum(d2m, d2), d2p)
        hi = np.maximum(np.maximum(d2m, d2), d2p)
        ok = (arg >= 2) & (arg <= n - 3) & np.isfinite(um2) & np.isfinite(up2) & (lo > 0) & (hi <= 4 * lo)
        s = np.clip((y[None, :] - d1) / np.where(ok, d2, 1.0), -h, h)
        ref = (x[k] + s) * y[None, :] - (u0 + d1 * s + 0.5 * d2 * s * s)
    return np.where(ok, np.maximum(val, ref), val)


def _transform(grid, values, target, refine=False):
    """Raw discrete conjugate of ``values`` on ``grid`` evaluated on ``target``."""
    if grid.dim == 1:
        val, _ = _lines(grid.axes()[0], values[None, :], target.axes()[0], refine)
        return val[0]
    x0, x1 = grid.axes()
    y0, y1 = target.axes()
    g, _ = _lines(x1, values, y1, refine)          # (n0, m1), -inf on empty rows
    with np.errstate(invalid="ignore"):
        h = np.where(np.isneginf(g), np.inf, -g).T  # (m1, n0)
    r, _ = _lines(x0, h, y0, refine)                # (m1, m0)
    return np.ascontiguousarray(r.T)


def _edge_slopes(u):
    """Per axis: slope at the lower / upper edge where the finite region is truncated."""
    out = []
    vals = u.values
    for ax, h in enumerate(u.grid.spacing):
        v = np.moveaxis(vals, ax, -1)
        with np.errstate(invalid="ignore"):
            lo = v[..., 1] - v[..., 0]
            hi = v[..., -1] - v[..., -2]
            lo = lo[np.isfinite(lo)] / h
            hi = hi[np.isfinite(hi)] / h
        out.append((float(lo.min()) if lo.size else None, float(hi.max()) if hi.size else None))
    return out


def _slope_tol(s, spacing):
    return 1e-9 * (1.0 + abs(s)) + 1e-12 * spacing


def fenchel_conjugate(u, target=None, *, refine=False, check=True):
    """Fenchel conjugate of ``u`` sampled on ``target``.

    Parameters
    ----------
    u : PotentialGrid
    target : Grid, optional
        Slope grid; defaults to :func:`default_slope_grid`.
    refine : bool
        Improve each value with a local quadratic model of ``u`` around the
        discrete maximizer. Exact for quadratic potentials.
    check : bool
        Raise :class:`SlopeRangeError` when ``target`` misses slopes that the
        truncated potential attains at the window edge.
    """
    if target is None:
        target = default_slope_grid(u)
    if target.dim != u.dim:
        raise ValueError("target grid dimension does not match the potential")
    raw = _transform(u.grid, u.values, target, refine)
    return PotentialGrid(target, _mask_beyond_slopes(u, target, raw, check))


def _mask_beyond_slopes(u, target, raw, check):
    out = raw.copy()
    if u.body is not None:  # dom(u) is the whole story, nothing is truncated
        return out
    mesh = target.mesh()
    for ax, (s_lo, s_hi) in enumerate(_edge_slopes(u)):
        touch_lo, touch_hi = u.touches_edge()[ax]
        hy = target.spacing[ax]
        if touch_lo and s_lo is not None:
            if check and target.lo[ax] > s_lo + _slope_tol(s_lo, hy):
                raise SlopeRangeError(
                    f"slope range exceeded: axis {ax} needs slopes down to {s_lo:.6g}, "
                    f"target starts at {target.lo[ax]:.6g}")
            out[mesh[ax] < s_lo - _slope_tol(s_lo, hy)] = np.inf
        if touch_hi and s_hi is not None:
            if check and target.hi[ax] < s_hi - _slope_tol(s_hi, hy):
                raise SlopeRangeError(
                    f"slope range exceeded: axis {ax} needs slopes up to {s_hi:.6g}, "
                    f"target ends at {target.hi[ax]:.6g}")
            out[mesh[ax] > s_hi + _slope_tol(s_hi, hy)] = np.inf
    return out


def conjugate_at(u, y, *, refine=True):
    """Discrete conjugate of a 1-D potential at arbitrary slopes ``y``.

    No window masking is applied: beyond the attained slopes the value is
    the affine continuation given by the last sample.
    """
    if u.dim != 1:
        raise ValueError("conjugate_at is one-dimensional")
    y = np.asarray(y, dtype=float)
    flat = y.ravel()
    order = np.argsort(flat, kind="stable")
    val, _ = _lines(u.grid.axes()[0], u.values[None, :], flat[order], refine)
    out = np.empty_like(flat)
    out[order] = val[0]
    return out.reshape(y.shape)


def default_slope_grid(u, pad=0.1, n=None):
    """Slope grid spanning the discrete gradients of ``u``, padded by ``pad``."""
    lo, hi, pts = [], [], []
    for ax, h in enumerate(u.grid.spacing):
        with np.errstate(invalid="ignore"):
            d = np.diff(u.values, axis=ax)
            d = d[np.isfinite(d)] / h
        a, b = (float(d.min()), float(d.max())) if d.size else (0.0, 0.0)
        w = b - a
        if w < 1e-12 * max(1.0, abs(a), abs(b)):
            # flat potential: open a unit-scale window whatever the padding
            w = max(1.0, abs(a), abs(b))
            a, b = a - 0.5 * w, b + 0.5 * w
        lo.append(a - pad * w)
        hi.append(b + pad * w)
        pts.append(u.grid.n[ax] if n is None else int(np.atleast_1d(n)[min(ax, np.size(n) - 1)]))
    return aligned_grid(lo, hi, pts)


def aligned_grid(lo, hi, n):
    """Grid covering ``[lo, hi]`` whose nodes are integer multiples of its spacing.

    Keeps ``y = 0`` a node of every slope grid that straddles it, so
    ``u*(0) = -min u`` holds at the node level.
    """
    lo, hi, n = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float), np.atleast_1d(n)
    h = (hi - lo) / (n - 1)
    a = np.floor(lo / h + 1e-9) * h
    b = np.ceil(hi / h - 1e-9) * h
    m = np.round((b - a) / h).astype(int) + 1
    return Grid(a, a + (m - 1) * h, m)


def merge_grids(*grids, max_points=None):
    """Smallest box containing all ``grids`` at their finest spacing."""
    dim = grids[0].dim
    lo = np.min([g.lo for g in grids], axis=0)
    hi = np.max([g.hi for g in grids], axis=0)
    h = np.min([g.spacing for g in grids], axis=0)
    cap = max_points or (MAX_POINTS_1D if dim == 1 else MAX_POINTS_2D)
    n = np.minimum(np.round((hi - lo) / h).astype(int) + 1, cap)
    return aligned_grid(lo, hi, np.maximum(n, 3))


def convex_envelope_1d(u):
    """Lower convex envelope of a 1-D potential, ``+inf`` off its finite hull."""
    x = u.grid.axes()[0]
    hull = kernels.lower_hull(x, np.ascontiguousarray(u.values))
    out = np.full_like(u.values, np.inf)
    sl = slice(hull[0], hull[-1] + 1)
    out[sl] = np.interp(x[sl], x[hull], u.values[hull])
    return out


def fenchel_involution_residual(u, target=None, *, refine=False):
    """Sup-norm gap between ``(u*)*`` and the convex envelope of ``u``.

    Measured on the interior of ``dom(u)`` (first and last finite node of
    every grid line excluded). In 2-D the input itself stands in for its
    envelope.
    """
    us = fenchel_conjugate(u, target, refine=refine)
    uss = _transform(us.grid, us.values, u.grid, refine)
    ref = convex_envelope_1d(u) if u.dim == 1 else u.values
    interior = _interior_mask(u.finite)
    if not interior.any():
        interior = u.finite
    with np.errstate(invalid="ignore"):
        diff = np.abs(uss - ref)[interior]
    diff = np.where(np.isnan(diff), 0.0, diff)  # inf - inf: both off the domain
    return float(diff.max())


def _interior_mask(fin):
    m = fin.copy()
    for ax in range(fin.ndim):
        f = np.moveaxis(fin, ax, -1)
        inner = np.zeros_like(f)
        inner[..., 1:-1] = f[..., :-2] & f[..., 2:]
        m &= np.moveaxis(inner, -1, ax)
    return m


def spike(dim=1, value=0.0, spacing=1.0):
    """``I_{0} + value`` on a 3-point grid per axis."""
    h = np.broadcast_to(np.atleast_1d(spacing).astype(float), (dim,))
    g = Grid(-h, h, [3] * dim)
    vals = np.full(g.shape, np.inf)
    vals[(1,) * dim] = value
    return PotentialGrid(g, vals)


def right_scalar_mult(u, alpha):
    """Epigraph dilation ``(u alpha)(x) = alpha u(x / alpha)``; ``alpha = 0`` gives ``I_{0}``."""
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha == 0:
        return spike(u.dim, 0.0, u.grid.spacing)
    body = u.body.scaled(alpha) if u.body is not None else None
    return PotentialGrid(u.grid.scaled(alpha), alpha * u.values, body)


def inf_convolution(u, v, grid=None, *, slope_grid=None, refine=False):
    """Infimal convolution ``u □ v`` computed as ``(u* + v*)*``.

    ``grid`` defaults to the box ``[lo_u + lo_v, hi_u + hi_v]`` at the finer
    of the two spacings. When both potentials carry a domain body the result
    is finite exactly on the Minkowski sum of the bodies.
    """
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    if slope_grid is None:
        slope_grid = merge_grids(default_slope_grid(u), default_slope_grid(v))
    us = fenchel_conjugate(u, slope_grid, refine=refine)
    vs = fenchel_conjugate(v, slope_grid, refine=refine)
    ws = us.values + vs.values
    if not np.isfinite(ws).any():
        raise SlopeRangeError("slope range exceeded: conjugates have disjoint finite ranges")
    if grid is None:
        lo = np.add(u.grid.lo, v.grid.lo)
        hi = np.add(u.grid.hi, v.grid.hi)
        h = np.minimum(u.grid.spacing, v.grid.spacing)
        grid = Grid.with_spacing(lo, hi, h)
    body = u.body.minkowski_sum(v.body) if (u.body is not None and v.body is not None) else None
    return conjugate_back(PotentialGrid(slope_grid, ws), grid, body=body, refine=refine)


def conjugate_back(ws, grid, body=None, *, refine=False):
    """Conjugate a dual potential onto ``grid``; with ``body``, finite exactly on it."""
    if body is None:
        return fenchel_conjugate(ws, grid, refine=refine, check=False)
    raw = _transform(ws.grid, ws.values, grid, refine)
    inside = body.contains(grid.points()).reshape(grid.shape)
    return PotentialGrid(grid, np.where(inside, raw, np.inf), body)


def gradient(u):
    """Finite-difference gradient, shape ``(dim, *shape)``, NaN off the domain.

    Central differences inside the finite region, one-sided at its edge.
    """
    out = np.full((u.dim,) + u.values.shape, np.nan)
    pad = [(0, 0)] * (u.dim - 1) + [(1, 1)]
    for ax, h in enumerate(u.grid.spacing):
        v = np.moveaxis(u.values, ax, -1)
        f = np.isfinite(v)
        fp = np.pad(f, pad, constant_values=False)
        vp = np.pad(v, pad, constant_values=np.inf)
        left, right = fp[..., :-2], fp[..., 2:]
        with np.errstate(invalid="ignore"):
            cen = (vp[..., 2:] - vp[..., :-2]) / (2 * h)
            fwd = (vp[..., 2:] - v) / h
            bwd = (v - vp[..., :-2]) / h
        d = np.where(f & left & right, cen,
                     np.where(f & right, fwd, np.where(f & left, bwd, np.nan)))
        out[ax] = np.moveaxis(d, -1, ax)
    return out


def convexity_margin(u):
    """Smallest discrete second directional derivative along axes and diagonals.

    Only triples of finite nodes count; ``+inf`` when there are none.
    """
    v = u.values
    best = np.inf
    with np.errstate(invalid="ignore"):
        for ax, h in enumerate(u.grid.spacing):
            w = np.moveaxis(v, ax, -1)
            sd = (w[..., 2:] - 2 * w[..., 1:-1] + w[..., :-2]) / h**2
            sd = sd[np.isfinite(sd)]
            if sd.size:
                best = min(best, float(sd.min()))
        if u.dim == 2:
            h0, h1 = u.grid.spacing
            d2 = h0**2 + h1**2
            for sd in (
                (v[2:, 2:] - 2 * v[1:-1, 1:-1] + v[:-2, :-2]) / d2,
                (v[2:, :-2] - 2 * v[1:-1, 1:-1] + v[:-2, 2:]) / d2,
            ):
                sd = sd[np.isfinite(sd)]
                if sd.size:
                    best = min(best, float(sd.min()))
    return best
