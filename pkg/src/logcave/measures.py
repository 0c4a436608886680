"""Area measures of log-concave functions and the representation of δJ.

``mu(f)`` is the image of ``f dx`` under ``∇u``; ``sigma(f)`` is the image
of ``f`` restricted to the boundary of ``dom(u)`` under the Gauss map. The
first variation along an admissible ``g`` is ``∫ v* dmu(f)`` plus, for
potentials with compact domain, ``∫ h_L dsigma(f)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.ndimage import distance_transform_edt

from .conjugate import _transform, conjugate_at, convexity_margin, default_slope_grid, fenchel_conjugate
from .grid import Grid, PotentialGrid
from .logconcave import dual_sum, shared_slope_grid

__all__ = [
    "HypothesisError",
    "ParticleMeasure",
    "SphereMeasure",
    "area_measure_mu",
    "area_measure_sigma",
    "admissible_c_max",
    "delta_J_repr_Aprime",
    "delta_J_repr_Adoubleprime",
    "pointwise_derivative_check",
    "conjugate_point",
]

N_BINS = 64


class HypothesisError(ValueError):
    """A hypothesis of a representation formula is not met."""


@dataclass
class ParticleMeasure:
    """Weighted point cloud; ``points`` has shape ``(N, dim)``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.points.shape[0] != self.weights.size:
            raise ValueError("points and weights differ in length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def total(self):
        return float(self.weights.sum())

    def barycenter(self):
        """``∫ y dmu(y)`` (unnormalized first moment)."""
        return self.weights @ self.points

    def integrate(self, func_values):
        return float(np.dot(self.weights, func_values))

    def binned_density(self, bins=N_BINS, range=None):
        """Histogram density (1-D), ``bins`` uniform bins over the particle range."""
        if self.dim != 1:
            raise ValueError("binned density is one-dimensional")
        y = self.points[:, 0]
        if range is None:
            range = (y.min(), y.max())
        dens, edges = np.histogram(y, bins=bins, range=range, weights=self.weights, density=False)
        width = np.diff(edges)
        return 0.5 * (edges[1:] + edges[:-1]), dens / width

    def to_json(self):
        pts = self.points[:, 0] if self.dim == 1 else self.points
        return {"points": pts.tolist(), "weights": self.weights.tolist()}


@dataclass
class SphereMeasure:
    """Atoms on the unit sphere: ``{-1, +1}`` in 1-D, angles in 2-D."""

    dim: int
    directions: np.ndarray  # (-1, +1) in 1-D, angles in 2-D
    weights: np.ndarray

    @property
    def total(self):
        return float(np.sum(self.weights))

    def unit_vectors(self):
        if self.dim == 1:
            return np.asarray(self.directions, dtype=float)[:, None]
        th = np.asarray(self.directions, dtype=float)
        return np.c_[np.cos(th), np.sin(th)]

    def barycenter(self):
        return np.asarray(self.weights) @ self.unit_vectors()

    def atom(self, sign):
        if self.dim != 1:
            raise ValueError("atoms by sign exist in 1-D only")
        return float(self.weights[0 if sign < 0 else 1])

    def to_json(self):
        if self.dim == 1:
            return {"dim": 1, "atoms": {"-1": float(self.weights[0]), "+1": float(self.weights[1])}}
        return {"dim": 2, "theta": np.asarray(self.directions).tolist(), "density": np.asarray(self.weights).tolist()}


# -- mu(f) and sigma(f) ----------------------------------------------------------


def _require_smooth(f):
    if f.class_tag not in ("Aprime", "Adoubleprime"):
        raise ValueError("area measure needs a class Aprime or Adoubleprime function "
                         "(class A has no smooth interior)")


def _cells(u):
    """Chord gradients and trapezoid masses of every cell whose corners are finite."""
    g = u.grid
    v = u.values
    with np.errstate(over="ignore"):
        fv = np.exp(-v)
    if g.dim == 1:
        h = g.spacing[0]
        ok = np.isfinite(v[1:]) & np.isfinite(v[:-1])
        with np.errstate(invalid="ignore"):
            pos = (v[1:] - v[:-1]) / h
        w = 0.5 * h * (fv[1:] + fv[:-1])
        return pos[ok][:, None], w[ok], ok
    h0, h1 = g.spacing
    c00, c10, c01, c11 = v[:-1, :-1], v[1:, :-1], v[:-1, 1:], v[1:, 1:]
    ok = np.isfinite(c00) & np.isfinite(c10) & np.isfinite(c01) & np.isfinite(c11)
    with np.errstate(invalid="ignore"):
        gx = 0.5 * ((c10 - c00) + (c11 - c01)) / h0
        gy = 0.5 * ((c01 - c00) + (c11 - c10)) / h1
    w = 0.25 * h0 * h1 * (fv[:-1, :-1] + fv[1:, :-1] + fv[:-1, 1:] + fv[1:, 1:])
    return np.c_[gx[ok], gy[ok]], w[ok], ok


def area_measure_mu(f):
    """``mu(f)`` as one particle per cell of ``dom(u)``.

    The particle sits at the gradient of ``u`` at the cell centre (chord
    slopes) and carries the trapezoid mass of ``f`` on the cell, so the
    total equals the trapezoid value of ``J(f)`` on the same cells.
    """
    _require_smooth(f)
    pos, w, _ = _cells(f.potential)
    return ParticleMeasure(pos, w)


def _filled_f(u):
    """``f`` with off-domain nodes copied from the nearest finite node."""
    fin = u.finite
    with np.errstate(over="ignore"):
        fv = np.exp(-u.values)
    idx = distance_transform_edt(~fin, return_distances=False, return_indices=True)
    return fv[tuple(idx)]


def boundary_values(f):
    """``(f(a), f(b))`` for a 1-D domain ``[a, b]``, extrapolating when an endpoint is off-grid."""
    a, b = f.body.interval
    x = f.grid.axes()[0]
    h = f.grid.spacing[0]
    fv = f.values()
    fin = f.potential.finite
    out = []
    for end, step in ((a, 1), (b, -1)):
        k = int(np.argmin(np.abs(x - end)))
        if abs(x[k] - end) <= 1e-9 * max(1.0, abs(end)) + 1e-12:
            out.append(float(fv[k]) if fin[k] else 0.0)
            continue
        idx = np.flatnonzero(fin)
        i = idx[0] if step == 1 else idx[-1]
        j = i + step
        d = abs(x[i] - end)
        val = fv[i] + (fv[i] - fv[j]) * d / h if 0 <= j < x.size and fin[j] else fv[i]
        out.append(max(0.0, float(val)))
    return tuple(out)


def area_measure_sigma(f, samples_per_edge=64):
    """``sigma(f)``: atoms ``f(a)`` at ``-1`` and ``f(b)`` at ``+1`` in 1-D;
    in 2-D the mass ``∫_edge f`` at each outer edge normal of the polygon."""
    if f.body is None:
        raise ValueError("sigma(f) needs a domain body")
    if f.dim == 1:
        fa, fb = boundary_values(f)
        return SphereMeasure(1, np.array([-1.0, 1.0]), np.array([fa, fb]))
    body = f.body
    normals, lengths = body.surface_area_measure()
    v = body.vertices
    w = np.roll(v, -1, axis=0)
    interp = RegularGridInterpolator(f.grid.axes(), _filled_f(f.potential), bounds_error=False, fill_value=0.0)
    s = (np.arange(samples_per_edge) + 0.5) / samples_per_edge
    weights = []
    for p, q, ln in zip(v, w, lengths):
        pts = p[None, :] + s[:, None] * (q - p)[None, :]
        weights.append(ln * float(np.mean(interp(pts))))
    theta = np.arctan2(normals[:, 1], normals[:, 0])
    return SphereMeasure(2, theta, np.array(weights))


# -- admissibility -------------------------------------------------------------


def _trusted_slopes(f, g, n):
    """Slope box where both conjugates are reliable, shrunk by 5% per side."""
    ga, gb = default_slope_grid(f.potential, pad=0.0), default_slope_grid(g.potential, pad=0.0)
    lo = np.maximum(ga.lo, gb.lo)
    hi = np.minimum(ga.hi, gb.hi)
    if f.body is not None and g.body is not None:
        lo, hi = np.minimum(ga.lo, gb.lo), np.maximum(ga.hi, gb.hi)
    w = hi - lo
    if np.any(w <= 0):
        raise HypothesisError("the two functions share no slope range")
    return Grid(lo + 0.05 * w, hi - 0.05 * w, [n] * f.dim)


def admissible_c_max(f, g, *, tol_rel=1e-6, slope_grid=None, c_cap=1e6):
    """Largest ``c >= 0`` with ``u* - c v*`` convex on the shared slope range.

    Convexity means a discrete convexity margin of at least
    ``-tol_rel * max|u*|``. Bisection to a relative accuracy of ``1e-6``.
    ``g`` is an admissible perturbation of ``f`` when the result is positive.
    """
    if slope_grid is None:
        slope_grid = _trusted_slopes(f, g, 801 if f.dim == 1 else 81)
    phi = fenchel_conjugate(f.potential, slope_grid, refine=True, check=False).values
    psi = fenchel_conjugate(g.potential, slope_grid, refine=True, check=False).values
    fin = np.isfinite(phi) & np.isfinite(psi)
    tol = tol_rel * max(1.0, float(np.max(np.abs(phi[fin]))))

    def ok(c):
        d = np.where(fin, phi - c * psi, np.inf)
        return convexity_margin(PotentialGrid(slope_grid, d)) >= -tol

    if not ok(0.0):
        return 0.0
    hi = 1.0
    while ok(hi):
        hi *= 2
        if hi > c_cap:
            return math.inf
    lo = hi / 2 if hi > 1 else 0.0
    while hi - lo > 1e-6 * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


# -- representation formulas -------------------------------------------------


def conjugate_point(potential, y, refine=True):
    """``u*(y)`` at a single point of any dimension (no window masking)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if potential.dim == 1:
        return float(conjugate_at(potential, y, refine=refine)[0])
    d = 1e-6 * (1 + np.abs(y))
    vals = _transform(potential.grid, potential.values, Grid(y - d, y + d, [3] * y.size), refine)
    return float(vals[(1,) * y.size])


def _psi_at(g, points):
    """``v*`` at an ``(N, dim)`` array of slopes."""
    if g.dim == 1:
        return conjugate_at(g.potential, points[:, 0], refine=True)
    lo, hi = points.min(axis=0), points.max(axis=0)
    pad = 0.01 * (hi - lo) + 1e-9
    n = [min(2001, max(201, int((b - a + 2 * p) / 0.01))) for a, b, p in zip(lo, hi, pad)]
    sg = Grid(lo - pad, hi + pad, n)
    # particles lie inside the attained slope range, so the unmasked
    # transform is exact there and finite on the interpolation stencil
    psi = _transform(g.potential.grid, g.potential.values, sg, True)
    interp = RegularGridInterpolator(sg.axes(), psi, bounds_error=False, fill_value=None)
    return interp(points)


def _check_admissible(f, g, where):
    c = admissible_c_max(f, g)
    if c > 0:
        return c
    if f.dim == 1:
        warnings.warn(f"{where}: g is not an admissible perturbation of f on the sampled window; "
                      "in one dimension the formula is evaluated anyway and may equal +inf")
        return c
    raise HypothesisError(f"{where}: hypothesis not met (g is not an admissible perturbation of f)")


def delta_J_repr_Aprime(f, g, *, check_admissible=True):
    """``∫ v*(∇u(x)) f(x) dx`` over the cells of ``dom(u)``."""
    if f.class_tag != "Aprime" or g.class_tag != "Aprime":
        raise ValueError("both functions must be class Aprime")
    if check_admissible:
        _check_admissible(f, g, "delta_J_repr_Aprime")
    mu = area_measure_mu(f)
    return mu.integrate(_psi_at(g, mu.points))


def _subsampled(u, stride):
    g = u.grid
    n = g.n[0]
    if (n - 1) % stride:
        return None
    m = (n - 1) // stride + 1
    return PotentialGrid(Grid(g.lo, g.hi, [m]), u.values[::stride], u.body)


def _interior_term(f, g, extrapolate=True):
    """``∫ v* dmu(f)`` with Aitken extrapolation over strides 1, 2, 4.

    Near a boundary where ``|∇u|`` blows up the cell sums converge at a
    fractional rate that is estimated from the three levels.
    """
    sums = []
    for s in (1, 2, 4) if extrapolate else (1,):
        u = _subsampled(f.potential, s)
        if u is None:
            break
        pos, w, _ = _cells(u)
        sums.append(float(np.dot(w, _psi_at(g, pos))))
    S1 = sums[0]
    if len(sums) < 3:
        return S1
    d1, d2 = sums[0] - sums[1], sums[1] - sums[2]
    if d2 == 0 or abs(d1) < 1e-12 * abs(S1):
        return S1
    r = d1 / d2
    if not 0.05 < r < 0.95:
        return S1
    return S1 + d1 * r / (1 - r)


def delta_J_repr_Adoubleprime(f, g, *, check_admissible=True, details=False):
    """``∫ v* dmu(f) + ∫ h_L dsigma(f)`` for one-dimensional inputs.

    With ``details=True`` returns ``(total, interior, boundary)``.
    """
    if f.class_tag != "Adoubleprime" or g.class_tag != "Adoubleprime":
        raise ValueError("both functions must be class Adoubleprime")
    if f.dim != 1:
        raise NotImplementedError("boundary representation implemented in dimension 1 only")
    if check_admissible:
        _check_admissible(f, g, "delta_J_repr_Adoubleprime")
    interior = _interior_term(f, g)
    sigma = area_measure_sigma(f)
    hL = g.body.support(np.array([-1.0, 1.0]))
    boundary = float(hL @ sigma.weights)
    total = interior + boundary
    return (total, interior, boundary) if details else total


def pointwise_derivative_check(f, g, x, t, *, dt=None, delta=None, slope_grid=None):
    """``|d/dt u_t(x) + v*(∇u_t(x))|`` for ``u_t = -log(f (+) t.g)``.

    The time derivative is a central difference and the gradient a central
    difference of the exact discrete infimal convolution at ``x``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    dt = dt or min(1e-3, 0.5 * t)
    delta = delta or 1e-3
    if slope_grid is None:
        slope_grid = shared_slope_grid(f, g)

    def stencil(s):
        ws = dual_sum((f, g), (1.0, s), slope_grid)
        return _transform(ws.grid, ws.values, Grid(x - delta, x + delta, [3] * x.size), True)

    centre = (1,) * x.size
    ddt = (stencil(t + dt)[centre] - stencil(t - dt)[centre]) / (2 * dt)
    st = stencil(t)
    grad = []
    for ax in range(x.size):
        lo, hi = list(centre), list(centre)
        lo[ax], hi[ax] = 0, 2
        grad.append((st[tuple(hi)] - st[tuple(lo)]) / (2 * delta))
    psi = conjugate_point(g.potential, np.array(grad))
    return abs(ddt + psi)
