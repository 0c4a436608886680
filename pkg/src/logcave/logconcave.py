"""Log-concave functions ``f = exp(-u)`` and their Minkowski-type algebra.

``alpha . f (+) beta . g`` is ``exp(-w)`` with ``w = (u alpha) □ (v beta)``;
on the dual side this is simply ``w* = alpha u* + beta v*``, which is how
it is computed here.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bodies import psum_body
from .conjugate import (
    _transform,
    aligned_grid,
    conjugate_back,
    convexity_margin,
    default_slope_grid,
    fenchel_conjugate,
    gradient,
    right_scalar_mult,
    spike,
)
from .grid import Grid, PotentialGrid

__all__ = [
    "LogConcaveFn",
    "ClassReport",
    "classify",
    "oplus",
    "scale",
    "translate",
    "shared_slope_grid",
    "dual_sum",
    "make_gaussian",
    "make_power_of_support",
    "make_indicator",
    "make_spike",
    "from_potential",
    "psum_body",
    "gaussian_constant",
]

CLASS_TAGS = ("A", "Aprime", "Adoubleprime")

SUPERLINEAR_RATIO = 1.5
BLOWUP_FACTOR = 10.0
TAIL_REL = 1e-8
DUAL_SPACING_1D = 5e-3


def gaussian_constant(dim):
    """``c_n = (2 pi)^(-n/2)``."""
    return (2 * math.pi) ** (-dim / 2)


class LogConcaveFn:
    """``f = exp(-u)`` for a sampled convex potential ``u``.

    Parameters
    ----------
    potential : PotentialGrid
    class_tag : {"A", "Aprime", "Adoubleprime"}, optional
        Assigned by :func:`classify` when omitted.
    body : ConvexBody, optional
        Domain of ``u``; defaults to ``potential.body``. Required for the
        ``Adoubleprime`` class.
    """

    def __init__(self, potential, class_tag=None, body=None):
        if body is not None and potential.body is None:
            potential = PotentialGrid(potential.grid, potential.values, body)
        self.potential = potential
        if class_tag is None:
            class_tag = classify(self).tag
        if class_tag not in CLASS_TAGS:
            raise ValueError(f"unknown class tag {class_tag!r}")
        if class_tag == "Adoubleprime" and self.body is None:
            raise ValueError("class Adoubleprime needs a domain body")
        self.class_tag = class_tag

    @property
    def body(self):
        return self.potential.body

    @property
    def grid(self):
        return self.potential.grid

    @property
    def dim(self):
        return self.potential.dim

    @property
    def u(self):
        return self.potential.values

    def values(self):
        """Samples of ``f`` (zero off the domain)."""
        with np.errstate(over="ignore"):
            return np.exp(-self.potential.values)

    def __call__(self, *x):
        """Linear interpolation of ``f`` at the given coordinates (1-D only)."""
        if self.dim != 1:
            raise NotImplementedError("point evaluation is one-dimensional")
        return np.interp(x[0], self.grid.axes()[0], self.values(), left=0.0, right=0.0)

    def conjugate(self, slope_grid=None, refine=True, check=True):
        return fenchel_conjugate(self.potential, slope_grid, refine=refine, check=check)

    def with_potential(self, potential, class_tag=None):
        return LogConcaveFn(potential, class_tag)

    def __repr__(self):
        return f"LogConcaveFn(class={self.class_tag}, grid={self.grid}, body={self.body})"


# -- classification --------------------------------------------------------


@dataclass
class ClassReport:
    """Finite-window class diagnostics. Advisory: samples cannot prove membership."""

    tag: str
    superlinear: bool
    superlinear_ratio: float
    convexity_margin: float
    strictly_convex: bool
    boundary_blowup: bool
    blowup_ratio: float
    minorant: tuple
    minorant_ok: bool
    notes: list = field(default_factory=list)

    def to_json(self):
        return {
            "tag": self.tag,
            "superlinear": self.superlinear,
            "superlinear_ratio": _num(self.superlinear_ratio),
            "convexity_margin": _num(self.convexity_margin),
            "strictly_convex": self.strictly_convex,
            "boundary_blowup": self.boundary_blowup,
            "blowup_ratio": _num(self.blowup_ratio),
            "minorant": [_num(v) for v in self.minorant],
            "minorant_ok": self.minorant_ok,
            "notes": list(self.notes),
            "advisory": True,
        }


def _num(v):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return None
    return v


def _radii(u):
    pts = u.grid.points()
    vals = u.values.ravel()
    fin = np.isfinite(vals)
    x_min = pts[np.argmin(np.where(fin, vals, np.inf))]
    r = np.linalg.norm(pts - x_min, axis=1)
    return r, vals, fin


def _superlinearity(u):
    r, vals, fin = _radii(u)
    R = r[fin].max()
    if R <= 0:  # a single finite node
        return math.nan
    q = np.where(fin & (r > 0), (vals - vals[fin].min()) / np.where(r > 0, r, 1.0), np.nan)
    outer = q[fin & (r >= 0.8 * R)]
    mid = q[fin & (r >= 0.4 * R) & (r <= 0.6 * R)]
    if outer.size == 0 or mid.size == 0:
        return math.nan
    m = float(np.nanmean(mid))
    if m <= 0:
        return math.inf if np.nanmean(outer) > 0 else math.nan
    return float(np.nanmean(outer)) / m


def _minorant(u):
    """Fit ``a |x| + b <= u`` with ``a > 0`` on the window."""
    pts = u.grid.points()
    vals = u.values.ravel()
    fin = np.isfinite(vals)
    r = np.linalg.norm(pts, axis=1)
    if u.body is not None:
        # u is +inf off a bounded set, any slope works
        a = 1.0
        return a, float(np.min(vals[fin] - a * r[fin]))
    R = r[fin].max()
    if R <= 0:
        return 0.0, float(vals[fin].min())
    far = fin & (r >= 0.5 * R)
    a = float(np.min((vals[far] - vals[fin].min()) / r[far])) if far.any() else 0.0
    b = float(np.min(vals[fin] - a * r[fin]))
    return a, b


def _boundary_layer(fin, width=3):
    """Finite nodes within ``width`` cells of the edge of the finite region."""
    inner = fin.copy()
    for _ in range(width):
        nxt = inner.copy()
        for ax in range(fin.ndim):
            f = np.moveaxis(inner, ax, -1)
            g = np.zeros_like(f)
            g[..., 1:-1] = f[..., :-2] & f[..., 2:]
            nxt &= np.moveaxis(g, -1, ax)
        inner = nxt
    return fin & ~inner, inner


def _blowup_ratio(u):
    grad = gradient(u)
    norm = np.sqrt(np.nansum(grad**2, axis=0))
    fin = u.finite
    layer, inner = _boundary_layer(fin)
    if not inner.any() or not layer.any():
        return math.nan
    med = float(np.median(norm[inner]))
    edge = float(np.median(norm[layer]))
    if med == 0:
        return math.inf if edge > 0 else 0.0
    return edge / med


def classify(f):
    """Assign ``A`` / ``Aprime`` / ``Adoubleprime`` from window diagnostics.

    ``Aprime`` needs a potential finite on the whole window, superlinear
    growth (mean of ``(u - min u)/|x - argmin|`` on the outer 20% of the
    window at least 1.5 times its value on the mid annulus) and a positive
    discrete convexity margin. ``Adoubleprime`` needs a domain body, the
    finite region filling it, and gradients in the last 3 cells before the
    boundary at least 10 times the interior median.
    """
    u = f.potential if isinstance(f, LogConcaveFn) else f
    notes = ["diagnostics on a finite window; not a proof of class membership"]
    margin = convexity_margin(u)
    strict = bool(margin > 0)
    a, b = _minorant(u)
    minorant_ok = a > 0 or u.body is not None
    if u.body is None:
        ratio = _superlinearity(u)
        superlinear = bool(ratio >= SUPERLINEAR_RATIO)
        blow, blow_ok = math.nan, False
        if bool(np.all(u.finite)) and superlinear and strict:
            tag = "Aprime"
        else:
            tag = "A"
            if not np.all(u.finite):
                notes.append("potential not finite on the whole window")
    else:
        ratio, superlinear = math.nan, False
        blow = _blowup_ratio(u)
        blow_ok = bool(blow >= BLOWUP_FACTOR)
        fills = _fills_body(u)
        if not fills:
            notes.append("finite region does not fill the domain body")
        tag = "Adoubleprime" if (blow_ok and fills and strict) else "A"
    if not minorant_ok:
        notes.append("no linear minorant with positive slope on the window")
    return ClassReport(tag, superlinear, ratio, margin, strict, blow_ok, blow, (a, b), minorant_ok, notes)


def _fills_body(u):
    """Every node at least one cell inside the body is finite."""
    g = u.grid
    h = max(g.spacing)
    pts = g.points()
    body = u.body
    if body.dim == 1:
        a, b = body.interval
        deep = (pts[:, 0] > a + h * 1.01) & (pts[:, 0] < b - h * 1.01)
    else:
        deep = _inset(body, pts, h)
    return bool(np.all(u.finite.ravel()[deep]))


def _inset(body, pts, h):
    v = body.vertices
    w = np.roll(v, -1, axis=0)
    e = w - v
    n = np.c_[e[:, 1], -e[:, 0]] / np.hypot(e[:, 0], e[:, 1])[:, None]
    off = pts @ n.T - np.einsum("ij,ij->i", n, v)
    return np.all(off < -1.01 * h * math.sqrt(2), axis=1)


# -- constructors ----------------------------------------------------------


def _default_grid(dim, half=8.0, n=None):
    if dim == 1:
        return Grid([-half], [half], [n or 4001])
    return Grid([-half] * 2, [half] * 2, [n or 321] * 2)


def _tail_estimate(u):
    """Mass of ``exp(-u)`` beyond the window, from supporting lines at the edges."""
    total = 0.0
    vals = u.values
    for ax, h in enumerate(u.grid.spacing):
        v = np.moveaxis(vals, ax, -1)
        other = u.grid.cell_volume / h
        for last, prev in ((v[..., -1], v[..., -2]), (v[..., 0], v[..., 1])):
            with np.errstate(invalid="ignore", over="ignore"):
                s = (last - prev) / h
                ok = np.isfinite(last) & np.isfinite(s)
            if not ok.any():
                continue
            if np.any(s[ok] <= 0):
                return math.inf
            total += float(np.sum(np.exp(-last[ok]) / s[ok])) * other
    return total


def from_potential(func, grid=None, *, body=None, class_tag=None, dim=None, max_growth=8):
    """Sample ``u = func(*coords)`` and wrap ``exp(-u)``.

    Without a body the window is enlarged (same spacing) until the tail
    mass estimated from the edge supporting lines is below ``1e-8 J``.
    """
    if grid is None:
        grid = _default_grid(dim or (body.dim if body is not None else 1))
    if body is not None:
        return LogConcaveFn(PotentialGrid.from_function(func, grid, body), class_tag)
    for _ in range(max_growth):
        u = PotentialGrid.from_function(func, grid)
        fin = u.values[u.finite]
        J = float(np.sum(np.exp(-fin))) * grid.cell_volume
        if _tail_estimate(u) < TAIL_REL * J:
            break
        c = 0.5 * (np.asarray(grid.lo) + np.asarray(grid.hi))
        half = 0.75 * (np.asarray(grid.hi) - np.asarray(grid.lo))
        grid = Grid.with_spacing(c - half, c + half, grid.spacing)
    else:
        warnings.warn("window enlargement did not bring the tail mass below tolerance")
    return LogConcaveFn(u, class_tag)


def make_gaussian(dim=1, grid=None):
    """The standard Gaussian ``gamma_n = c_n exp(-|x|^2 / 2)``."""
    if grid is None:
        grid = _default_grid(dim)
    if grid.dim != dim:
        raise ValueError("grid dimension does not match")
    half = min(min(-np.asarray(grid.lo)), min(np.asarray(grid.hi)))
    if half < 6.0:
        tail = math.erfc(half / math.sqrt(2)) * dim
        if tail > 1e-6:
            warnings.warn(f"window too small for the Gaussian: tail mass {tail:.2e}")
    logc = math.log(gaussian_constant(dim))
    u = PotentialGrid.from_function(lambda *x: 0.5 * sum(xi**2 for xi in x) - logc, grid)
    return LogConcaveFn(u, "Aprime")


def _body_grid(body, n=None, pad_cells=0):
    lo, hi = body.bounding_box()
    if body.dim == 1:
        n = n or 4001
        h = (hi[0] - lo[0]) / (n - 1)
        return Grid(lo - pad_cells * h, hi + pad_cells * h, [n + 2 * pad_cells])
    n = n or 321
    w = (hi - lo) / (n - 1)
    return Grid(lo - (pad_cells + 1) * w, hi + (pad_cells + 1) * w, [n + 2 * pad_cells + 2] * 2)


def make_indicator(body, grid=None, n=None):
    """``exp(-I_K)``: 1 on ``K``, 0 outside. The 1-D default grid has nodes at the endpoints."""
    grid = grid or _body_grid(body, n, pad_cells=2)
    u = PotentialGrid.from_function(lambda *x: np.zeros_like(x[0]), grid, body)
    return LogConcaveFn(u, "A")


def make_power_of_support(body, q, grid=None, n=None):
    """``exp(-(1/q) h_{K°}^q)``, or ``exp(-I_K)`` for ``q = inf``."""
    if not body.contains_origin_interior():
        raise ValueError("the origin must lie in the interior of the body")
    if math.isinf(q):
        return make_indicator(body, grid, n)
    if not q > 1:
        raise ValueError("q must be in (1, inf]")
    if grid is None:
        lo, hi = body.bounding_box()
        R = float(max(np.abs(lo).max(), np.abs(hi).max()))
        # u >= 40 and slope >= 10 on the window edge, so conjugates of
        # different bodies share a usable slope range
        half = max(R * (q * 40.0) ** (1.0 / q), min((10.0 * R**q) ** (1.0 / (q - 1)), 50 * R))
        grid = _default_grid(body.dim, half, n)

    def pot(*x):
        pts = np.stack([np.ravel(xi) for xi in x], axis=-1)
        g = body.gauge(pts[:, 0] if body.dim == 1 else pts)
        return (np.abs(g) ** q / q).reshape(np.shape(x[0]))

    return LogConcaveFn(PotentialGrid.from_function(pot, grid), None)


def make_spike(dim=1, value=0.0, spacing=1e-3):
    """``exp(-(I_{0} + value))``; acts as ``exp(-value)`` times the identity for (+)."""
    return LogConcaveFn(spike(dim, value, spacing), "A")


def translate(f, x0):
    """``x -> f(x - x0)``; the grid moves with the function, so this is exact."""
    return LogConcaveFn(f.potential.shifted(x0), f.class_tag)


def scale(f, alpha):
    """``alpha . f = exp(-(u alpha))``."""
    pot = right_scalar_mult(f.potential, alpha)
    tag = f.class_tag if alpha > 0 else "A"
    return LogConcaveFn(pot, tag)


# -- the (+) operation -----------------------------------------------------


def shared_slope_grid(*fns, pad=0.1):
    """One slope grid covering the discrete gradients of every input."""
    grids = [default_slope_grid(f.potential if isinstance(f, LogConcaveFn) else f, pad) for f in fns]
    dim = grids[0].dim
    lo = np.min([g.lo for g in grids], axis=0)
    hi = np.max([g.hi for g in grids], axis=0)
    if dim == 1:
        h = min(min(g.spacing[0] for g in grids), DUAL_SPACING_1D)
        n = min(int(math.ceil((hi[0] - lo[0]) / h)) + 1, 400_001)
        return aligned_grid(lo, hi, [n])
    n = [min(max(g.n[ax] for g in grids), 2001) for ax in range(dim)]
    return aligned_grid(lo, hi, n)


def dual_sum(fns, coeffs, slope_grid, refine=True):
    """``sum_i c_i u_i*`` on ``slope_grid`` (zero coefficients drop out)."""
    total = np.zeros(slope_grid.shape)
    for f, c in zip(fns, coeffs):
        if c == 0:
            continue
        phi = f.conjugate(slope_grid, refine=refine).values
        total = total + c * phi
    return PotentialGrid(slope_grid, total)


def _output_grid(f, g, alpha, beta, body, n=None):
    if body is not None and body.dim == 1:
        a, b = body.interval
        n = n or max(f.grid.n[0], g.grid.n[0])
        return Grid([a], [b], [n])
    lo = alpha * np.asarray(f.grid.lo) + beta * np.asarray(g.grid.lo)
    hi = alpha * np.asarray(f.grid.hi) + beta * np.asarray(g.grid.hi)
    # a single coefficient of zero leaves the other box unchanged
    if alpha == 0:
        lo, hi = beta * np.asarray(g.grid.lo), beta * np.asarray(g.grid.hi)
    if beta == 0:
        lo, hi = alpha * np.asarray(f.grid.lo), alpha * np.asarray(f.grid.hi)
    nn = n or tuple(max(a, b) for a, b in zip(f.grid.n, g.grid.n))
    return Grid(lo, hi, nn)


def _combined_body(f, g, alpha, beta):
    if f.body is None or g.body is None:
        return None
    if alpha == 0:
        return g.body.scaled(beta)
    if beta == 0:
        return f.body.scaled(alpha)
    return f.body.minkowski_sum(g.body, alpha, beta)


def oplus(f, g, alpha=1.0, beta=1.0, *, grid=None, slope_grid=None, refine=True, n=None,
          shortcut=True):
    """``alpha . f (+) beta . g``.

    Parameters
    ----------
    f, g : LogConcaveFn
    alpha, beta : float
        Nonnegative, not both zero.
    grid : Grid, optional
        Output grid. Defaults to ``alpha box_f + beta box_g`` with as many
        points as the finer input, or in 1-D to a grid spanning the domain
        body exactly when both inputs carry one.
    slope_grid : Grid, optional
        Dual grid shared by both conjugates; see :func:`shared_slope_grid`.
    shortcut : bool
        Return ``f`` itself for ``alpha = 1, beta = 0``. Disable to push
        the identity through the same numerical pipeline.

    Raises
    ------
    SlopeRangeError
        When ``slope_grid`` misses slopes attained by a truncated input.
    """
    alpha, beta = float(alpha), float(beta)
    if alpha < 0 or beta < 0 or (alpha == 0 and beta == 0):
        raise ValueError("coefficients must be nonnegative and not both zero")
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if shortcut and beta == 0 and alpha == 1:
        return f
    if shortcut and alpha == 0 and beta == 1:
        return g
    if slope_grid is None:
        slope_grid = shared_slope_grid(f, g)
    ws = dual_sum((f, g), (alpha, beta), slope_grid, refine)
    body = _combined_body(f, g, alpha, beta)
    if grid is None:
        grid = _output_grid(f, g, alpha, beta, body, n)
    w = conjugate_back(ws, grid, body=body, refine=refine)
    tag = _closure_tag(f, g, alpha, beta)
    return LogConcaveFn(w, tag)


def _closure_tag(f, g, alpha, beta):
    tags = {t for t, c in ((f.class_tag, alpha), (g.class_tag, beta)) if c > 0}
    if len(tags) == 1:
        t = tags.pop()
        if t == "Aprime":
            return "Aprime"
        if t == "Adoubleprime":
            return "Adoubleprime"
    return None  # reclassify


def conjugate_stencil(ws, x, delta, refine=True):
    """Values of ``(ws)*`` on the ``3^dim`` stencil centred at ``x`` with half-width ``delta``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = Grid(x - delta, x + delta, [3] * x.size)
    return _transform(ws.grid, ws.values, g, refine)
