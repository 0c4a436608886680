"""Total mass, entropy, first variation and perimeter of log-concave functions."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .conjugate import convexity_margin, fenchel_conjugate, gradient
from .grid import Grid
from .logconcave import gaussian_constant, make_gaussian, oplus, shared_slope_grid

__all__ = [
    "ZeroMassError",
    "DeltaJEstimate",
    "quadrature_weights",
    "integrate",
    "total_mass",
    "f_log_f",
    "entropy",
    "delta_J_fd",
    "delta_J_self",
    "perimeter",
    "hg_diagnostic",
    "mean_width",
    "log_mass_profile",
]

TINY = 1e-300
DIVERGENCE_FACTOR = 1e6


class ZeroMassError(ValueError):
    pass


# -- quadrature ------------------------------------------------------------


def _trap_1d(n):
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def quadrature_weights(potential):
    """Composite trapezoid weights for integrals over ``dom(u)``.

    Zero off the domain. In 1-D with a domain body whose endpoints fall
    between nodes, the partial end cells are not covered here; see
    :func:`integrate`.
    """
    g = potential.grid
    w = np.ones(g.shape) * g.cell_volume
    for ax in range(g.dim):
        shape = [1] * g.dim
        shape[ax] = g.n[ax]
        w = w * _trap_1d(g.n[ax]).reshape(shape)
    if potential.body is not None and g.dim == 1:
        # per-segment trapezoid over the finite run
        fin = potential.finite
        idx = np.flatnonzero(fin)
        w = np.zeros(g.shape)
        if idx.size > 1:
            w[idx[0]:idx[-1] + 1] = g.spacing[0]
            w[idx[0]] = w[idx[-1]] = 0.5 * g.spacing[0]
        elif idx.size == 1:
            w[idx] = 0.0
    return np.where(_full_dimensional(potential.finite), w, 0.0)


def _full_dimensional(fin):
    """Finite nodes with a finite neighbour along every axis; a domain of
    lower dimension (a spike, a segment in 2-D) carries no mass."""
    keep = fin.copy()
    for ax in range(fin.ndim):
        f = np.moveaxis(fin, ax, 0)
        nb = np.zeros_like(f)
        nb[1:] |= f[:-1]
        nb[:-1] |= f[1:]
        keep &= np.moveaxis(nb, 0, ax)
    return keep


def _end_cells(potential, fvals):
    """Linear-extrapolation area of the cells cut by the body endpoints (1-D)."""
    if potential.body is None or potential.dim != 1:
        return 0.0
    a, b = potential.body.interval
    x = potential.grid.axes()[0]
    h = potential.grid.spacing[0]
    idx = np.flatnonzero(potential.finite)
    extra = 0.0
    for i, j, end in ((idx[0], idx[0] + 1, a), (idx[-1], idx[-1] - 1, b)):
        d = abs(x[i] - end)
        if d < 1e-9 * h or j < 0 or j >= x.size or not potential.finite[j]:
            continue
        fe = max(0.0, fvals[i] + (fvals[i] - fvals[j]) * d / h)
        extra += 0.5 * d * (fvals[i] + fe)
    return extra


def integrate(potential, integrand):
    """``∫_{dom u} integrand dx`` from node samples; non-finite samples off the domain are ignored."""
    w = quadrature_weights(potential)
    vals = np.where(w > 0, integrand, 0.0)
    return float(np.sum(w * vals)) + _end_cells(potential, np.where(potential.finite, integrand, 0.0))


def total_mass(f):
    """``J(f) = ∫ f dx``."""
    return integrate(f.potential, f.values())


def f_log_f(f):
    """``∫ f log f dx`` with ``f log f = 0`` where ``f < 1e-300``."""
    fv = f.values()
    with np.errstate(invalid="ignore"):
        integrand = np.where(fv > TINY, -f.u * fv, 0.0)
    return integrate(f.potential, integrand)


def entropy(f):
    """``Ent(f) = ∫ f log f - J log J``."""
    J = total_mass(f)
    if J <= 0:
        raise ZeroMassError("zero mass: entropy undefined")
    return f_log_f(f) - J * math.log(J)


def delta_J_self(f):
    """``δJ(f, f) = n J(f) + ∫ f log f``."""
    J = total_mass(f)
    if J <= 0:
        raise ZeroMassError("zero mass")
    return f.dim * J + f_log_f(f)


# -- first variation by finite differences -----------------------------------


@dataclass
class DeltaJEstimate:
    """Estimate of a first variation with its difference-quotient trace."""

    value: float
    error_bar: float
    t_sequence: list = field(default_factory=list)
    method: str = "fd-extrapolated"

    def __post_init__(self):
        ts = [t for t, _ in self.t_sequence]
        if any(b >= a for a, b in zip(ts, ts[1:])):
            raise ValueError("t_sequence must be strictly decreasing")
        if not self.error_bar >= 0:
            raise ValueError("error_bar must be nonnegative")

    @property
    def is_infinite(self):
        return math.isinf(self.value)

    def to_json(self):
        def enc(v):
            return "inf" if v == math.inf else ("-inf" if v == -math.inf else float(v))

        return {
            "value": enc(self.value),
            "error_bar": enc(self.error_bar),
            "trace": [[float(t), enc(q)] for t, q in self.t_sequence],
            "method": self.method,
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def _extrapolate(ts, qs):
    """Value at ``t = 0`` of the quadratic through the last four quotients."""
    k = min(4, len(ts))
    deg = min(2, k - 1)
    return float(np.polyval(np.polyfit(ts[-k:], qs[-k:], deg), 0.0))


def delta_J_fd(f, g, t0=0.1, levels=6, *, slope_grid=None, refine=True, grid_n=None):
    """Right derivative of ``t -> J(f (+) t.g)`` at ``0`` by one-sided differences.

    Quotients are taken at ``t_k = t0 2^-k``; a quadratic in ``t`` through
    the last four is evaluated at ``0``. The error bar is the distance to
    the same fit through the previous four quotients. Every ``J(f (+) t.g)``
    and the baseline at ``t = 0`` share one slope grid, so discretization
    bias common to all ``t`` cancels in the quotients.

    Returns ``+inf`` when the quotients increase and the last one exceeds
    ``1e6 J(f)``.
    """
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    if levels < 3:
        raise ValueError("levels must be at least 3")
    if slope_grid is None:
        slope_grid = shared_slope_grid(f, g)
    J0_exact = total_mass(f)
    if J0_exact <= 0 and f.dim >= 2:
        raise ZeroMassError("J(f) = 0 in dimension >= 2: first variation not available")
    base = oplus(f, g, 1.0, 0.0, slope_grid=slope_grid, refine=refine, n=grid_n, shortcut=False)
    J0 = total_mass(base)
    ts = t0 * 0.5 ** np.arange(levels)
    qs = np.array([(total_mass(oplus(f, g, 1.0, t, slope_grid=slope_grid, refine=refine, n=grid_n)) - J0) / t
                   for t in ts])
    trace = list(zip(ts.tolist(), qs.tolist()))
    scale = max(J0_exact, J0, 1e-300)
    # quotients grow as t decreases when the derivative is infinite
    if np.all(np.diff(qs) > 0) and qs[-1] > DIVERGENCE_FACTOR * scale:
        return DeltaJEstimate(math.inf, 0.0, trace)
    value = _extrapolate(ts, qs)
    if levels >= 5:
        prev = _extrapolate(ts[:-1], qs[:-1])
    else:
        prev = qs[-1] + (qs[-1] - qs[-2]) * ts[-1] / (ts[-2] - ts[-1])
    return DeltaJEstimate(value, abs(value - prev), trace)


def log_mass_profile(f, g, ts, slope_grid=None, refine=True):
    """``log J((1-t).f (+) t.g)`` for each ``t`` in ``ts`` (concave in ``t``)."""
    if slope_grid is None:
        slope_grid = shared_slope_grid(f, g)
    out = []
    for t in ts:
        h = oplus(f, g, 1 - t, t, slope_grid=slope_grid, refine=refine, shortcut=False)
        out.append(math.log(total_mass(h)))
    return np.array(out)


# -- perimeter ---------------------------------------------------------------


def hg_diagnostic(f, slope_grid=None):
    """Lower bound on the Hessian of ``u*`` over the slopes attained by ``f``.

    Returns ``(c, holds)`` where ``holds`` says ``∇²u* >= c Id`` with
    ``c > 0`` on the sampled slope range.
    """
    if slope_grid is None:
        lo, hi, n = [], [], []
        for ax, h in enumerate(f.grid.spacing):
            d = np.diff(f.u, axis=ax) / h
            d = d[np.isfinite(d)]
            a, b = np.quantile(d, [0.02, 0.98])
            lo.append(a)
            hi.append(b)
            n.append(401 if f.dim == 1 else 101)
        slope_grid = Grid(lo, hi, n)
    phi = fenchel_conjugate(f.potential, slope_grid, refine=True, check=False)
    c = convexity_margin(phi)
    return c, bool(c > 0)


def perimeter(f, *, check_hg=True):
    """``P(f) = δJ(f, γ_n) = ½ ∫ |∇u|² f dx + log(c_n) J(f)``."""
    if f.class_tag != "Aprime":
        raise ValueError(f"perimeter needs a class Aprime function, got {f.class_tag}")
    if check_hg:
        c, ok = hg_diagnostic(f)
        if not ok:
            warnings.warn(f"Hessian lower bound on u* not met on the window (c = {c:.3g})")
    grad = gradient(f.potential)
    g2 = np.nansum(grad**2, axis=0)
    fv = f.values()
    J = total_mass(f)
    return 0.5 * integrate(f.potential, g2 * fv) + math.log(gaussian_constant(f.dim)) * J


def mean_width(g, gaussian=None, **fd):
    """``δJ(γ_n, g)``."""
    if gaussian is None:
        gaussian = make_gaussian(g.dim)
    return delta_J_fd(gaussian, g, **fd)
