"""Numerical checks of the inequalities satisfied by log-concave functions.

Every check returns an :class:`InequalityReport`. Its ``gap`` is signed so
that the inequality holds when ``gap >= -tolerance``: ``lhs - rhs`` for
lower bounds on ``lhs``, ``rhs - lhs`` for upper bounds.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal, special
from scipy.interpolate import RegularGridInterpolator

from .conjugate import convexity_margin
from .functionals import (
    DeltaJEstimate,
    delta_J_fd,
    entropy,
    hg_diagnostic,
    integrate as grid_integrate,
    perimeter,
    total_mass,
)
from .grid import Grid, PotentialGrid
from .logconcave import classify, make_power_of_support, oplus, shared_slope_grid

__all__ = [
    "InequalityReport",
    "default_tolerance",
    "translation_alignment",
    "check_prekopa_leindler",
    "check_minkowski_first",
    "check_isoperimetric",
    "check_log_sobolev",
    "pmixed_constant",
    "check_pmixed_mass",
    "check_pmixed_variation",
]


def default_tolerance(lhs, rhs):
    return max(1e-4 * max(abs(lhs), abs(rhs)), 1e-6)


def _enc(v):
    if isinstance(v, (float, np.floating)):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return None
        return float(v)
    if isinstance(v, dict):
        return {k: _enc(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_enc(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    details: dict = field(default_factory=dict)
    sense: str = "ge"  # "ge": lhs >= rhs is asserted, "le": lhs <= rhs
    expect: str = "holds"  # "equality" when the pair is a known equality case

    @property
    def gap(self):
        sign = 1.0 if self.sense == "ge" else -1.0
        if math.isinf(self.lhs) and not math.isinf(self.rhs):
            return sign * math.copysign(math.inf, self.lhs)
        return sign * (self.lhs - self.rhs)

    @property
    def holds(self):
        return self.gap >= -self.tolerance

    @property
    def equality_case_detected(self):
        return abs(self.gap) <= self.tolerance

    @property
    def passes(self):
        """``holds``, and for an expected equality case also equality within tolerance."""
        if self.expect == "equality":
            return self.holds and self.equality_case_detected
        return self.holds

    @property
    def status(self):
        if not self.holds:
            return "violated"
        return "equality" if self.equality_case_detected else "strict"

    def to_json(self):
        return _enc({
            "name": self.name,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "gap": float(self.gap),
            "sense": self.sense,
            "tolerance": float(self.tolerance),
            "holds": bool(self.holds),
            "equality_case_detected": bool(self.equality_case_detected),
            "expect": self.expect,
            "status": self.status,
            "details": self.details,
        })

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def _make(name, lhs, rhs, tol, details=None, sense="ge"):
    tol = default_tolerance(lhs, rhs) if tol is None else float(tol)
    return InequalityReport(name, float(lhs), float(rhs), tol, details or {}, sense)


# -- translation alignment -------------------------------------------------------


def translation_alignment(f, g):
    """Best shift ``x0`` with ``g ≈ f(. - x0)`` and the relative sup-norm residual.

    ``x0`` maximises the discrete cross-correlation of the two functions
    resampled on a common grid (refined by a parabola through the peak).
    """
    dim = f.dim
    h = np.minimum(f.grid.spacing, g.grid.spacing)
    lo = np.minimum(f.grid.lo, g.grid.lo)
    hi = np.maximum(f.grid.hi, g.grid.hi)
    n = np.minimum(np.round((hi - lo) / h).astype(int) + 1, 4001 if dim == 1 else 401)
    common = Grid(lo, hi, n)
    pts = common.points()
    F = _resample(f, pts).reshape(common.shape)
    G = _resample(g, pts).reshape(common.shape)
    corr = signal.correlate(G, F, mode="full", method="fft")
    peak = np.unravel_index(np.argmax(corr), corr.shape)
    x0 = []
    for ax in range(dim):
        k = peak[ax]
        idx = list(peak)
        off = 0.0
        if 0 < k < corr.shape[ax] - 1:
            idx[ax] = k - 1
            cm = corr[tuple(idx)]
            idx[ax] = k + 1
            cp = corr[tuple(idx)]
            c0 = corr[peak]
            den = cm - 2 * c0 + cp
            off = 0.5 * (cm - cp) / den if den != 0 else 0.0
        x0.append((k - (common.n[ax] - 1) + off) * common.spacing[ax])
    x0 = np.array(x0)
    shifted = _resample(f, pts - x0).reshape(common.shape)
    scale = max(float(np.max(np.abs(G))), 1e-300)
    resid = float(np.max(np.abs(shifted - G))) / scale
    return x0, resid


def _resample(f, pts):
    vals = f.values()
    interp = RegularGridInterpolator(f.grid.axes(), vals, bounds_error=False, fill_value=0.0)
    return interp(pts)


# -- Prekopa-Leindler and the Minkowski inequality -----------------------------


def check_prekopa_leindler(f, g, t, *, tol=None, slope_grid=None):
    """``J((1-t).f (+) t.g) >= J(f)^(1-t) J(g)^t``."""
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    slope_grid = slope_grid or shared_slope_grid(f, g)
    lhs = total_mass(oplus(f, g, 1 - t, t, slope_grid=slope_grid))
    Jf, Jg = total_mass(f), total_mass(g)
    rhs = Jf ** (1 - t) * Jg**t
    return _make("prekopa_leindler", lhs, rhs, tol, {"t": t, "J_f": Jf, "J_g": Jg})


def check_minkowski_first(f, g, deltaJ=None, *, tol=None, **fd):
    """``δJ(f, g) >= J(f) (log J(g) + n) + Ent(f)``.

    ``deltaJ`` is computed by finite differences when not given. The
    details record the best translation aligning ``f`` with ``g``, since
    equality holds exactly for translates.
    """
    Jf = total_mass(f)
    if Jf <= 0:
        raise ValueError("J(f) must be positive")
    if deltaJ is None:
        deltaJ = delta_J_fd(f, g, **fd)
    value = deltaJ.value if isinstance(deltaJ, DeltaJEstimate) else float(deltaJ)
    rhs = Jf * (math.log(total_mass(g)) + f.dim) + entropy(f)
    details = {}
    if isinstance(deltaJ, DeltaJEstimate):
        details["delta_J"] = deltaJ.to_json()
    if math.isinf(value):
        return _make("minkowski_first", value, rhs, tol if tol is not None else 1e-6, details)
    x0, resid = translation_alignment(f, g)
    details.update({"translation": x0.tolist(), "translation_residual": resid})
    return _make("minkowski_first", value, rhs, tol, details)


def check_isoperimetric(f, *, tol=None):
    """``P(f) >= n J(f) + Ent(f)``, equality exactly for Gaussian translates (up to scale)."""
    if f.class_tag != "Aprime":
        raise ValueError(f"isoperimetric check needs a class Aprime function, got {f.class_tag}")
    c, ok = hg_diagnostic(f)
    lhs = perimeter(f, check_hg=False)
    rhs = f.dim * total_mass(f) + entropy(f)
    return _make("isoperimetric", lhs, rhs, tol, {"hessian_lower_bound": c, "hessian_condition": ok})


# -- log-Sobolev -------------------------------------------------------------------


_A_KINDS = {
    "square": (lambda s: s**2, lambda s: 2 * s),
}


def check_log_sobolev(nu_potential, h, a_kind="square", c=1.0, *, tol=None):
    """``Ent_nu(a(h)) <= (1/c) ∫ a'(h)² / a(h) |∇h|² dnu`` for ``nu = exp(-v) dx``.

    Parameters
    ----------
    nu_potential : PotentialGrid
        ``v``; ``exp(-v)`` must integrate to 1 within ``1e-4``.
    h : array or callable
        Positive samples on the grid of ``v`` (or a function of the coordinates).
    a_kind : "square" or (a, a_prime)
        Only the square is covered by reference values.
    c : float
        Lower bound for the Hessian of ``v``.

    ``lhs`` is the entropy and ``rhs`` the energy; the report has
    ``sense = "le"`` so ``gap = rhs - lhs`` is nonnegative when it holds.
    """
    v = nu_potential
    grid = v.grid
    if callable(h):
        h = np.asarray(h(*grid.mesh()), dtype=float) * np.ones(grid.shape)
    h = np.asarray(h, dtype=float).reshape(grid.shape)
    if np.any(h[v.finite] <= 0):
        raise ValueError("h must be positive")
    a, a_prime = _A_KINDS[a_kind] if isinstance(a_kind, str) else a_kind
    with np.errstate(over="ignore"):
        dens = np.exp(-v.values)
    mass = grid_integrate(v, dens)
    if abs(mass - 1) > 1e-4:
        raise ValueError(f"nu is not a probability measure (mass {mass:.6g})")
    ah = a(h)
    with np.errstate(divide="ignore", invalid="ignore"):
        alog = np.where(ah > 0, ah * np.log(ah), 0.0)
    m_a = grid_integrate(v, ah * dens)
    ent = grid_integrate(v, alog * dens) - m_a * math.log(m_a)
    grads = np.gradient(h, *grid.axes()) if grid.dim > 1 else [np.gradient(h, grid.axes()[0])]
    g2 = sum(gi**2 for gi in grads)
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(ah > 0, a_prime(h) ** 2 / ah, 0.0)
    rhs = grid_integrate(v, weight * g2 * dens) / c
    diag = _lsi_diagnostics(v, h, a, c)
    if not all(diag[k] for k in ("superlinear", "hessian_sandwich", "hessian_lower_bound")):
        warnings.warn("log-Sobolev hypotheses not met on the window; values computed anyway")
    return _make("log_sobolev", ent, rhs, tol, {"c": c, **diag}, sense="le")


def _lsi_diagnostics(v, h, a, c):
    with np.errstate(divide="ignore", invalid="ignore"):
        loga = np.log(a(h))
    w = PotentialGrid(v.grid, np.where(v.finite, v.values - loga, np.inf))
    rep = classify(w)
    margin_v = convexity_margin(v)
    # log a(h) strictly less convex than v: v - log a(h) strictly convex
    sandwich = convexity_margin(w) > 0
    return {
        "superlinear": bool(rep.superlinear),
        "hessian_sandwich": bool(sandwich),
        "hessian_lower_bound": bool(margin_v >= c * (1 - 1e-6)),
        "v_convexity_margin": margin_v,
    }


# -- p-mixed volumes ---------------------------------------------------------------


def pmixed_constant(q, n, method="closed"):
    """``c(q, n) = ∫_0^1 (q log(1/t))^(n/q) dt = q^(n/q) Γ(n/q + 1)``."""
    if method == "closed":
        return q ** (n / q) * special.gamma(n / q + 1)
    val, _ = integrate.quad(lambda t: (-q * math.log(t)) ** (n / q) if t > 0 else 0.0, 0, 1, limit=200)
    return val


def check_pmixed_mass(K, q, *, tol=None, grid=None):
    """``J(exp(-(1/q) h_{K°}^q)) = c(q, n) V(K)`` (reported as an equality check)."""
    f = make_power_of_support(K, q, grid=grid)
    lhs = total_mass(f)
    c = pmixed_constant(q, K.dim)
    rhs = c * K.volume()
    return _make("pmixed_mass", lhs, rhs, tol, {"q": q, "c": c, "c_quadrature": pmixed_constant(q, K.dim, "quad")})


def check_pmixed_variation(K, L, q, *, tol=None, **fd):
    """First variation of ``J`` along p-sums against the p-mixed-volume formula (1-D).

    ``lhs`` is the finite-difference value. Two closed forms are recorded:
    ``(c/n) ∫ h_L^p h_K^(1-p) dS_K`` and ``(c/p)`` times the same integral,
    with ``p = q/(q-1)``; ``rhs`` is the ``(c/p)`` form, which is the
    derivative of ``c(q,n) V(K +_p t L)``.
    """
    if K.dim != 1:
        raise NotImplementedError("the variation check is one-dimensional")
    p = q / (q - 1)
    f = make_power_of_support(K, q)
    g = make_power_of_support(L, q)
    est = delta_J_fd(f, g, **fd)
    normals, weights = K.surface_area_measure()
    integral = float(np.sum(L.support(normals) ** p * K.support(normals) ** (1 - p) * weights))
    c = pmixed_constant(q, K.dim)
    over_n = c / K.dim * integral
    over_p = c / p * integral
    rep = _make("pmixed_variation", est.value, over_p, tol, {
        "q": q, "p": p, "integral": integral, "c_over_n_form": over_n, "c_over_p_form": over_p,
        "delta_J": est.to_json(),
    })
    tol_v = rep.tolerance
    rep.details["matches"] = [name for name, val in (("c_over_n", over_n), ("c_over_p", over_p))
                              if abs(est.value - val) <= max(tol_v, est.error_bar)]
    return rep
