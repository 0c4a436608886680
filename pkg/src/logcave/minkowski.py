"""The one-dimensional functional Minkowski problem.

Given a density ``m`` on the line, look for ``f = exp(-u)`` whose area
measure ``(u')_# (f dx)`` is ``m dy``. Writing ``phi = u*`` this is the ODE
``exp(phi - y phi') phi'' = m`` whose solution with ``phi'(0) = 0`` is

    phi(y) = phi(0) - y ∫_0^y log(1 - M(t) / M_inf) / t² dt,
    M(t) = ∫_0^t s m(s) ds,   exp(phi(0)) = M_inf = M(+inf).

The negative half-line uses the mirrored datum with the same ``M_inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .conjugate import aligned_grid, fenchel_conjugate
from .functionals import delta_J_fd, delta_J_self, total_mass
from .grid import Grid, PotentialGrid
from .inequalities import translation_alignment
from .logconcave import LogConcaveFn
from .measures import admissible_c_max, delta_J_repr_Aprime

__all__ = [
    "NecessaryConditionError",
    "DatumInconsistentError",
    "MinkowskiDatum1D",
    "MinkowskiSolution1D",
    "FeasibilityTrace",
    "solve_minkowski_1d",
    "feasibility_diagnostic",
    "check_necessary_conditions",
    "verify_uniqueness",
    "datum_from_measure",
]

SOLVABLE = "solvable_Aprime"
NOT_SOLVABLE = "not_solvable_Aprime"
INCONCLUSIVE = "inconclusive"

BARYCENTER_REL = 1e-3
TAIL_MISMATCH_REL = 1e-3
SINGULAR_CELLS = 10
# growth-rate thresholds for the partial-integral trace
DIVERGE_SLOPE_RATIO = 0.1
DIVERGE_MIN_TRACE = 5.0
PLATEAU_REL = 1e-3


class NecessaryConditionError(ValueError):
    """The datum violates a necessary condition (finite mass, null barycenter)."""


class DatumInconsistentError(ValueError):
    """The two half-lines of the datum give different normalizations."""


@dataclass
class MinkowskiDatum1D:
    """Samples of a nonnegative density ``m`` on a uniform ``y`` grid."""

    grid: Grid
    density: np.ndarray

    def __post_init__(self):
        if self.grid.dim != 1:
            raise ValueError("the datum lives on a one-dimensional grid")
        m = np.asarray(self.density, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(m)):
            raise ValueError("density samples must be finite")
        if np.any(m < 0):
            raise ValueError("density must be nonnegative")
        self.density = m

    @classmethod
    def from_function(cls, func, grid):
        return cls(grid, func(grid.axes()[0]))

    @property
    def y(self):
        return self.grid.axes()[0]

    @property
    def mass(self):
        return float(trapezoid(self.density, self.y))

    @property
    def barycenter(self):
        return float(trapezoid(self.y * self.density, self.y))

    @property
    def scale(self):
        """``mass * rms(y)``: the size against which the barycenter is judged."""
        m = self.mass
        return m * math.sqrt(max(trapezoid(self.y**2 * self.density, self.y) / m, 1e-300))


@dataclass
class FeasibilityTrace:
    """Partial integrals ``D(y) = -r ∫_r^y log(1 - M(t)/M_inf) / t² dt`` on each half-line.

    ``r`` is the rms spread of the datum, so thresholds on ``D`` do not
    depend on the units of ``y``.
    """

    y: dict
    trace: dict
    classification: dict
    verdict: str
    notes: list = field(default_factory=list)
    spread: float = 1.0

    def to_json(self):
        return {
            "verdict": self.verdict,
            "classification": dict(self.classification),
            "y": {k: np.asarray(v).tolist() for k, v in self.y.items()},
            "trace": {k: np.asarray(v).tolist() for k, v in self.trace.items()},
            "notes": list(self.notes),
            "spread": float(self.spread),
        }


@dataclass
class MinkowskiSolution1D:
    phi: PotentialGrid
    f: LogConcaveFn
    feasibility: str
    diagnostics: dict

    def to_json(self):
        from .io import logconcave_to_json, potential_to_json

        return {
            "phi": potential_to_json(self.phi),
            "f": logconcave_to_json(self.f),
            "feasibility": self.feasibility,
            "diagnostics": _clean(self.diagnostics),
        }


def _clean(v):
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return None if math.isnan(v) else v
    if isinstance(v, np.integer):
        return int(v)
    if hasattr(v, "to_json"):
        return v.to_json()
    return v


# -- half-line integrals -------------------------------------------------------


def _centred(datum):
    """Resample onto a grid with a node at ``y = 0`` (same spacing)."""
    y = datum.y
    g = aligned_grid(datum.grid.lo, datum.grid.hi, datum.grid.n)
    if g.n == datum.grid.n and np.allclose(g.lo, datum.grid.lo):
        return y, datum.density
    yy = g.axes()[0]
    yy = yy[(yy >= y[0]) & (yy <= y[-1])]
    return yy, np.interp(yy, y, datum.density)


def _tail_beyond(t, sm):
    """``∫_T^inf s m(s) ds`` assuming log-linear decay past the last samples."""
    if sm[-1] <= 0 or sm[-2] <= 0:
        return 0.0
    lam = (math.log(sm[-2]) - math.log(sm[-1])) / (t[-1] - t[-2])
    return float(sm[-1] / lam) if lam > 0 else 0.0


def _half_line(t, m_half):
    """``M(t)``, ``M_inf - M(t)`` and ``M_inf`` on ``t = 0, h, 2h, ...``."""
    sm = t * m_half
    M = cumulative_trapezoid(sm, t, initial=0.0)
    beyond = _tail_beyond(t, sm)
    rev = cumulative_trapezoid(sm[::-1], -t[::-1], initial=0.0)[::-1]  # ∫_t^T
    T = rev + beyond
    return M, T, float(M[-1] + beyond)


def _log_ratio(M, T, M_inf):
    """``log(1 - M/M_inf)`` computed from whichever of ``M`` and ``T`` is accurate."""
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.log1p(-M / M_inf)
        large = np.where(T > 0, np.log(np.maximum(T, 0) / M_inf), -np.inf)
    return np.where(M < 0.5 * M_inf, small, large)


def _integrand(t, m0, M, T, M_inf, h):
    lr = _log_ratio(M, T, M_inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = lr / t**2
    # removable singularity at t = 0: log(1 - M/M_inf) ~ -m(0) t² / (2 M_inf)
    out = np.where(t < SINGULAR_CELLS * h, -m0 / (2 * M_inf), out)
    return out


def _phi_half(t, m_half, M_inf, h):
    M, T, own_inf = _half_line(t, m_half)
    if M_inf is None:
        M_inf = own_inf
    # far out the gap M_inf - M(t) is taken relative to this half-line's own
    # total, so a tiny mismatch of the totals cannot swamp a decaying tail
    T = T * (M_inf / own_inf)
    I = _integrand(t, m_half[0], M, T, M_inf, h)
    bad = ~np.isfinite(I)
    if bad.any():
        first = int(np.argmax(bad))
        I = I.copy()
        I[first:] = 0.0
    else:
        first = None
    Phi = cumulative_trapezoid(I, t, initial=0.0)
    phi = math.log(M_inf) - t * Phi
    if first is not None:
        phi[first:] = np.inf
    return phi, M, T, own_inf, I


def _trace_half(t, M, T, M_inf, r, n=200):
    """Partial integrals ``r ∫_r^y``, from the spread ``r`` to the last resolved ``t``.

    Measuring from ``r`` in units of ``r`` makes the trace invariant under
    dilations of the datum.
    """
    lr = _log_ratio(M, T, M_inf)
    ok = np.isfinite(lr) & (t >= r)
    bounded = not np.all(np.isfinite(lr[t >= r]))
    if ok.sum() < 3:
        return np.array([r]), np.array([0.0]), bounded
    last = int(np.flatnonzero(ok)[-1])
    sel = (t >= r) & (np.arange(t.size) <= last)
    tt = t[sel]
    g = -lr[sel] / tt**2
    D = r * cumulative_trapezoid(g, tt, initial=0.0)
    ys = np.geomspace(r, tt[-1], n)
    return ys, np.interp(ys, tt, D), bounded


def _classify_trace(ys, D, bounded):
    if bounded:
        return NOT_SOLVABLE
    r, Y = ys[0], ys[-1] / ys[0]
    if Y <= 1.0 or D.size < 3:
        return INCONCLUSIVE
    dec = 10 ** min(1.0, math.log10(Y))
    first = np.interp(r * dec, ys, D) - D[0]
    last = D[-1] - np.interp(ys[-1] / dec, ys, D)
    if last < PLATEAU_REL * abs(D[-1]):
        return NOT_SOLVABLE
    if last >= DIVERGE_SLOPE_RATIO * first and D[-1] > DIVERGE_MIN_TRACE:
        return SOLVABLE
    return INCONCLUSIVE


def _both_halves(datum):
    y, m = _centred(datum)
    h = y[1] - y[0]
    i0 = int(np.argmin(np.abs(y)))
    tp = y[i0:] - y[i0]
    tn = y[i0] - y[:i0 + 1][::-1]
    mp, mn = m[i0:], m[:i0 + 1][::-1]
    return y, m, h, i0, (tp, mp), (tn, mn)


def feasibility_diagnostic(datum):
    """Growth of ``phi(y)/|y|`` on both half-lines, classified by declared thresholds.

    ``D`` growing by at least a tenth of its first-decade increment over the
    last decade and exceeding 5 counts as diverging (solvable); a last-decade
    increment below ``1e-3 |D|`` counts as a plateau (not solvable). A datum
    whose tail mass vanishes at finite ``y`` makes ``phi = +inf`` past it, so
    ``u = phi*`` grows only linearly: not solvable in the smooth superlinear
    class. Everything else is inconclusive.
    """
    y, m, h, i0, (tp, mp), (tn, mn) = _both_halves(datum)
    _, Mp, Tp, Mp_inf, _ = _phi_half(tp, mp, None, h)
    ys, traces, cls = {}, {}, {}
    notes = []
    r = datum.scale / datum.mass
    for name, (t, mh) in (("positive", (tp, mp)), ("negative", (tn, mn))):
        _, M, T, _, _ = _phi_half(t, mh, Mp_inf, h)
        yy, D, bounded = _trace_half(t, M, T, Mp_inf, r)
        ys[name], traces[name] = yy, D
        cls[name] = _classify_trace(yy, D, bounded)
        if bounded:
            notes.append(f"{name} tail mass vanishes at finite y: phi = +inf beyond it")
    if all(c == SOLVABLE for c in cls.values()):
        verdict = SOLVABLE
    elif any(c == NOT_SOLVABLE for c in cls.values()):
        verdict = NOT_SOLVABLE
    else:
        verdict = INCONCLUSIVE
    return FeasibilityTrace(ys, traces, cls, verdict, notes, r)


def _necessary(datum):
    if not datum.mass > 0:
        raise NecessaryConditionError("necessary condition failed: the datum has zero mass")
    if abs(datum.barycenter) > BARYCENTER_REL * datum.scale:
        raise NecessaryConditionError(
            f"necessary condition failed: an area measure has null barycenter, "
            f"but ∫ y m(y) dy = {datum.barycenter:.6g}")


def solve_minkowski_1d(datum, *, x_grid=None):
    """Solve ``exp(phi - y phi') phi'' = m`` with ``phi'(0) = 0`` and recover ``f``.

    Raises
    ------
    NecessaryConditionError
        Zero mass or nonzero barycenter.
    DatumInconsistentError
        The two half-lines give values of ``M_inf`` differing by more than
        ``1e-3`` relative.
    """
    _necessary(datum)
    y, m, h, i0, (tp, mp), (tn, mn) = _both_halves(datum)
    phi_p, _, _, Mp_inf, _ = _phi_half(tp, mp, None, h)
    phi_n, _, _, Mn_inf, _ = _phi_half(tn, mn, Mp_inf, h)
    mismatch = abs(Mn_inf - Mp_inf) / Mp_inf
    if mismatch > TAIL_MISMATCH_REL:
        raise DatumInconsistentError(
            f"datum inconsistent: the half-lines give M_inf = {Mp_inf:.6g} and {Mn_inf:.6g}")
    phi_vals = np.concatenate([phi_n[::-1][:-1], phi_p])
    grid = Grid([y[0]], [y[-1]], [y.size])
    phi = PotentialGrid(grid, phi_vals)
    if x_grid is None:
        # u is known exactly on the slope range attained by phi
        with np.errstate(invalid="ignore"):
            d = np.diff(phi_vals) / h
        d = d[np.isfinite(d)]
        x_grid = Grid([d.min()], [d.max()], [y.size])
    u = fenchel_conjugate(phi, x_grid, refine=True, check=False)
    f = LogConcaveFn(u)
    feas = feasibility_diagnostic(datum)
    m_rec = _ode_density(y, phi_vals, h)
    fin = np.isfinite(m_rec)
    ode_l1 = float(trapezoid(np.where(fin, np.abs(m_rec - m), 0.0), y))
    diagnostics = {
        "M_infinity": Mp_inf,
        "M_infinity_negative": Mn_inf,
        "tail_mismatch": mismatch,
        "phi0": math.log(Mp_inf),
        "mass": datum.mass,
        "recovered_mass": total_mass(f),
        "ode_residual_l1": ode_l1,
        "ode_residual_rel": ode_l1 / datum.mass,
        "slope_growth": feas.to_json(),
    }
    return MinkowskiSolution1D(phi, f, feas.verdict, diagnostics)


def _ode_density(y, phi, h):
    """``exp(phi - y phi') phi''`` by central differences (NaN at the ends)."""
    out = np.full_like(phi, np.nan)
    with np.errstate(invalid="ignore", over="ignore"):
        d1 = (phi[2:] - phi[:-2]) / (2 * h)
        d2 = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / h**2
        out[1:-1] = np.exp(phi[1:-1] - y[1:-1] * d1) * d2
    return out


def recovered_density(solution):
    """``(y, exp(phi - y phi') phi'')`` of a solution, for plotting against the datum."""
    g = solution.phi.grid
    y = g.axes()[0]
    return y, _ode_density(y, solution.phi.values, g.spacing[0])


# -- necessary conditions and uniqueness ------------------------------------------


@dataclass
class NecessaryConditionReport:
    mass_mu: float
    mass_sigma: float
    finite: bool
    barycenter_mu: np.ndarray
    barycenter_total: np.ndarray
    residual: float
    tolerance: float

    @property
    def holds(self):
        return self.finite and self.residual <= self.tolerance

    def to_json(self):
        return _clean({
            "mass_mu": self.mass_mu, "mass_sigma": self.mass_sigma, "finite": self.finite,
            "barycenter_mu": self.barycenter_mu, "barycenter_total": self.barycenter_total,
            "residual": self.residual, "tolerance": self.tolerance, "holds": self.holds,
        })


def check_necessary_conditions(mu, sigma=None, *, tol=None):
    """Finite mass and ``∫ y dmu + ∫ y dsigma = 0``."""
    bm = mu.barycenter()
    total = bm.copy()
    ms = 0.0
    if sigma is not None:
        total = total + sigma.barycenter()
        ms = sigma.total
    finite = bool(np.isfinite(mu.total) and np.isfinite(ms))
    resid = float(np.linalg.norm(total))
    if tol is None:
        spread = math.sqrt(float(mu.weights @ np.sum(mu.points**2, axis=1)) / max(mu.total, 1e-300))
        tol = 1e-3 * max(mu.total * spread + ms, 1e-12)
    return NecessaryConditionReport(mu.total, ms, finite, bm, total, resid, tol)


@dataclass
class UniquenessReport:
    delta_J: dict
    cross_gaps: tuple
    translation: np.ndarray
    translation_residual: float
    tolerance: float

    @property
    def cross_equal(self):
        return all(abs(g) <= self.tolerance for g in self.cross_gaps)

    @property
    def translates(self):
        return self.translation_residual <= 1e-2

    @property
    def consistent(self):
        """Cross-equalities and being translates go together."""
        return self.cross_equal == self.translates

    def to_json(self):
        return _clean({
            "delta_J": self.delta_J, "cross_gaps": list(self.cross_gaps),
            "cross_equal": self.cross_equal, "translation": self.translation,
            "translation_residual": self.translation_residual, "translates": self.translates,
            "consistent": self.consistent, "tolerance": self.tolerance,
        })


def _cross(f, g):
    if f.class_tag == "Aprime" and g.class_tag == "Aprime" and (f.dim == 1 or admissible_c_max(f, g) > 0):
        return delta_J_repr_Aprime(f, g, check_admissible=False)
    return delta_J_fd(f, g).value


def verify_uniqueness(f1, f2, *, rel_tol=1e-3):
    """The cross identities ``δJ(f2, f1) = δJ(f1, f1)``, ``δJ(f1, f2) = δJ(f2, f2)``
    against translation alignment of the pair."""
    J1, J2 = total_mass(f1), total_mass(f2)
    if abs(J1 - J2) > rel_tol * max(J1, J2) or min(J1, J2) <= 0:
        raise ValueError(f"uniqueness needs equal positive masses, got {J1:.6g} and {J2:.6g}")
    d11, d22 = delta_J_self(f1), delta_J_self(f2)
    d12, d21 = _cross(f1, f2), _cross(f2, f1)
    scale = max(abs(d11), abs(d22), J1)
    gaps = (d21 - d11, d12 - d22)
    x0, resid = translation_alignment(f1, f2)
    vals = {"f1_f1": d11, "f2_f2": d22, "f1_f2": d12, "f2_f1": d21}
    return UniquenessReport(vals, gaps, x0, resid, rel_tol * scale)


def datum_from_measure(mu, bins=64, trim=1e-12):
    """Binned density of a 1-D particle measure as a Minkowski datum.

    The bin range drops particles carrying at most ``trim`` of the mass on
    each side.
    """
    if mu.dim != 1:
        raise ValueError("datum_from_measure is one-dimensional")
    y = mu.points[:, 0]
    order = np.argsort(y)
    cw = np.cumsum(mu.weights[order]) / mu.total
    lo = y[order][np.searchsorted(cw, trim)]
    hi = y[order][min(np.searchsorted(cw, 1 - trim), y.size - 1)]
    half = max(abs(lo), abs(hi))
    centres, dens = mu.binned_density(bins, (-half, half))
    step = centres[1] - centres[0]
    return MinkowskiDatum1D(Grid([centres[0]], [centres[-1]], [bins]), dens), step
