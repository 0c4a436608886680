"""Verification suites run by ``logcave verify``.

Each suite returns a list of :class:`InequalityReport`. Known identities
are reported with ``expect="equality"``; one-sided bounds use ``sense``.
A ``tol`` override replaces every report's tolerance.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .bodies import ConvexBody
from .conjugate import _transform, fenchel_involution_residual
from .functionals import delta_J_fd, delta_J_self, perimeter, total_mass
from .grid import Grid, PotentialGrid
from .inequalities import (
    InequalityReport,
    check_isoperimetric,
    check_log_sobolev,
    check_minkowski_first,
    check_pmixed_mass,
    check_pmixed_variation,
    check_prekopa_leindler,
)
from .logconcave import (
    from_potential,
    make_gaussian,
    make_indicator,
    make_spike,
    oplus,
    translate,
)
from .measures import area_measure_mu, delta_J_repr_Aprime
from .minkowski import (
    MinkowskiDatum1D,
    NecessaryConditionError,
    DatumInconsistentError,
    check_necessary_conditions,
    datum_from_measure,
    solve_minkowski_1d,
)

__all__ = ["SUITES", "run_suite", "random_convex_potential", "random_convex_function", "brute_conjugate", "density_l1"]

SUITES = ("conjugate", "algebra", "variation", "measures", "inequalities", "minkowski", "all")


def _equal(name, value, golden, tol=None, rel=1e-3, details=None):
    if tol is None:
        tol = max(rel * abs(golden), 1e-12)
    return InequalityReport(name, float(value), float(golden), float(tol), details or {}, "ge", "equality")


def _bound(name, value, bound, tol=0.0, details=None):
    """``value <= bound``."""
    return InequalityReport(name, float(value), float(bound), float(tol), details or {}, "le")


# -- shared test functions --------------------------------------------------------


def half_gaussian():
    return from_potential(lambda x: x**2 / 2)


def cosh_fn():
    return from_potential(lambda x: np.cosh(x) - 1, Grid([-6], [6], [3001]))


def quartic_fn():
    return from_potential(lambda x: x**4 / 4 + x**2 / 10, Grid([-6], [6], [4001]))


def random_convex_function(rng):
    """A random convex function: quadratic plus a kink plus an exponential."""
    a = rng.uniform(0.2, 2.0)
    b = rng.uniform(0.0, 1.0)
    c = rng.uniform(-1.0, 1.0)
    d = rng.uniform(0.0, 0.5)
    e = rng.uniform(-1.5, 1.5)
    return lambda x: a * x**2 + b * np.abs(x - c) + d * np.exp(e * x)


def random_convex_potential(rng, n=501, lo=-2.0, hi=2.0):
    return PotentialGrid.from_function(random_convex_function(rng), Grid([lo], [hi], [n]))


def brute_conjugate(u, y):
    """``max_i (x_i y_j - u_i)`` by the full ``O(N M)`` comparison."""
    x = u.grid.axes()[0]
    fin = u.finite
    return np.max(np.outer(y, x[fin]) - u.values[fin][None, :], axis=1)


def density_l1(datum, mu, bins=64):
    """Binned L1 distance between a particle measure and a datum, relative to the datum mass."""
    y = datum.y
    edges = np.linspace(y[0], y[-1], bins + 1)
    cdf = cumulative_trapezoid(datum.density, y, initial=0.0)
    ref = np.diff(np.interp(edges, y, cdf))
    got, _ = np.histogram(mu.points[:, 0], bins=edges, weights=mu.weights)
    return float(np.sum(np.abs(got - ref)) / datum.mass)


# -- suites ---------------------------------------------------------------------


def suite_conjugate(seed=42, count=20, **_):
    rng = np.random.default_rng(seed)
    out = []
    worst_fast, worst_ratio = 0.0, 0.0
    for k in range(count):
        u = random_convex_potential(rng)
        r = fenchel_involution_residual(u)
        out.append(_bound(f"involution_residual[{k}]", r, 5e-3))
        y = np.linspace(-12.0, 12.0, 601)
        fast = _transform(u.grid, u.values, Grid([y[0]], [y[-1]], [y.size]))
        worst_fast = max(worst_fast, float(np.max(np.abs(fast - brute_conjugate(u, y)))))
    out.append(_bound("fast_vs_brute_force", worst_fast, 1e-12))
    rng = np.random.default_rng(seed)
    for k in range(count):
        func = random_convex_function(rng)
        rc = fenchel_involution_residual(PotentialGrid.from_function(func, Grid([-2.0], [2.0], [501])))
        rf = fenchel_involution_residual(PotentialGrid.from_function(func, Grid([-2.0], [2.0], [1001])))
        if rc > 1e-12:
            worst_ratio = max(worst_ratio, rf / rc)
    out.append(_bound("involution_refinement_ratio", worst_ratio, 0.5))
    return out


def suite_algebra(**_):
    f = half_gaussian()
    out = [
        _equal("mass(f (+) f)", total_mass(oplus(f, f)), 2 * math.sqrt(math.pi)),
        _equal("mass(0.5.f (+) 0.5.f)", total_mass(oplus(f, f, 0.5, 0.5)), math.sqrt(2 * math.pi)),
        _equal("mass(f (+) spike)", total_mass(oplus(f, make_spike(1))), math.sqrt(2 * math.pi)),
    ]
    K = ConvexBody(interval=(-1.0, 1.0))
    ind = make_indicator(K)
    out.append(_equal("mass(1_K (+) 1_K)", total_mass(oplus(ind, ind)), 4.0))
    return out


def suite_variation(**_):
    out = []
    for name, f in (("exp(-x^2/2)", half_gaussian()), ("gamma_1", make_gaussian(1)),
                    ("exp(1-cosh x)", cosh_fn()), ("gamma_2", make_gaussian(2))):
        est = delta_J_fd(f, f)
        exact = delta_J_self(f)
        tol = max(1e-3 * abs(exact), est.error_bar)
        out.append(_equal(f"deltaJ_self[{name}]", est.value, exact, tol=tol))
    f = half_gaussian()
    out.append(_equal("deltaJ(f, gamma_1) = perimeter", delta_J_fd(f, make_gaussian(1)).value,
                      perimeter(f)))
    out.append(_equal("deltaJ(f, spike) = -J", delta_J_fd(f, make_spike(1, 1.0)).value, -total_mass(f)))
    return out


def measure_functions():
    return (("exp(-x^2/2)", half_gaussian()), ("gamma_1", make_gaussian(1)),
            ("quartic", quartic_fn()), ("exp(1-cosh x)", cosh_fn()),
            ("translate(exp(-x^2/2), 1)", translate(half_gaussian(), 1.0)),
            ("gamma_2", make_gaussian(2)))


def suite_measures(**_):
    out = []
    for name, f in measure_functions():
        J = total_mass(f)
        mu = area_measure_mu(f)
        out.append(_bound(f"mass_conservation[{name}]", abs(mu.total - J), 1e-4 * J))
        nc = check_necessary_conditions(mu)
        out.append(_bound(f"barycenter[{name}]", nc.residual, nc.tolerance))
        out.append(_equal(f"appendix_identity[{name}]", delta_J_repr_Aprime(f, f, check_admissible=False),
                          delta_J_self(f)))
    return out


def suite_inequalities(**_):
    f, q = half_gaussian(), quartic_fn()
    out = []
    pairs = [(f, translate(f, 2.0), True), (q, translate(q, 1.0), True),
             (f, make_gaussian(1), False), (f, q, False), (q, cosh_fn(), False)]
    for k, (a, b, eq) in enumerate(pairs):
        pl = check_prekopa_leindler(a, b, 0.5)
        mk = check_minkowski_first(a, b)
        for r in (pl, mk):
            r.name = f"{r.name}[{k}]"
            if eq:
                r.expect = "equality"
            out.append(r)
    iso = check_isoperimetric(make_gaussian(1))
    iso.expect = "equality"
    out.append(iso)
    out.append(check_isoperimetric(q))
    nu = make_gaussian(1).potential
    x = nu.grid.axes()[0]
    for alpha in (0.1, 0.25, 0.4):
        r = check_log_sobolev(nu, np.exp(alpha * x))
        r.name = f"log_sobolev[alpha={alpha}]"
        out.append(r)
    for K in (ConvexBody(interval=(-1.0, 1.0)), ConvexBody.disc(1.0)):
        r = check_pmixed_mass(K, 2.0)
        r.name = f"pmixed_mass[dim={K.dim}]"
        r.expect = "equality"
        out.append(r)
    r = check_pmixed_variation(ConvexBody(interval=(-1.0, 1.0)), ConvexBody(interval=(-2.0, 2.0)), 2.0)
    r.expect = "equality"
    out.append(r)
    return out


def gaussian_datum():
    return MinkowskiDatum1D.from_function(lambda y: np.exp(-y**2 / 2), Grid([-14.0], [14.0], [2801]))


def suite_minkowski(datum=None, **_):
    out = []
    builtin = datum is None
    if builtin:
        datum = gaussian_datum()
    try:
        sol = solve_minkowski_1d(datum)
    except (NecessaryConditionError, DatumInconsistentError) as exc:
        return [InequalityReport("necessary_conditions", 0.0, 1.0, 0.0, {"error": str(exc)})]
    d = sol.diagnostics
    out.append(_bound("ode_residual", d["ode_residual_l1"], 2e-2 * datum.mass))
    out.append(_equal("feasibility_solvable", float(sol.feasibility == "solvable_Aprime"), 1.0,
                      tol=0.0, details={"feasibility": sol.feasibility}))
    if sol.f.class_tag == "Aprime":
        mu = area_measure_mu(sol.f)
        out.append(_bound("round_trip_density_l1", density_l1(datum, mu), 2e-2))
    if builtin:
        y = sol.phi.grid.axes()[0]
        m = np.abs(y) <= 4
        err = float(np.max(np.abs(sol.phi.values[m] - y[m] ** 2 / 2)))
        out.append(_bound("phi = y^2/2 on [-4, 4]", err, 1e-3))
        f = from_potential(lambda x: x**2)
        dd, _ = datum_from_measure(area_measure_mu(f))
        rec = solve_minkowski_1d(dd).f
        out.append(_bound("round_trip_f_l1[exp(-x^2)]", recovery_l1(f, rec), 2e-2))
        shifted = MinkowskiDatum1D.from_function(lambda y: np.exp(-(y - 1) ** 2 / 2), datum.grid)
        try:
            solve_minkowski_1d(shifted)
            refused = 0.0
        except NecessaryConditionError:
            refused = 1.0
        out.append(_equal("nonzero_barycenter_refused", refused, 1.0, tol=0.0))
    return out


def recovery_l1(f, rec):
    """``||f - rec(. + x0)||_1 / J(f)`` where ``rec ≈ f(. - x0)`` is the best alignment."""
    from .inequalities import translation_alignment

    x0, _ = translation_alignment(f, rec)
    x = f.grid.axes()[0]
    shifted = np.interp(x + x0[0], rec.grid.axes()[0], rec.values(), left=0.0, right=0.0)
    w = np.full(x.size, f.grid.spacing[0])
    w[0] = w[-1] = 0.5 * w[0]
    return float(np.sum(w * np.abs(shifted - f.values())) / total_mass(f))


_RUNNERS = {
    "conjugate": suite_conjugate,
    "algebra": suite_algebra,
    "variation": suite_variation,
    "measures": suite_measures,
    "inequalities": suite_inequalities,
    "minkowski": suite_minkowski,
}


def run_suite(name, *, seed=42, tol=None, datum=None):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    names = list(_RUNNERS) if name == "all" else [name]
    reports = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in names:
            reports.extend(_RUNNERS[n](seed=seed, datum=datum))
    if tol is not None:
        for r in reports:
            r.tolerance = float(tol)
    return reports


