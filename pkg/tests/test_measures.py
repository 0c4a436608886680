import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from conftest import BODY_GRID, LOG_C1, SQRT2PI, UNIT
from logcave import measures
from logcave.bodies import ConvexBody
from logcave.functionals import delta_J_fd, delta_J_self, total_mass
from logcave.grid import Grid
from logcave.logconcave import from_potential, make_gaussian, make_indicator, translate
from logcave.measures import (
    HypothesisError,
    ParticleMeasure,
    admissible_c_max,
    area_measure_mu,
    area_measure_sigma,
    delta_J_repr_Adoubleprime,
    delta_J_repr_Aprime,
    pointwise_derivative_check,
)


def _binned_l1(mu, cdf, bins=64):
    """L1 distance between the particle histogram and exact bin masses."""
    y = mu.points[:, 0]
    edges = np.linspace(y.min(), y.max(), bins + 1)
    got, _ = np.histogram(y, bins=edges, weights=mu.weights)
    return float(np.sum(np.abs(got - np.diff(cdf(edges)))))


def test_mu_of_half_gaussian_is_gaussian(half_gauss):
    mu = area_measure_mu(half_gauss)
    assert mu.total == pytest.approx(SQRT2PI, rel=1e-10)
    cdf = lambda y: SQRT2PI * 0.5 * (1 + erf(y / math.sqrt(2)))  # noqa: E731
    assert _binned_l1(mu, cdf) / mu.total <= 1e-2


def test_mu_of_narrow_gaussian():
    f = from_potential(lambda x: x**2)
    mu = area_measure_mu(f)
    assert mu.total == pytest.approx(math.sqrt(math.pi), rel=1e-6)
    # y = 2x: density exp(-y^2 / 4) / 2
    cdf = lambda y: math.sqrt(math.pi) * 0.5 * (1 + erf(y / 2))  # noqa: E731
    assert _binned_l1(mu, cdf) / mu.total <= 1e-2


def test_mu_barycenter_vanishes():
    assert abs(area_measure_mu(make_gaussian(1)).barycenter()[0]) <= 1e-6
    shifted = from_potential(lambda x: (x - 1) ** 2 / 2)
    assert abs(area_measure_mu(shifted).barycenter()[0]) <= 1e-6


def test_mu_needs_a_smooth_class():
    with pytest.raises(ValueError):
        area_measure_mu(make_indicator(UNIT))


def test_sigma_examples(logcos):
    s = area_measure_sigma(logcos)
    assert s.atom(-1) == pytest.approx(0.0, abs=1e-12) and s.atom(1) == pytest.approx(0.0, abs=1e-12)
    ind = area_measure_sigma(make_indicator(UNIT))
    assert (ind.atom(-1), ind.atom(1)) == (1.0, 1.0) and ind.total == 2.0
    K = ConvexBody(interval=(0.0, 2.0))
    f = from_potential(lambda x: math.log(2) * (1 + x / 2), Grid([0], [2], [201]), body=K, class_tag="Adoubleprime")
    s = area_measure_sigma(f)
    assert s.atom(-1) == pytest.approx(0.5) and s.atom(1) == pytest.approx(0.25)
    assert s.to_json() == {"dim": 1, "atoms": {"-1": pytest.approx(0.5), "+1": pytest.approx(0.25)}}


def test_sigma_total_bounded_by_max_f_times_perimeter():
    K = ConvexBody.disc(1.0, n=64)
    f = from_potential(lambda x, y: -np.sqrt(np.clip(1 - x**2 - y**2, 0, None)),
                       Grid([-1.1, -1.1], [1.1, 1.1], [221, 221]), body=K, class_tag="Adoubleprime")
    s = area_measure_sigma(f)
    assert s.total <= f.values().max() * K.boundary_measure() * (1 + 1e-9)


def test_barycenter_law_with_boundary():
    f = from_potential(lambda x: -np.sqrt(np.clip(1 - x**2, 0, None)) + 0.3 * x, BODY_GRID, body=UNIT)
    assert f.class_tag == "Adoubleprime"
    total = area_measure_mu(f).barycenter()[0] + area_measure_sigma(f).barycenter()[0]
    assert abs(total) <= 1e-5


@pytest.mark.parametrize("a,b,golden", [(0.5, 1.0, 2.0), (0.5, 0.5, 1.0), (1.0, 0.5, 0.5)])
def test_admissible_c_max_goldens(a, b, golden):
    f = from_potential(lambda x: a * x**2)
    g = from_potential(lambda x: b * x**2)
    assert admissible_c_max(f, g) == pytest.approx(golden, abs=1e-4)


def test_admissible_c_max_decreases_for_steeper_g(half_gauss):
    c = [admissible_c_max(half_gauss, from_potential(lambda x, k=k: k * x**2)) for k in (0.25, 0.5, 1.0)]
    assert c[0] < c[1] < c[2]


def test_representation_goldens(half_gauss):
    assert delta_J_repr_Aprime(half_gauss, half_gauss) == pytest.approx(SQRT2PI / 2, rel=1e-5)
    assert delta_J_repr_Aprime(half_gauss, make_gaussian(1)) == pytest.approx(SQRT2PI * (0.5 + LOG_C1), rel=1e-5)


def test_representation_matches_fd_on_aprime_pairs(half_gauss, quartic):
    # pairs like (quartic, half_gauss) are left out: the curvature of u* decays,
    # so u* - c v* is not convex for any c > 0 and the quotients converge slowly
    pairs = [(half_gauss, make_gaussian(1)), (half_gauss, translate(quartic, 0.5)),
             (half_gauss, from_potential(lambda x: x**2)), (make_gaussian(1), half_gauss)]
    for f, g in pairs:
        rep = delta_J_repr_Aprime(f, g, check_admissible=False)
        fd = delta_J_fd(f, g)
        assert abs(rep - fd.value) <= max(1e-3 * abs(rep), fd.error_bar)


def test_representation_equals_self_formula(quartic):
    assert delta_J_repr_Aprime(quartic, quartic) == pytest.approx(delta_J_self(quartic), rel=1e-3)


def test_admissibility_of_kinked_conjugate_fails():
    # u = |x| + x^2/2 has u* = (|y| - 1)_+^2 / 2, flat on [-1, 1]
    f = from_potential(lambda x: np.abs(x) + x**2 / 2)
    assert admissible_c_max(f, make_gaussian(1)) <= 1e-3


def test_aprime_representation_refuses_inadmissible_pair(monkeypatch):
    monkeypatch.setattr(measures, "admissible_c_max", lambda f, g, **kw: 0.0)
    with pytest.raises(HypothesisError, match="hypothesis not met"):
        delta_J_repr_Aprime(make_gaussian(2), make_gaussian(2))
    with pytest.warns(UserWarning, match="not an admissible perturbation"):
        delta_J_repr_Aprime(make_gaussian(1), make_gaussian(1))
    with pytest.raises(ValueError, match="class Aprime"):
        delta_J_repr_Aprime(make_indicator(UNIT), make_gaussian(1))


def test_adoubleprime_representation_matches_fd(logcos, semicircle):
    for f, g in [(logcos, logcos), (semicircle, semicircle), (logcos, semicircle),
                 (semicircle, translate(semicircle, 1.0))]:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            total, interior, boundary = delta_J_repr_Adoubleprime(f, g, details=True)
        fd = delta_J_fd(f, g)
        assert abs(total - fd.value) <= 5e-3 * abs(total)
        if f is logcos:
            assert boundary == pytest.approx(0.0, abs=1e-12)


def test_boundary_term_of_semicircle(semicircle):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, _, boundary = delta_J_repr_Adoubleprime(semicircle, semicircle, details=True)
    assert boundary == pytest.approx(2.0, abs=1e-9)  # f(+-1) = 1, h_L(+-1) = 1


def test_adoubleprime_needs_dimension_one():
    K = ConvexBody.disc(1.0, n=64)
    f = from_potential(lambda x, y: -np.sqrt(np.clip(1 - x**2 - y**2, 0, None)),
                       Grid([-1.1, -1.1], [1.1, 1.1], [81, 81]), body=K, class_tag="Adoubleprime")
    with pytest.raises(NotImplementedError):
        delta_J_repr_Adoubleprime(f, f, check_admissible=False)


def test_pointwise_derivative_examples(half_gauss):
    assert pointwise_derivative_check(half_gauss, half_gauss, 1.0, 0.5) <= 1e-3
    assert pointwise_derivative_check(half_gauss, half_gauss, 0.0, 0.5) <= 1e-6


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 2.0), st.floats(-0.5, 0.5), st.floats(-2.0, 2.0), st.floats(0.1, 1.0))
def test_pointwise_derivative_random_pairs(a, c, x, t):
    f = from_potential(lambda z: z**4 / 4 + z**2 / 10, Grid([-6], [6], [1201]))
    g = from_potential(lambda z: a * (z - c) ** 2 / 2, Grid([-10], [10], [1201]))
    assert pointwise_derivative_check(f, g, x, t) <= 1e-2


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(-2.0, 2.0))
def test_mass_conservation_and_barycenter(a, shift):
    f = from_potential(lambda x: a * (x - shift) ** 2 / 2 + 0.1 * (x - shift) ** 4)
    mu = area_measure_mu(f)
    J = total_mass(f)
    assert abs(mu.total - J) <= 1e-4 * J
    spread = math.sqrt(float(mu.weights @ mu.points[:, 0] ** 2) / mu.total)
    assert abs(mu.barycenter()[0]) <= 1e-3 * J * spread


def test_particle_measure_json():
    mu = ParticleMeasure(np.array([[0.0], [1.0]]), np.array([0.5, 0.25]))
    assert mu.to_json() == {"points": [0.0, 1.0], "weights": [0.5, 0.25]}
    with pytest.raises(ValueError):
        ParticleMeasure(np.array([[0.0]]), np.array([-1.0]))
