"""Numerical algebra, first variation and area measures of log-concave functions.

A log-concave function is stored as ``f = exp(-u)`` with ``u`` a convex
potential sampled on a uniform grid (``+inf`` off its domain). Sums and
scalar multiples act on conjugates, ``(alpha.f (+) beta.g) = exp(-(alpha u* + beta v*)*)``.
"""
from ._backend import BACKEND
from .bodies import ConvexBody, psum_body
from .conjugate import (
    SlopeRangeError,
    convexity_margin,
    fenchel_conjugate,
    fenchel_involution_residual,
    gradient,
    inf_convolution,
    right_scalar_mult,
)
from .functionals import (
    DeltaJEstimate,
    ZeroMassError,
    delta_J_fd,
    delta_J_self,
    entropy,
    mean_width,
    perimeter,
    total_mass,
)
from .grid import Grid, InvalidPotential, PotentialGrid
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
    LogConcaveFn,
    classify,
    from_potential,
    make_gaussian,
    make_indicator,
    make_power_of_support,
    make_spike,
    oplus,
    scale,
    translate,
)
from .measures import (
    HypothesisError,
    ParticleMeasure,
    SphereMeasure,
    admissible_c_max,
    area_measure_mu,
    area_measure_sigma,
    delta_J_repr_Adoubleprime,
    delta_J_repr_Aprime,
    pointwise_derivative_check,
)
from .minkowski import (
    DatumInconsistentError,
    MinkowskiDatum1D,
    MinkowskiSolution1D,
    NecessaryConditionError,
    check_necessary_conditions,
    datum_from_measure,
    feasibility_diagnostic,
    solve_minkowski_1d,
    verify_uniqueness,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
