"""Translation-invariant splitting Gibbs measures of the odd-root model on Cayley trees.

Three independent routes to the same fixed points:

* ``reduced``: the two-dimensional polynomial map and its root polynomial,
* ``operator``: the Hammerstein operator discretised by quadrature,
* ``sampler``: tree-indexed Markov chains on finite Cayley trees.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (
    DivergenceError,
    DomainError,
    EnvelopeViolation,
    GibbsTreeError,
    InsufficientSamplesError,
    InvalidLawError,
    NumericalFailure,
)
from .model import BoundaryFunction, ModelParams, g_eval, kernel_eval, phi_eval, theta_critical
from .reduced import (
    FixedPoint2D,
    FixedPointKind,
    PolyCoeffs,
    alt_sum_identity,
    classify_positive,
    enumerate_fixed_points,
    poly_coeffs,
    recover_xy,
    series_eval,
    solve_z0,
    theta_threshold,
    v_apply,
)

__all__ = [
    "BACKEND",
    "BoundaryFunction",
    "DivergenceError",
    "DomainError",
    "EnvelopeViolation",
    "FixedPoint2D",
    "FixedPointKind",
    "GibbsTreeError",
    "InsufficientSamplesError",
    "InvalidLawError",
    "ModelParams",
    "NumericalFailure",
    "PolyCoeffs",
    "alt_sum_identity",
    "classify_positive",
    "enumerate_fixed_points",
    "g_eval",
    "kernel_eval",
    "phi_eval",
    "poly_coeffs",
    "recover_xy",
    "series_eval",
    "solve_z0",
    "theta_critical",
    "theta_threshold",
    "v_apply",
]
