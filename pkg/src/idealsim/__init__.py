"""Similarity to near-contractions modulo an ideal in block matrix algebras."""

from .algebra import AlgebraElement, AlgebraSignature, IdealSpec, Polynomial, poly_eval
from .errors import IdealSimError, InvalidInput, NumericalFailure, PreconditionViolation
from .linalg import stein_solve
from .olsen import approximate_olsen, kernel_triangularize, olsen_perturbation, sigma_membership
from .search import lower_bound_audit, similarity_search
from .similarity import (
    contraction_similarity,
    joint_contraction_pair,
    optimal_similarity,
    series_weight,
    simultaneous_contraction,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "AlgebraSignature",
    "IdealSpec",
    "Polynomial",
    "poly_eval",
    "IdealSimError",
    "InvalidInput",
    "NumericalFailure",
    "PreconditionViolation",
    "stein_solve",
    "approximate_olsen",
    "kernel_triangularize",
    "olsen_perturbation",
    "sigma_membership",
    "lower_bound_audit",
    "similarity_search",
    "contraction_similarity",
    "joint_contraction_pair",
    "optimal_similarity",
    "series_weight",
    "simultaneous_contraction",
    "__version__",
]
