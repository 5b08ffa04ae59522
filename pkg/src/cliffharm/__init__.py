"""Clifford algebras, harmonic polynomials, Poisson kernels and related numerics."""

from .errors import (
    BoundaryError,
    CliffharmError,
    ConvergenceError,
    DimensionError,
    DomainError,
    ParseError,
    PreconditionError,
    RankError,
    SingularityError,
)
from .multivector import Multivector, Quaternion, geometric_product, paravector_inverse
from .polyharmonic import Polynomial, harmonic_decomposition, laplacian, parse_polynomial

__all__ = [
    "BoundaryError",
    "CliffharmError",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "Multivector",
    "ParseError",
    "Polynomial",
    "PreconditionError",
    "Quaternion",
    "RankError",
    "SingularityError",
    "geometric_product",
    "harmonic_decomposition",
    "laplacian",
    "paravector_inverse",
    "parse_polynomial",
]

__version__ = "0.1.0"
