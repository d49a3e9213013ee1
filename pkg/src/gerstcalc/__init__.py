"""Exact symbolic calculus for Lie, Lie conformal and variational complexes.

Rational arithmetic throughout; differential polynomials are `Poly` objects
over jet variables u_i^(n).
"""

from __future__ import annotations

from .diffalg import (Poly, Var, antiderivative, format_poly, is_total_derivative, quotient_equal,
                      total_derivative, variational_derivative)
from .errors import (CalcError, DegreeMismatch, ExprSyntaxError, InsufficientOrder, InvalidStructure,
                     MixedAlgebroid, NonzeroBracket, NotChainMap, SkewAdjointViolation, UnknownGenerator)
from .gerstenhaber import Calculus, Report
from .parsing import parse_expr

__version__ = "0.1.0"

__all__ = [
    "Poly", "Var", "antiderivative", "format_poly", "is_total_derivative", "quotient_equal",
    "total_derivative", "variational_derivative", "parse_expr", "Calculus", "Report",
    "CalcError", "DegreeMismatch", "ExprSyntaxError", "InsufficientOrder", "InvalidStructure",
    "MixedAlgebroid", "NonzeroBracket", "NotChainMap", "SkewAdjointViolation", "UnknownGenerator",
]
