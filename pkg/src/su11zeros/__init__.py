"""Zeros of SU(1,1) random polynomials and analytic functions.

Sampling, root finding, closed-form theory (densities, distributions and
correlation functions), Kac-Rice correlations and Monte Carlo estimators.
"""

from .ensemble import CoefficientPolynomial, EnsembleParams, sample_analytic_truncated, sample_polynomial
from .errors import (
    ConfigError,
    DegenerateInput,
    DomainError,
    NonConvergenceWarning,
    QuadratureError,
    SingularConfiguration,
    SizeError,
    TruncationError,
)
from .rootfind import ZeroSet, find_roots

__version__ = "0.1.0"

__all__ = [
    "CoefficientPolynomial",
    "ConfigError",
    "DegenerateInput",
    "DomainError",
    "EnsembleParams",
    "NonConvergenceWarning",
    "QuadratureError",
    "SingularConfiguration",
    "SizeError",
    "TruncationError",
    "ZeroSet",
    "find_roots",
    "sample_analytic_truncated",
    "sample_polynomial",
]
