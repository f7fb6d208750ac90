"""Exception and warning types raised across the package."""


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


class SingularConfiguration(ValueError):
    """Point configuration whose covariance matrix is not positive definite."""


class SizeError(ValueError):
    """Problem size beyond what an exact combinatorial evaluation supports."""


class DegenerateInput(ValueError):
    """Polynomial with all coefficients equal to zero."""


class TruncationError(ValueError):
    """No truncation order below the hard cap meets the tail bound."""


class QuadratureError(RuntimeError):
    """Numerical baseline integral failed its self-consistency check."""


class ConfigError(ValueError):
    """Invalid command-line or config-file setting."""


class NonConvergenceWarning(RuntimeWarning):
    """Root finder hit its iteration limit; best iterate returned."""


class IoError(OSError):
    """An output artifact could not be written or an input table read."""
