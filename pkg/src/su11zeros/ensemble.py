"""Random coefficient vectors for SU(1,1) polynomials and analytic functions.

A sample is stored as a :class:`CoefficientPolynomial`: complex coefficients
``coeffs[m]`` (coefficient of ``z**m``) together with a real ``log_scale``;
the represented polynomial is ``exp(log_scale) * sum(coeffs[m] * z**m)``.
Weights such as ``sqrt(C(m+L-1, m))`` are formed in log space and the stored
vector is rescaled so that its largest modulus lies in ``[1, 2]``; zeros do
not depend on the common factor.

Every trial owns a counter-based random stream (Philox) keyed by
``(seed, trial_index)``, so a trial can be regenerated on its own, in any
order, in any process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import betainc

from .errors import TruncationError

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_STIRLING_MIN = 33
MAX_TRUNCATION_ORDER = 100_000


@dataclass(frozen=True)
class EnsembleParams:
    """Ensemble descriptor: parameter ``L``, degree ``N``, and stream identity."""

    L: int
    N: int
    seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if int(self.trial_index) < 0:
            raise ValueError("trial_index must be non-negative")

    def for_trial(self, trial_index: int) -> "EnsembleParams":
        return EnsembleParams(self.L, self.N, self.seed, trial_index)


@dataclass
class CoefficientPolynomial:
    coeffs: np.ndarray
    log_scale: float = 0.0
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 1 or self.coeffs.size < 1:
            raise ValueError("coeffs must be a non-empty 1-D array")

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def rescaled(self, shift: float) -> "CoefficientPolynomial":
        """Same polynomial with ``coeffs * exp(shift)`` and ``log_scale - shift``."""
        return CoefficientPolynomial(self.coeffs * math.exp(shift), self.log_scale - shift, dict(self.meta))

    def __call__(self, z):
        """Value of the stored-scale polynomial ``sum(coeffs[m] z**m)``."""
        return np.polynomial.polynomial.polyval(z, self.coeffs)


def _stirling_tail(x: float) -> float:
    # ln Gamma(x+1) - [(x+1/2) ln x - x + ln sqrt(2 pi)], valid for x >= 33
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x


def log_binomial_weight(m: int, L: int) -> float:
    """Return ``ln C(m+L-1, m)`` without forming any factorial.

    Uses the symmetry ``C(n+k, k)`` with ``k = min(m, L-1)``. Small ``k`` is a
    compensated sum of ``log1p(n/j)``; large ``k`` uses a Stirling expansion
    rearranged so that no two large logarithms are subtracted.
    """
    if m < 0 or L < 1:
        raise ValueError("need m >= 0 and L >= 1")
    k, n = sorted((int(m), int(L) - 1))
    if k == 0:
        return 0.0
    if k < _STIRLING_MIN:
        return math.fsum(math.log1p(n / j) for j in range(1, k + 1))
    return math.fsum((
        (n + 0.5) * math.log1p(k / n),
        k * math.log1p(n / k),
        -0.5 * math.log(k),
        -_HALF_LOG_2PI,
        _stirling_tail(n + k),
        -_stirling_tail(n),
        -_stirling_tail(k),
    ))


@lru_cache(maxsize=64)
def _log_weights(N: int, L: int) -> np.ndarray:
    w = np.array([log_binomial_weight(m, L) for m in range(N + 1)])
    w.flags.writeable = False
    return w


def log_binomial_weights(N: int, L: int) -> np.ndarray:
    """Vector ``ln C(m+L-1, m)`` for ``m = 0..N`` (cached, read-only)."""
    return _log_weights(int(N), int(L))


@lru_cache(maxsize=64)
def _log_inverse_factorials(M: int) -> np.ndarray:
    from scipy.special import gammaln

    w = -gammaln(np.arange(M + 1) + 1.0)
    w.flags.writeable = False
    return w


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent Philox stream for one trial."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.Philox(ss))


def complex_gaussians(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` standard complex Gaussians: real and imaginary parts each N(0, 1/2)."""
    xy = rng.standard_normal((n, 2))
    return (xy[:, 0] + 1j * xy[:, 1]) * math.sqrt(0.5)


def _weighted_sample(log_w: np.ndarray, rng: np.random.Generator, meta: dict) -> CoefficientPolynomial:
    n = log_w.size
    while True:
        a = complex_gaussians(rng, n)
        with np.errstate(divide="ignore"):
            log_mod = 0.5 * log_w + np.log(np.abs(a))
        log_scale = float(np.max(log_mod)) - math.log(1.5)
        coeffs = np.exp(0.5 * log_w - log_scale) * a
        if coeffs[-1] != 0:
            return CoefficientPolynomial(coeffs, log_scale, meta)


def sample_polynomial(params: EnsembleParams) -> CoefficientPolynomial:
    """Draw ``psi(z) = sum_{m<=N} sqrt(C(m+L-1, m)) a_m z^m`` for one trial."""
    rng = trial_rng(params.seed, params.trial_index)
    meta = {"kind": "polynomial", "L": params.L, "N": params.N}
    return _weighted_sample(log_binomial_weights(params.N, params.L), rng, meta)


def reversed_polynomial(p: CoefficientPolynomial, L: int) -> CoefficientPolynomial:
    """``phi(z) = C(N+L-1, N)**(-1/2) z**N psi(1/z)``.

    The coefficient of ``z**k`` in ``phi`` is the coefficient of ``z**(N-k)`` in
    ``psi`` divided by ``sqrt(C(N+L-1, N))``; the division is carried in
    ``log_scale`` only.
    """
    N = p.degree
    meta = dict(p.meta, kind="reversed")
    return CoefficientPolynomial(p.coeffs[::-1].copy(), p.log_scale - 0.5 * log_binomial_weight(N, L), meta)


def reversed_variance_ratio(N: int, L: int, k: int) -> float:
    """Variance of the ``z**k`` coefficient of the reversed polynomial.

    Equals ``C(N-k+L-1, N-k) / C(N+L-1, N)``, which tends to 1 as ``N`` grows;
    ``k = 1`` gives ``N / (N+L-1)``.
    """
    if not 0 <= k <= N:
        raise ValueError("need 0 <= k <= N")
    return math.exp(log_binomial_weight(N - k, L) - log_binomial_weight(N, L))


def truncation_tail_ratio(L: int, M: int, r_max: float) -> float:
    """Tail variance past order ``M`` relative to the retained variance at ``|z| = r_max``.

    ``sum_{m>M} C(m+L-1,m) x^m (1-x)^L`` is the regularized incomplete beta
    ``I_x(M+1, L)`` with ``x = r_max**2``; the retained part is one minus it.
    """
    x = r_max * r_max
    tail = float(betainc(M + 1, L, x))
    return tail / (1.0 - tail)


def truncation_order(L: int, r_max: float, rel_tol: float = 1e-20, cap: int = MAX_TRUNCATION_ORDER) -> int:
    """Smallest ``M`` whose relative tail variance at ``r_max`` is below ``rel_tol``."""
    if not 0.0 < r_max < 1.0:
        raise ValueError("r_max must lie in (0, 1)")
    if truncation_tail_ratio(L, cap, r_max) >= rel_tol:
        raise TruncationError(f"no truncation order <= {cap} reaches tail ratio {rel_tol:g} at r_max={r_max}")
    lo, hi = 0, cap
    while lo < hi:
        mid = (lo + hi) // 2
        if truncation_tail_ratio(L, mid, r_max) < rel_tol:
            hi = mid
        else:
            lo = mid + 1
    return lo


def sample_analytic_truncated(L: int, r_max: float, seed: int, trial_index: int, M: int | None = None,
                              rel_tol: float = 1e-20) -> CoefficientPolynomial:
    """Truncated SU(1,1) random analytic function, accurate inside ``|z| <= r_max``.

    ``M`` defaults to :func:`truncation_order`; an explicit ``M`` that violates
    the tail bound raises :class:`TruncationError`.
    """
    needed = truncation_order(L, r_max, rel_tol)
    if M is None:
        M = needed
    elif M < needed:
        raise TruncationError(f"M={M} too small for r_max={r_max}; need at least {needed}")
    rng = trial_rng(seed, trial_index)
    meta = {"kind": "analytic", "L": L, "M": M, "r_max": r_max}
    return _weighted_sample(log_binomial_weights(M, L), rng, meta)


def sample_w1(M: int, seed: int, trial_index: int) -> CoefficientPolynomial:
    """Truncated W_1 (flat) Gaussian entire function ``sum a_m u^m / sqrt(m!)``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = trial_rng(seed, trial_index)
    return _weighted_sample(_log_inverse_factorials(int(M)), rng, {"kind": "w1", "M": M})


def w1_weight(m: int) -> float:
    """Coefficient variance ``1/m!`` of the W_1 series."""
    return math.exp(-math.lgamma(m + 1.0))


def coefficient_draws(p: CoefficientPolynomial, L: int) -> np.ndarray:
    """Recover the underlying ``a_m`` from an SU(1,1) polynomial sample."""
    log_w = log_binomial_weights(p.degree, L)
    return p.coeffs * np.exp(p.log_scale - 0.5 * log_w)
