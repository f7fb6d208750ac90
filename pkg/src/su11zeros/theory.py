"""Closed-form zero statistics of the SU(1,1) ensembles.

Radial profile near the unit circle
    ``g(s) = (e^s - 1)/s = int_0^1 e^{st} dt`` and its derivatives
    ``g^(j)(s) = int_0^1 t^j e^{st} dt`` give the limiting fraction of zeros
    ``P(s) = g^(L)/g^(L-1)`` inside ``|z|^2 = 1 + s/N`` and the scaled density
    ``p(s) = P'(s)/pi``.

Finite degree
    ``F(x) = sum_{m<=N} C(m+L-1, m) x^m`` and ``p_N = Var_w(m) / (pi x)``
    with weights ``w_m ~ C(m+L-1, m) x^m``; this is the Poincare-Lelong
    density written so that it needs no derivative of ``F``.

Disk geometry and correlations
    density ``L / (pi (1-|z|^2)^2)``, hyperbolic distance, SU(1,1) Moebius
    maps, the two-point function ``k2(r)`` and its large-``L`` limit.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import integrate

from . import _ddouble as dd
from .ensemble import log_binomial_weights
from .errors import DomainError

SERIES_SWITCH = 8.0
K2_SERIES_R = 1e-3
K2_SERIES_LR2 = 1e-4
HANNAY_SERIES_T = 1.0
MOBIUS_TOL = 1e-10


def _series_window(j: int) -> float:
    # closed forms are well conditioned only once |s| clearly exceeds j
    return max(SERIES_SWITCH, 2.0 * (j + 1))


def _g_series(j: int, s: float) -> float:
    """Positive-term series for ``g^(j)(s)``.

    ``s >= 0``: ``sum_k s^k / (k! (j+k+1))``.
    ``s < 0``: the Kummer-transformed ``e^s/(j+1) sum_k (-s)^k / ((j+2)...(j+k+1))``,
    which avoids the alternating signs of the first form.
    """
    if s >= 0.0:
        total = 1.0 / (j + 1)
        term = 1.0
        k = 0
        while True:
            k += 1
            term *= s / k
            add = term / (j + k + 1)
            total += add
            if add <= 1e-18 * total and k > s:
                return total
    x = -s
    total = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= x / (j + k + 1)
        total += term
        if term <= 1e-18 * total and x < j + k + 1:
            return math.exp(s) * total / (j + 1)


def _g_closed(j: int, s: float) -> float:
    """Closed forms: for ``s > 0``
    ``e^s/s [1 - j/s + j(j-1)/s^2 - ... + (-1)^j j!/s^j] + (-1)^(j+1) j!/s^(j+1)``;
    for ``s = -x < 0``  ``j!/x^(j+1) [1 - e^(-x) (1 + x + ... + x^j/j!)]``.
    """
    if s == 0.0:
        raise ValueError("closed form is singular at s = 0")
    if s > 0.0:
        bracket = 1.0
        term = 1.0
        for i in range(1, j + 1):
            term *= -(j - i + 1) / s
            bracket += term
        tail = (-1.0) ** (j + 1) * math.exp(math.lgamma(j + 1.0) - (j + 1) * math.log(s))
        return math.exp(s) / s * bracket + tail
    x = -s
    partial = 1.0
    term = 1.0
    for k in range(1, j + 1):
        term *= x / k
        partial += term
    return math.exp(math.lgamma(j + 1.0) - (j + 1) * math.log(x)) * (1.0 - math.exp(-x) * partial)


def g_derivative(j: int, s: float) -> float:
    """``d^j/ds^j (e^s - 1)/s``, strictly positive for every real ``s``."""
    j = int(j)
    if j < 0:
        raise ValueError("j must be non-negative")
    s = float(s)
    if abs(s) <= _series_window(j):
        return _g_series(j, s)
    return _g_closed(j, s)


def log_g_derivative(j: int, s: float) -> float:
    """``ln g^(j)(s)``, finite for all real ``s`` (no overflow of ``e^s``)."""
    j = int(j)
    if j < 0:
        raise ValueError("j must be non-negative")
    s = float(s)
    if abs(s) <= _series_window(j):
        return math.log(_g_series(j, s))
    if s > 0.0:
        bracket = 1.0
        term = 1.0
        for i in range(1, j + 1):
            term *= -(j - i + 1) / s
            bracket += term
        # tail relative to e^s/s: (-1)^(j+1) j! s^-j e^-s
        rel = (-1.0) ** (j + 1) * math.exp(math.lgamma(j + 1.0) - j * math.log(s) - s)
        return s - math.log(s) + math.log(bracket + rel)
    x = -s
    # e^-x sum_{k<=j} x^k/k!, summed in log space
    partial = math.fsum(math.exp(k * math.log(x) - math.lgamma(k + 1.0) - x) for k in range(j + 1))
    return math.lgamma(j + 1.0) - (j + 1) * math.log(x) + math.log1p(-partial)


def _vectorized(fn):
    def wrapper(L, s):
        if np.ndim(s) == 0:
            return fn(L, float(s))
        return np.array([fn(L, float(v)) for v in np.ravel(s)]).reshape(np.shape(s))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_vectorized
def distribution_P(L: int, s: float) -> float:
    """Limiting fraction of zeros with ``|z|^2 <= 1 + s/N``: ``g^(L)(s) / g^(L-1)(s)``."""
    return math.exp(log_g_derivative(L, s) - log_g_derivative(L - 1, s))


@_vectorized
def scaled_density(L: int, s: float) -> float:
    """Limiting radial profile ``p(s) = (1/pi) d/ds [g^(L)/g^(L-1)]``.

    Expanded as ``(g^(L+1) g^(L-1) - g^(L)^2) / (pi g^(L-1)^2)``.
    """
    l0 = log_g_derivative(L - 1, s)
    r1 = math.exp(log_g_derivative(L, s) - l0)
    r2 = math.exp(log_g_derivative(L + 1, s) - l0)
    return (r2 - r1 * r1) / math.pi


def bin_average_density(L: int, lo: float, hi: float) -> float:
    """Mean of ``p(s)`` over ``[lo, hi]``, exact through ``P``."""
    return (distribution_P(L, hi) - distribution_P(L, lo)) / (math.pi * (hi - lo))


def _finite_N_moments(L: int, N: int, x: float) -> tuple[float, float]:
    log_c = log_binomial_weights(N, L)
    m = np.arange(N + 1, dtype=float)
    logw = log_c + m * math.log(x)
    w = np.exp(logw - logw.max())
    w /= w.sum()
    mean = float(np.dot(w, m))
    var = float(np.dot(w, (m - mean) ** 2))
    return mean, var


def finite_N_density(L: int, N: int, x: float) -> float:
    """Exact density of zeros of the degree-``N`` polynomial at ``|z|^2 = x``."""
    if x < 0:
        raise DomainError("x = |z|^2 must be non-negative")
    if x == 0.0:
        return L / math.pi
    _, var = _finite_N_moments(L, N, x)
    return var / (math.pi * x)


def finite_N_distribution(L: int, N: int, x: float) -> float:
    """Expected fraction of zeros with ``|z|^2 <= x``, equal to ``x F'(x) / (N F(x))``."""
    if x < 0:
        raise DomainError("x = |z|^2 must be non-negative")
    if x == 0.0:
        return 0.0
    mean, _ = _finite_N_moments(L, N, x)
    return mean / N


def finite_N_integral(L: int, N: int) -> float:
    """``int_C p_N dA = pi int_0^inf p_N dx`` by adaptive quadrature (should equal ``N``)."""
    f = lambda x: math.pi * finite_N_density(L, N, x)
    g = lambda y: f(1.0 / y) / (y * y)
    w = 1.0 / N
    inner_pts = [max(0.0, 1.0 - k * w) for k in (40, 10, 3, 1)]
    outer_pts = [1.0 / (1.0 + k * w) for k in (40, 10, 3, 1)]
    a, _ = integrate.quad(f, 0.0, 1.0, points=inner_pts, limit=400, epsabs=0, epsrel=1e-11)
    b, _ = integrate.quad(g, 0.0, 1.0, points=outer_pts, limit=400, epsabs=0, epsrel=1e-11)
    return a + b


def density_rho(L: int, z) -> float:
    """Zero density ``L / (pi (1 - |z|^2)^2)`` of the random analytic function."""
    x = np.abs(z) ** 2
    if np.any(x >= 1.0):
        raise DomainError("density defined only on the open unit disk")
    return L / (math.pi * (1.0 - x) ** 2)


def covariance_kernel(L: int, z, w):
    """``E psi(z) conj(psi(w)) = (1 - z conj(w))^(-L)``."""
    zw = np.asarray(z) * np.conj(w)
    if np.any(np.abs(zw) >= 1.0):
        raise DomainError("kernel needs |z conj(w)| < 1")
    out = (1.0 - zw) ** (-L)
    return complex(out) if np.ndim(out) == 0 else out


def _check_disk(*zs):
    for z in zs:
        if np.any(np.abs(z) >= 1.0):
            raise DomainError("points must lie in the open unit disk")


def hyperbolic_distance(z1, z2):
    """Invariant distance ``tau`` with ``tanh(tau/2) = |z1 - z2| / |1 - z1 conj(z2)|``."""
    _check_disk(z1, z2)
    r = np.abs(np.subtract(z1, z2)) / np.abs(1.0 - np.multiply(z1, np.conj(z2)))
    tau = 2.0 * np.arctanh(np.minimum(r, 1.0))
    return float(tau) if np.ndim(tau) == 0 else tau


def pseudo_distance(z1, z2):
    """``r = tanh(tau/2)``."""
    return np.abs(np.subtract(z1, z2)) / np.abs(1.0 - np.multiply(z1, np.conj(z2)))


def r_from_tau(tau):
    return np.tanh(np.asarray(tau) / 2.0)


def tau_from_r(r):
    return 2.0 * np.arctanh(r)


def _check_mobius(a: complex, b: complex):
    det = abs(a) ** 2 - abs(b) ** 2
    if abs(det - 1.0) > MOBIUS_TOL:
        raise DomainError(f"|a|^2 - |b|^2 = {det!r}, expected 1")


def mobius_apply(a: complex, b: complex, z):
    """Apply ``z -> (a z + b) / (conj(b) z + conj(a))`` with ``|a|^2 - |b|^2 = 1``.

    The matrix rows are ``(a, b)`` and ``(conj(b), conj(a))``. Only the sign
    ``|a|^2 - |b|^2 = 1`` keeps the unit disk invariant; the opposite sign
    exchanges the disk with its exterior.
    """
    _check_mobius(a, b)
    _check_disk(z)
    z = np.asarray(z)
    out = (a * z + b) / (np.conj(b) * z + np.conj(a))
    return complex(out) if out.ndim == 0 else out


def mobius_inverse(a: complex, b: complex) -> tuple[complex, complex]:
    return complex(np.conj(a)), complex(-b)


def mobius_compose(m1, m2) -> tuple[complex, complex]:
    """Parameters of ``m1 o m2`` (apply ``m2`` first)."""
    a1, b1 = m1
    a2, b2 = m2
    return a1 * a2 + b1 * np.conj(b2), a1 * b2 + b1 * np.conj(a2)


def random_mobius(rng: np.random.Generator, max_boost: float = 2.0) -> tuple[complex, complex]:
    """Random disk automorphism ``a = cosh(t) e^{i alpha}``, ``b = sinh(t) e^{i beta}``."""
    t = rng.uniform(0.0, max_boost)
    alpha, beta = rng.uniform(0.0, 2.0 * math.pi, size=2)
    return complex(math.cosh(t) * np.exp(1j * alpha)), complex(math.sinh(t) * np.exp(1j * beta))


def k2_small_r(L: int, r: float) -> float:
    """Expansion of ``k2`` through order ``r^8``."""
    r2 = r * r
    a = (L + 1) ** 2 / L
    b = (L * L - 1) ** 2 / L
    return r2 * (a / 2 - r2 * (a / 4 + r2 * (b / 36 + r2 * b / 72)))


def _k2_ddouble(L: int, r: float) -> float:
    y = dd.two_prod(r, r)
    one_minus_y = dd.add((1.0, 0.0), dd.neg(y))
    q = dd.power(one_minus_y, L)
    q2 = dd.mul(q, q)
    y2 = dd.mul(y, y)
    t1 = dd.mul(dd.mul(q2, q), dd.mul(one_minus_y, one_minus_y))
    a = dd.add(dd.add(dd.mul(dd.from_float(L * L - 2.0 * L - 2.0), y2),
                      dd.mul(dd.from_float(4.0 * L + 4.0), y)), (-1.0, 0.0))
    b = dd.add(dd.add(dd.mul(dd.from_float((L + 1.0) ** 2), y2),
                      dd.mul(dd.from_float(-(4.0 * L + 2.0)), y)), (-1.0, 0.0))
    num = dd.add(dd.add(t1, dd.mul(a, q2)), dd.add(dd.mul(b, q), (1.0, 0.0)))
    one_minus_q = dd.add((1.0, 0.0), dd.neg(q))
    den = dd.mul(dd.mul(one_minus_q, one_minus_q), one_minus_q)
    return dd.to_float(num) / dd.to_float(den)


def _k2_scalar(L: int, r: float) -> float:
    if not 0.0 <= r < 1.0:
        raise DomainError("r must lie in [0, 1)")
    if r == 0.0:
        return 0.0
    if r < K2_SERIES_R and L * r * r < K2_SERIES_LR2:
        return k2_small_r(L, r)
    return _k2_ddouble(L, r)


def k2_closed_form(L: int, r):
    """Normalized two-point function of the random analytic function at ``r = tanh(tau/2)``.

    The numerator combination of powers of ``(1 - r^2)^L`` cancels to many
    digits for small ``r`` or large ``L``, so it is assembled in double-double;
    very small ``r`` uses the ``r^8`` expansion.
    """
    L = int(L)
    if L < 1:
        raise ValueError("L must be >= 1")
    if np.ndim(r) == 0:
        return _k2_scalar(L, float(r))
    return np.array([_k2_scalar(L, float(v)) for v in np.ravel(r)]).reshape(np.shape(r))


def _hannay_numerator_coeffs(order: int = 60) -> list[float]:
    # (sinh^2 t + t^2) cosh t - 2 t sinh t as an exact power series in t
    sinh = [Fraction(0)] * (order + 1)
    cosh = [Fraction(0)] * (order + 1)
    for k in range(order + 1):
        if k % 2:
            sinh[k] = Fraction(1, math.factorial(k))
        else:
            cosh[k] = Fraction(1, math.factorial(k))

    def mul(a, b):
        out = [Fraction(0)] * (order + 1)
        for i, ai in enumerate(a):
            if ai:
                for j in range(order + 1 - i):
                    if b[j]:
                        out[i + j] += ai * b[j]
        return out

    s2 = mul(sinh, sinh)
    s2[2] += 1
    num = mul(s2, cosh)
    for k in range(order):
        num[k + 1] -= 2 * sinh[k]
    return [float(c) for c in num]


_HANNAY_NUM = _hannay_numerator_coeffs()


def _hannay_scalar(u: float) -> float:
    if u < 0:
        raise DomainError("u must be non-negative")
    t = 0.5 * u * u
    if t == 0.0:
        return 0.0
    if t <= HANNAY_SERIES_T:
        num = 0.0
        for c in reversed(_HANNAY_NUM):
            num = num * t + c
        return num / math.sinh(t) ** 3
    e = math.exp(-u * u)
    u2 = u * u
    u4 = u2 * u2
    return (1.0 + (u4 - 4.0 * u2 - 1.0) * e + (u4 + 4.0 * u2 - 1.0) * e * e + e ** 3) / (1.0 - e) ** 3


def k2_hannay(u):
    """Large-``L`` limit of ``k2`` under ``r = u / sqrt(L)`` (W_1 two-point function).

    ``((sinh^2 t + t^2) cosh t - 2 t sinh t) / sinh^3 t`` with ``t = u^2/2``.
    """
    if np.ndim(u) == 0:
        return _hannay_scalar(float(u))
    return np.array([_hannay_scalar(float(v)) for v in np.ravel(u)]).reshape(np.shape(u))


def k2_explim(u: float) -> float:
    """Exponential form of the Hannay limit, evaluated literally (reference use only)."""
    e = math.exp(u * u)
    u2 = u * u
    u4 = u2 * u2
    return (e ** 3 + (u4 - 4 * u2 - 1) * e ** 2 + (u4 + 4 * u2 - 1) * e + 1) / (e - 1) ** 3


def k2_theory_from_tau(L: int, tau):
    return k2_closed_form(L, np.tanh(np.asarray(tau) / 2.0))
