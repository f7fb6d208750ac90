"""All complex zeros of a coefficient vector by Ehrlich-Aberth iteration.

The iteration updates every approximation at once (Gauss-Seidel ordering),
with each Newton quotient taken from the polynomial or, outside the unit
circle, from its reversal at ``1/z`` so that ``|z|**N`` never overflows.
A root is frozen once ``|p(z)|`` is at the level of the a-priori Horner
rounding bound. Final residuals come from a compensated (double-double)
Horner evaluation and are reported as relative backward errors
``|p(z)| / sum_k |c_k| |z|**k``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .ensemble import CoefficientPolynomial
from .errors import DegenerateInput, NonConvergenceWarning

EPS = 2.0**-53
_SPLITTER = 134217729.0  # 2**27 + 1
_ANGLE_OFFSET = 0.7071067811865476 / 3.0  # irrational fraction of a turn


@dataclass
class ZeroSet:
    zeros: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool

    @property
    def degree(self) -> int:
        return self.zeros.size

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0


def _gamma(k):
    return k * EPS / (1.0 - k * EPS)


@njit(cache=True)
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True)
def _two_prod(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True)
def _comp_horner(c, z, reverse):
    """Compensated Horner of sum c[k] z^k (or of the reversed vector).

    Returns (value, absolute-value polynomial sum |c_k||z|^k).
    """
    n = c.size
    zr, zi = z.real, z.imag
    az = abs(z)
    if reverse:
        k0, k1, step = 0, n, 1
    else:
        k0, k1, step = n - 1, -1, -1
    sr, si = c[k0].real, c[k0].imag
    er, ei = 0.0, 0.0
    mag = abs(c[k0])
    for k in range(k0 + step, k1, step):
        # s * z, real part sr*zr - si*zi, imaginary part sr*zi + si*zr
        p1, e1 = _two_prod(sr, zr)
        p2, e2 = _two_prod(-si, zi)
        p3, e3 = _two_prod(sr, zi)
        p4, e4 = _two_prod(si, zr)
        qr, f1 = _two_sum(p1, p2)
        qi, f2 = _two_sum(p3, p4)
        ck = c[k]
        sr_new, g1 = _two_sum(qr, ck.real)
        si_new, g2 = _two_sum(qi, ck.imag)
        # err = err * z + local errors
        er, ei = (er * zr - ei * zi) + (e1 + e2 + f1 + g1), (er * zi + ei * zr) + (e3 + e4 + f2 + g2)
        sr, si = sr_new, si_new
        mag = mag * az + abs(ck)
    return complex(sr + er, si + ei), mag


@njit(cache=True)
def _newton_ratio(c, z):
    """Newton quotient p/p' at z, plus |p| and sum |c_k||z|^k on the same scale."""
    n = c.size - 1
    if abs(z) <= 1.0:
        p = c[n]
        dp = 0j
        mag = abs(c[n])
        az = abs(z)
        for k in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + c[k]
            mag = mag * az + abs(c[k])
        if dp == 0:
            return complex(np.inf, 0.0), abs(p), mag
        return p / dp, abs(p), mag
    w = 1.0 / z
    q = c[0]
    dq = 0j
    mag = abs(c[0])
    aw = abs(w)
    for k in range(1, n + 1):
        dq = dq * w + q
        q = q * w + c[k]
        mag = mag * aw + abs(c[k])
    den = n * q - w * dq
    if den == 0:
        return complex(np.inf, 0.0), abs(q), mag
    return z * q / den, abs(q), mag


@njit(cache=True)
def _aberth(c, z, eta, max_iter):
    n = z.size
    done = np.zeros(n, dtype=np.bool_)
    remaining = n
    it = 0
    while it < max_iter and remaining > 0:
        it += 1
        for i in range(n):
            if done[i]:
                continue
            zi = z[i]
            ratio, ap, mag = _newton_ratio(c, zi)
            if ap <= eta * mag:
                done[i] = True
                remaining -= 1
            if not np.isfinite(ratio.real):
                # stationary point of p: nudge off it
                z[i] = zi * (1.0 + 1e-3j) + 1e-3
                continue
            acc = 0j
            for j in range(n):
                if j != i:
                    acc += 1.0 / (zi - z[j])
            z[i] = zi - ratio / (1.0 - ratio * acc)
    return it


@njit(cache=True)
def _residuals(c, z):
    out = np.empty(z.size)
    for i in range(z.size):
        zi = z[i]
        if abs(zi) <= 1.0:
            v, mag = _comp_horner(c, zi, False)
        else:
            v, mag = _comp_horner(c, 1.0 / zi, True)
        out[i] = abs(v) / mag if mag > 0 else 0.0
    return out


def _upper_hull(y: np.ndarray) -> list[int]:
    """Indices of the upper convex hull of the points ``(k, y[k])``."""
    hull: list[int] = []
    for k in range(y.size):
        if not np.isfinite(y[k]):
            continue
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j if it lies on or below the chord i -> k
            if (y[j] - y[i]) * (k - i) <= (y[k] - y[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def initial_guesses(c: np.ndarray) -> np.ndarray:
    """Starting points from the Newton polygon of ``log|c_m|``.

    Between consecutive hull vertices ``i < j`` the polynomial has about
    ``j - i`` roots of modulus ``|c_i / c_j|**(1/(j-i))``; that many points are
    spread on a circle of this radius, each circle rotated by an irrational
    offset so that no two guesses coincide.
    """
    n = c.size - 1
    with np.errstate(divide="ignore"):
        y = np.log(np.abs(c))
    hull = _upper_hull(y)
    out = np.empty(n, dtype=np.complex128)
    pos = 0
    for a, (i, j) in enumerate(zip(hull[:-1], hull[1:])):
        cnt = j - i
        radius = math.exp((y[i] - y[j]) / cnt)
        angles = 2.0 * np.pi * (np.arange(cnt) / cnt + (a + 1) * _ANGLE_OFFSET) + 0.5 * _ANGLE_OFFSET
        out[pos:pos + cnt] = radius * np.exp(1j * angles)
        pos += cnt
    return out


def find_roots(p: CoefficientPolynomial | np.ndarray, tol: float = 1e-12, max_iter: int = 200) -> ZeroSet:
    """Return every zero of ``p`` with a residual certificate.

    Exact zero low-order coefficients are split off as roots at the origin
    before iterating. A solve that exhausts ``max_iter`` returns the best
    iterate with ``converged=False`` and issues :class:`NonConvergenceWarning`.
    """
    c = p.coeffs if isinstance(p, CoefficientPolynomial) else np.asarray(p, dtype=np.complex128)
    c = np.ascontiguousarray(c, dtype=np.complex128)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        raise DegenerateInput("all coefficients are zero")
    c = c[: nz[-1] + 1]
    n = c.size - 1
    if n < 1:
        raise ValueError("polynomial degree must be at least 1")
    lead_zeros = int(nz[0])
    core = c[lead_zeros:]
    zeros = np.zeros(n, dtype=np.complex128)
    iterations = 0
    if core.size > 1:
        m = core.size - 1
        z = initial_guesses(core)
        eta = _gamma(2 * m + 2)
        iterations = int(_aberth(core, z, eta, int(max_iter)))
        zeros[lead_zeros:] = z
    residuals = _residuals(c, zeros)
    converged = bool(np.all(np.isfinite(zeros)) and residuals.max() <= tol)
    if not converged:
        warnings.warn(f"root finder stopped after {iterations} iterations with max residual "
                      f"{residuals.max():.3g} > {tol:g}", NonConvergenceWarning, stacklevel=2)
    return ZeroSet(zeros, residuals, iterations, converged)


def evaluate_horner(p: CoefficientPolynomial | np.ndarray, z: complex) -> tuple[complex, float]:
    """Compensated Horner value of the stored coefficients at ``z`` and an error bound.

    The bound ``2u|v| + 2 gamma(4N+4)**2 * sum|c_k||z|**k`` covers the
    double-double recurrence and the final rounding to double.
    """
    c = p.coeffs if isinstance(p, CoefficientPolynomial) else np.asarray(p, dtype=np.complex128)
    c = np.ascontiguousarray(c, dtype=np.complex128)
    n = c.size - 1
    v, mag = _comp_horner(c, complex(z), False)
    mag *= 1.0 + _gamma(2 * n + 2)
    return v, 2.0 * EPS * abs(v) + 2.0 * _gamma(4 * n + 4) ** 2 * mag


def match_roots(a: np.ndarray, b: np.ndarray) -> float:
    """Largest distance between two root multisets after optimal pairing."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a)
    b = np.asarray(b)
    if a.size != b.size:
        raise ValueError("root sets differ in size")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max())
