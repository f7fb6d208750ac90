"""Gaussian Kac-Rice evaluation of zero correlations of the SU(1,1) analytic function.

For points ``z_1..z_n`` in the disk the joint law of ``psi(z_p)`` and
``psi'(z_p)`` is described by the blocks

    A = E psi(z_p) conj psi(z_q),  B = E psi(z_p) conj psi'(z_q),
    C = E psi'(z_p) conj psi'(z_q),  Lambda = C - B^* A^{-1} B,

and the n-point function is ``K_n = <prod |xi_p|^2>_Lambda / (pi^n det A)``.
The Gaussian moment ``<prod |xi_p|^2>`` is the permanent of ``Lambda``
(Wick pairing). A second, independent route extracts the same quantity as
the top coefficient of ``1 / det(I + Lambda Omega)`` in a Grassmann algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .errors import DomainError, SingularConfiguration, SizeError
from .theory import mobius_apply

MAX_PERMANENT_N = 12
MAX_BEREZIN_N = 8
SEPARATION_FACTOR = 1e-6


@dataclass(frozen=True)
class PointConfig:
    points: np.ndarray
    L: int

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=np.complex128)).copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("need a non-empty 1-D array of points")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError("L must be a positive integer")
        if np.any(np.abs(pts) >= 1.0):
            raise DomainError("all points must lie in the open unit disk")

    @property
    def n(self) -> int:
        return self.points.size

    def min_separation(self) -> float:
        if self.n < 2:
            return math.inf
        d = np.abs(self.points[:, None] - self.points[None, :])
        return float(d[~np.eye(self.n, dtype=bool)].min())

    def check_separation(self):
        limit = SEPARATION_FACTOR * (1.0 - float(np.max(np.abs(self.points))) ** 2)
        if self.min_separation() < limit:
            raise SingularConfiguration(f"points closer than {limit:.3g}; covariance is numerically singular")

    def mapped(self, a: complex, b: complex) -> "PointConfig":
        return PointConfig(mobius_apply(a, b, self.points), self.L)


@dataclass
class CovarianceBlock:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Lambda: np.ndarray | None = None
    chol: tuple | None = None

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _blocks(z: np.ndarray, L: int):
    zw = z[:, None] * np.conj(z)[None, :]
    base = 1.0 - zw
    A = base ** (-L)
    B = L * z[:, None] * base ** (-L - 1)
    C = L * (1.0 + L * zw) * base ** (-L - 2)
    return A, B, C


def build_blocks(cfg: PointConfig) -> CovarianceBlock:
    """Covariance blocks of ``(psi(z_p), psi'(z_p))`` with ``Lambda`` filled in."""
    cfg.check_separation()
    A, B, C = _blocks(cfg.points, cfg.L)
    blocks = CovarianceBlock(A, B, C)
    lambda_matrix(blocks)
    return blocks


def lambda_matrix(blocks: CovarianceBlock) -> np.ndarray:
    """Schur complement ``C - B^* A^{-1} B`` via a Cholesky solve (cached on ``blocks``)."""
    if blocks.Lambda is not None:
        return blocks.Lambda
    try:
        chol = linalg.cho_factor(blocks.A, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularConfiguration("covariance matrix A is not positive definite") from exc
    X = linalg.cho_solve(chol, blocks.B)
    lam = blocks.C - blocks.B.conj().T @ X
    lam = 0.5 * (lam + lam.conj().T)
    blocks.chol = chol
    blocks.Lambda = lam
    return lam


def log_det_A(blocks: CovarianceBlock) -> float:
    lambda_matrix(blocks)
    return 2.0 * float(np.sum(np.log(np.abs(np.diag(blocks.chol[0])))))


def permanent(M: np.ndarray) -> complex:
    """Ryser inclusion-exclusion with Gray-code row-sum updates, O(2^n n)."""
    M = np.asarray(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("permanent needs a square matrix")
    if n == 0:
        return 1.0
    row_sums = np.zeros(n, dtype=np.result_type(M.dtype, np.complex128))
    total = 0j
    prev_gray = 0
    for k in range(1, 2**n):
        gray = k ^ (k >> 1)
        changed = gray ^ prev_gray
        col = changed.bit_length() - 1
        if gray & changed:
            row_sums += M[:, col]
        else:
            row_sums -= M[:, col]
        prev_gray = gray
        sign = -1 if (n - gray.bit_count()) % 2 else 1
        total += sign * np.prod(row_sums)
    return total


def _one_point(z: np.ndarray, L: int) -> np.ndarray:
    # pi K_1(z) = Lambda_1 / A_1 = L / (1 - |z|^2)^2
    return L / (1.0 - np.abs(z) ** 2) ** 2


def k1_density(cfg: PointConfig) -> float:
    """One-point function ``(A C - |B|^2) / (pi A^2)`` from the blocks at a single point."""
    if cfg.n != 1:
        raise ValueError("k1_density takes a single point")
    A, B, C = _blocks(cfg.points, cfg.L)
    a, b, c = A[0, 0].real, B[0, 0], C[0, 0].real
    return float((a * c - abs(b) ** 2) / (math.pi * a * a))


def kn_correlation(cfg: PointConfig) -> float:
    """Normalized ``k_n = K_n / prod K_1(z_p)`` through ``perm(Lambda) / (pi^n det A)``."""
    if cfg.n > MAX_PERMANENT_N:
        raise SizeError(f"permanent route supports n <= {MAX_PERMANENT_N}")
    if cfg.n == 1:
        return 1.0
    blocks = build_blocks(cfg)
    perm = permanent(blocks.Lambda).real
    # pi^n cancels between K_n and prod K_1
    log_norm = log_det_A(blocks) + float(np.sum(np.log(_one_point(cfg.points, cfg.L))))
    return perm * math.exp(-log_norm)


class Grassmann:
    """Element of the Grassmann algebra on ``n_gen`` generators.

    Stored as ``{mask: coefficient}``; bit ``i`` of ``mask`` marks generator
    ``i`` and a monomial is the product of its generators in increasing
    index order.
    """

    __slots__ = ("n_gen", "terms")

    def __init__(self, n_gen: int, terms: dict | None = None):
        self.n_gen = n_gen
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def scalar(cls, n_gen: int, value) -> "Grassmann":
        return cls(n_gen, {0: value})

    @classmethod
    def generator(cls, n_gen: int, i: int) -> "Grassmann":
        return cls(n_gen, {1 << i: 1.0})

    @staticmethod
    def _sign(a: int, b: int) -> int:
        # reorder (sorted a)(sorted b) into sorted(a|b): count pairs i in a, j in b with i > j
        swaps = 0
        while b:
            low = b & -b
            swaps += (a & ~((low << 1) - 1)).bit_count()
            b ^= low
        return -1 if swaps & 1 else 1

    def __add__(self, other):
        if not isinstance(other, Grassmann):
            other = Grassmann.scalar(self.n_gen, other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return Grassmann(self.n_gen, out)

    __radd__ = __add__

    def __neg__(self):
        return Grassmann(self.n_gen, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Grassmann):
            return Grassmann(self.n_gen, {k: v * other for k, v in self.terms.items()})
        out: dict = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                if ka & kb:
                    continue
                k = ka | kb
                out[k] = out.get(k, 0) + self._sign(ka, kb) * va * vb
        return Grassmann(self.n_gen, out)

    def __rmul__(self, other):
        return self * other

    def coefficient(self, mask: int):
        return self.terms.get(mask, 0)

    def top(self):
        return self.coefficient((1 << self.n_gen) - 1)


def _eta(n: int, p: int) -> Grassmann:
    return Grassmann.generator(2 * n, 2 * p)


def _eta_bar(n: int, p: int) -> Grassmann:
    return Grassmann.generator(2 * n, 2 * p + 1)


def berezin_integral(Lam: np.ndarray) -> complex:
    """``int d eta 1/det(I + Lam Omega)`` with ``Omega = diag(eta_p conj-eta_p)``.

    The measure is ``prod_p d(conj eta_p) d(eta_p)`` so that each pair
    integrates ``eta_p conj-eta_p`` to one. ``Lam Omega`` is nilpotent, hence
    ``1/det = exp(-tr log(I + X))`` truncates exactly after ``n`` terms.
    """
    n = Lam.shape[0]
    if n > MAX_BEREZIN_N:
        raise SizeError(f"Berezin route supports n <= {MAX_BEREZIN_N}")
    g = 2 * n
    omega = [_eta(n, p) * _eta_bar(n, p) for p in range(n)]
    X = [[omega[q] * complex(Lam[p, q]) for q in range(n)] for p in range(n)]
    power = X
    trace_log = Grassmann(g)
    for k in range(1, n + 1):
        tr = Grassmann(g)
        for p in range(n):
            tr = tr + power[p][p]
        trace_log = trace_log + tr * ((-1) ** (k + 1) / k)
        if k < n:
            power = [[_row_times_column(power[p], X, q, n) for q in range(n)] for p in range(n)]
    minus_t = -trace_log
    result = Grassmann.scalar(g, 1.0)
    term = Grassmann.scalar(g, 1.0)
    for j in range(1, n + 1):
        term = term * minus_t * (1.0 / j)
        result = result + term
    return result.top()


def _row_times_column(row, X, q, n):
    out = Grassmann(row[0].n_gen)
    for r in range(n):
        out = out + row[r] * X[r][q]
    return out


@lru_cache(maxsize=None)
def berezin_point_constant(L: int) -> float:
    """Per-point factor matching the Berezin route to ``k_1 = 1``, read off at ``z = 0``."""
    A, B, C = _blocks(np.zeros(1, dtype=np.complex128), L)
    lam = C - B.conj().T @ B / A
    raw = berezin_integral(lam).real / A[0, 0].real
    return float(_one_point(np.zeros(1), L)[0]) / raw


def kn_berezin(cfg: PointConfig) -> float:
    """``k_n`` from the Berezin integral, normalized per point by the ``n = 1`` constant.

    ``(1/det A) int d eta / det(I + Lambda Omega)`` lacks the ``pi^n prod K_1``
    normalization; each point gets ``c / (pi K_1(z_p))`` with ``c`` from
    :func:`berezin_point_constant`.
    """
    if cfg.n > MAX_BEREZIN_N:
        raise SizeError(f"Berezin route supports n <= {MAX_BEREZIN_N}")
    blocks = build_blocks(cfg)
    raw = berezin_integral(blocks.Lambda).real
    c = berezin_point_constant(cfg.L)
    log_norm = log_det_A(blocks) + float(np.sum(np.log(_one_point(cfg.points, cfg.L))))
    return raw * c**cfg.n * math.exp(-log_norm)


def check_positive_definite(cfg: PointConfig) -> tuple[bool, float]:
    """Whether ``A`` is numerically positive definite, and its smallest eigenvalue."""
    A, _, _ = _blocks(cfg.points, cfg.L)
    eig = linalg.eigvalsh(A)
    lo, hi = float(eig[0]), float(eig[-1])
    return lo > 64 * cfg.n * np.finfo(float).eps * hi, lo


def mobius_invariance_check(cfg: PointConfig, mobius: tuple[complex, complex]) -> float:
    """``|k_n(A z) - k_n(z)|`` for the disk automorphism with parameters ``(a, b)``."""
    a, b = mobius
    return abs(kn_correlation(cfg.mapped(a, b)) - kn_correlation(cfg))
