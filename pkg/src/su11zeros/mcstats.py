"""Monte Carlo estimators of zero statistics and their theoretical counterparts.

Every experiment is a loop over trial indices. A trial draws its sample from
its own stream, finds the zeros, and adds per-trial counts to an accumulator.
Accumulators hold integer sums (counts and squared counts), so merging the
partial results of any split of the trial range gives identical totals;
chunks may run in worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import theory
from .ensemble import EnsembleParams, log_binomial_weight, log_binomial_weights, sample_analytic_truncated, sample_polynomial
from .errors import QuadratureError
from .rootfind import find_roots

DEFAULT_R_MAX = 0.7
QUADRATURE_AGREEMENT = 5e-3


@dataclass
class EstimateWithError:
    value: float
    std_error: float
    n_samples: int

    def z_score(self, reference: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.value == reference else math.inf
        return (self.value - reference) / self.std_error


class HistogramAccumulator:
    """Per-bin sums of per-trial counts and of their squares.

    Bins are ``[edges[i], edges[i+1])``; values outside go to the underflow or
    overflow counters.
    """

    def __init__(self, lo: float | None = None, hi: float | None = None, bins: int | None = None,
                 edges=None):
        if edges is None:
            if bins is None or bins < 1 or not hi > lo:
                raise ValueError("need lo < hi and bins >= 1, or explicit edges")
            edges = np.linspace(lo, hi, bins + 1)
        self.edges = np.asarray(edges, dtype=float)
        if self.edges.ndim != 1 or self.edges.size < 2 or np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        nb = self.edges.size - 1
        self.counts = np.zeros(nb, dtype=np.int64)
        self.sumsq = np.zeros(nb, dtype=np.int64)
        self.trials = 0
        self.underflow = 0
        self.overflow = 0

    @property
    def lo(self) -> float:
        return float(self.edges[0])

    @property
    def hi(self) -> float:
        return float(self.edges[-1])

    @property
    def bins(self) -> int:
        return self.edges.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def add_trial(self, values) -> None:
        values = np.asarray(values, dtype=float).ravel()
        idx = np.searchsorted(self.edges, values, side="right") - 1
        under = idx < 0
        over = idx >= self.bins
        self.underflow += int(under.sum())
        self.overflow += int(over.sum())
        c = np.bincount(idx[~(under | over)], minlength=self.bins).astype(np.int64)
        self.add_counts(c)

    def add_counts(self, c) -> None:
        c = np.asarray(c, dtype=np.int64)
        self.counts += c
        self.sumsq += c * c
        self.trials += 1

    def _compatible(self, other):
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge accumulators with different bins")

    def merge(self, other: "HistogramAccumulator") -> "HistogramAccumulator":
        self._compatible(other)
        out = HistogramAccumulator(edges=self.edges)
        out.counts = self.counts + other.counts
        out.sumsq = self.sumsq + other.sumsq
        out.trials = self.trials + other.trials
        out.underflow = self.underflow + other.underflow
        out.overflow = self.overflow + other.overflow
        return out

    __add__ = merge

    def __eq__(self, other):
        return (isinstance(other, HistogramAccumulator) and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.counts, other.counts) and np.array_equal(self.sumsq, other.sumsq)
                and (self.trials, self.underflow, self.overflow) == (other.trials, other.underflow, other.overflow))

    def mean(self) -> np.ndarray:
        if self.trials == 0:
            return np.zeros(self.bins)
        return self.counts / self.trials

    def std_error(self) -> np.ndarray:
        """Standard error of the per-trial mean count in each bin."""
        n = self.trials
        if n < 2:
            return np.zeros(self.bins)
        mean = self.counts / n
        var = (self.sumsq - n * mean * mean) / (n - 1)
        return np.sqrt(np.maximum(var, 0.0) / n)


@dataclass
class TrialCounts:
    """Per-trial integer observations kept in trial order (for cross moments)."""

    columns: tuple
    rows: list = field(default_factory=list)

    def add(self, *values):
        self.rows.append(tuple(int(v) for v in values))

    def merge(self, other: "TrialCounts") -> "TrialCounts":
        return TrialCounts(self.columns, self.rows + other.rows)

    __add__ = merge

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64).reshape(-1, len(self.columns))


def _chunks(trials: int, n_chunks: int):
    edges = np.linspace(0, trials, n_chunks + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_trials(chunk_fn, args: tuple, trials: int, workers: int = 1):
    """Run ``chunk_fn(*args, start, stop)`` over the trial range and merge in order."""
    if trials < 0:
        raise ValueError("trials must be non-negative")
    if workers <= 1 or trials < 2:
        return chunk_fn(*args, 0, trials)
    parts = _chunks(trials, 4 * workers)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(chunk_fn, *args, a, b) for a, b in parts]
        results = [f.result() for f in futures]
    out = results[0]
    for r in results[1:]:
        out = out + r
    return out


def polynomial_zeros(params: EnsembleParams, trial_index: int) -> np.ndarray:
    return find_roots(sample_polynomial(params.for_trial(trial_index))).zeros


def analytic_zeros(L: int, r_max: float, seed: int, trial_index: int, M: int | None = None) -> np.ndarray:
    return find_roots(sample_analytic_truncated(L, r_max, seed, trial_index, M)).zeros


# ---------------------------------------------------------------- scaled density


@dataclass
class DensityEstimate:
    L: int
    N: int
    acc: HistogramAccumulator

    @property
    def edges(self):
        return self.acc.edges

    @property
    def s(self):
        return self.acc.centers

    @property
    def trials(self):
        return self.acc.trials

    def _scale(self):
        return self.trials * math.pi * self.N * self.acc.widths

    @property
    def p_hat(self):
        if self.trials == 0:
            return np.zeros(self.acc.bins)
        return self.acc.counts / self._scale()

    @property
    def std_err(self):
        return self.acc.std_error() / (math.pi * self.N * self.acc.widths)

    @property
    def p_theory(self):
        """Bin averages of the limiting profile ``p(s)``."""
        e = self.edges
        return np.array([theory.bin_average_density(self.L, a, b) for a, b in zip(e[:-1], e[1:])])

    @property
    def expected_counts(self):
        return self.p_theory * math.pi * self.N * self.acc.widths * self.trials

    def window_fraction(self) -> float:
        """Empirical fraction of all zeros whose ``s`` falls inside the binned window."""
        if self.trials == 0:
            return 0.0
        return float(self.acc.counts.sum()) / (self.trials * self.N)

    def rows(self):
        return {"s": self.s, "p_theory": self.p_theory, "p_hat": self.p_hat,
                "std_err": self.std_err, "count": self.acc.counts}


def _density_chunk(params, edges, start, stop):
    acc = HistogramAccumulator(edges=edges)
    for t in range(start, stop):
        z = polynomial_zeros(params, t)
        acc.add_trial(params.N * (np.abs(z) ** 2 - 1.0))
    return acc


def scaled_density_estimate(params: EnsembleParams, trials: int, s_range: float = 5.0, bins: int = 10,
                            workers: int = 1) -> DensityEstimate:
    """Histogram of ``s = N(|z|^2 - 1)`` turned into ``p_hat(s) = count / (trials pi N ds)``."""
    if not 0 < s_range <= 10:
        raise ValueError("s_range must lie in (0, 10]")
    edges = np.linspace(-s_range, s_range, bins + 1)
    acc = run_trials(_density_chunk, (params, edges), trials, workers)
    return DensityEstimate(params.L, params.N, acc)


# ---------------------------------------------------------------- fractions


def _inside_chunk(params, start, stop):
    acc = HistogramAccumulator(edges=[0.0, 1.0])
    for t in range(start, stop):
        z = polynomial_zeros(params, t)
        acc.add_counts([int(np.count_nonzero(np.abs(z) <= 1.0))])
    return acc


def inside_fraction(params: EnsembleParams, trials: int, workers: int = 1) -> EstimateWithError:
    """Mean fraction of zeros with ``|z| <= 1`` (boundary zeros count as inner)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    acc = run_trials(_inside_chunk, (params,), trials, workers)
    return EstimateWithError(float(acc.mean()[0]) / params.N, float(acc.std_error()[0]) / params.N, acc.trials)


@dataclass
class DistributionEstimate:
    L: int
    N: int
    s: np.ndarray
    acc: HistogramAccumulator

    @property
    def trials(self):
        return self.acc.trials

    @property
    def P_hat(self):
        return self.acc.mean() / self.N

    @property
    def std_err(self):
        return self.acc.std_error() / self.N

    @property
    def P_theory(self):
        return theory.distribution_P(self.L, self.s)

    @property
    def P_finite(self):
        return np.array([theory.finite_N_distribution(self.L, self.N, 1.0 + v / self.N) for v in self.s])

    def rows(self):
        return {"s": self.s, "P_theory": self.P_theory, "P_hat": self.P_hat, "std_err": self.std_err}


def _distribution_chunk(params, s_grid, start, stop):
    acc = HistogramAccumulator(edges=np.arange(len(s_grid) + 1, dtype=float))
    thresholds = 1.0 + np.asarray(s_grid) / params.N
    for t in range(start, stop):
        x = np.sort(np.abs(polynomial_zeros(params, t)) ** 2)
        acc.add_counts(np.searchsorted(x, thresholds, side="right"))
    return acc


def empirical_distribution(params: EnsembleParams, trials: int, s_grid, workers: int = 1) -> DistributionEstimate:
    """Mean fraction of zeros with ``|z|^2 <= 1 + s/N`` at each grid point."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(1.0 + s_grid / params.N < 0):
        raise ValueError("grid reaches below |z|^2 = 0")
    acc = run_trials(_distribution_chunk, (params, s_grid), trials, workers)
    return DistributionEstimate(params.L, params.N, s_grid, acc)


# ---------------------------------------------------------------- unscaled density


def equal_count_edges(r_max: float, bins: int) -> np.ndarray:
    """Radii splitting ``|z| <= r_max`` into annuli of equal expected zero count.

    The mean count inside radius ``r`` is proportional to ``x/(1-x)``, ``x = r^2``.
    """
    x = r_max * r_max
    c = np.linspace(0.0, x / (1.0 - x), bins + 1)
    edges = np.sqrt(c / (1.0 + c))
    edges[-1] = r_max
    return edges


@dataclass
class RadialDensityEstimate:
    L: int
    acc: HistogramAccumulator

    @property
    def trials(self):
        return self.acc.trials

    @property
    def areas(self):
        e = self.acc.edges
        return math.pi * (e[1:] ** 2 - e[:-1] ** 2)

    @property
    def radius(self):
        return self.acc.centers

    @property
    def rho_hat(self):
        if self.trials == 0:
            return np.zeros(self.acc.bins)
        return self.acc.counts / (self.trials * self.areas)

    @property
    def std_err(self):
        return self.acc.std_error() / self.areas

    @property
    def rho_theory(self):
        """Annulus averages of ``L / (pi (1-|z|^2)^2)``."""
        x = self.acc.edges ** 2
        F = x / (1.0 - x)
        return self.L * np.diff(F) / (math.pi * np.diff(x))

    def rows(self):
        return {"r": self.radius, "rho_theory": self.rho_theory, "rho_hat": self.rho_hat,
                "std_err": self.std_err, "count": self.acc.counts}


def _radial_chunk(L, r_max, seed, M, edges, start, stop):
    acc = HistogramAccumulator(edges=edges)
    for t in range(start, stop):
        z = analytic_zeros(L, r_max, seed, t, M)
        acc.add_trial(np.abs(z))
    return acc


def unscaled_density_estimate(L: int, trials: int, r_max: float = DEFAULT_R_MAX, bins: int = 4, seed: int = 0,
                              M: int | None = None, edges=None, workers: int = 1) -> RadialDensityEstimate:
    """Zero counts in annuli divided by annulus area, for truncated analytic samples."""
    if edges is None:
        edges = equal_count_edges(r_max, bins)
    edges = np.asarray(edges, dtype=float)
    if edges[0] < 0 or edges[-1] > r_max + 1e-15:
        raise ValueError(f"radial bins must lie within [0, r_max={r_max}]")
    acc = run_trials(_radial_chunk, (L, r_max, seed, M, edges), trials, workers)
    return RadialDensityEstimate(L, acc)


# ---------------------------------------------------------------- pair correlation


def _inside_angle(d: float, tau: float, rho_R: float) -> float:
    """Angular measure of the hyperbolic circle (center at distance ``d`` from 0,
    radius ``tau``) that lies within hyperbolic radius ``rho_R`` of the origin."""
    if d + tau <= rho_R:
        return 2.0 * math.pi
    if tau - d >= rho_R or d - tau >= rho_R:
        return 0.0
    kappa = (math.cosh(d) * math.cosh(tau) - math.cosh(rho_R)) / (math.sinh(d) * math.sinh(tau))
    return 2.0 * math.acos(min(1.0, max(-1.0, kappa)))


def _pair_density(tau: float, L: int, rho_R: float, epsrel: float) -> float:
    """Expected unordered pairs per unit ``tau`` for independent points of density ``rho``."""
    if tau <= 0:
        return 0.0
    f = lambda d: math.sinh(d) * _inside_angle(d, tau, rho_R)
    pts = [p for p in (rho_R - tau, tau - rho_R) if 0 < p < rho_R]
    val, _ = integrate.quad(f, 0.0, rho_R, points=pts or None, epsabs=0, epsrel=epsrel, limit=200)
    return L * L / (16.0 * math.pi) * math.sinh(tau) * val


def _baseline_bins(L, r_max, edges, epsrel, weight=None):
    rho_R = 2.0 * math.atanh(r_max)
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        hi = min(b, 2.0 * rho_R)
        if hi <= a:
            out.append(0.0)
            continue
        if weight is None:
            g = lambda t: _pair_density(t, L, rho_R, epsrel)
        else:
            g = lambda t: weight(t) * _pair_density(t, L, rho_R, epsrel)
        pts = [rho_R] if a < rho_R < hi else None
        val, _ = integrate.quad(g, a, hi, points=pts, epsabs=0, epsrel=epsrel, limit=200)
        out.append(val)
    return np.array(out)


@lru_cache(maxsize=32)
def _pair_baseline_cached(L: int, r_max: float, edges: tuple) -> tuple:
    e = np.array(edges)
    fine = _baseline_bins(L, r_max, e, 1e-10)
    coarse = _baseline_bins(L, r_max, e, 1e-6)
    nz = fine > 0
    if np.any(np.abs(coarse[nz] - fine[nz]) > QUADRATURE_AGREEMENT * fine[nz]):
        raise QuadratureError("pair baseline quadrature is not self-consistent to 0.5%")
    return tuple(fine)


def pair_baseline(L: int, r_max: float, edges) -> np.ndarray:
    """Expected unordered pairs per trial in each ``tau`` bin for independent points
    of density ``L/(pi (1-|z|^2)^2)`` on ``|z| <= r_max``.

    In geodesic polar coordinates the one-point measure is ``(L/4pi) sinh(tau) dtau dtheta``,
    so the double integral reduces to two nested one-dimensional quadratures.
    """
    return np.array(_pair_baseline_cached(int(L), float(r_max), tuple(float(v) for v in edges)))


def pair_theory_bins(L_theory: int, L_density: int, r_max: float, edges) -> np.ndarray:
    """Baseline-weighted averages of ``k2`` over each bin."""
    e = np.asarray(edges, dtype=float)
    k2 = lambda t: theory.k2_closed_form(L_theory, math.tanh(t / 2.0))
    num = _baseline_bins(L_density, r_max, e, 1e-8, weight=k2)
    den = pair_baseline(L_density, r_max, e)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, num / den, np.nan)


def pair_taus(points: np.ndarray) -> np.ndarray:
    """Hyperbolic distances of all unordered pairs."""
    n = points.size
    if n < 2:
        return np.empty(0)
    i, j = np.triu_indices(n, 1)
    r = np.abs(points[i] - points[j]) / np.abs(1.0 - points[i] * np.conj(points[j]))
    return 2.0 * np.arctanh(np.minimum(r, 1.0))


@dataclass
class PairCorrelationEstimate:
    L_density: int
    L_theory: int
    r_max: float
    acc: HistogramAccumulator
    zero_counts: int = 0

    @property
    def trials(self):
        return self.acc.trials

    @property
    def tau(self):
        return self.acc.centers

    @property
    def r(self):
        return np.tanh(self.tau / 2.0)

    @property
    def baseline(self):
        return pair_baseline(self.L_density, self.r_max, self.acc.edges)

    @property
    def k2_hat(self):
        base = self.baseline
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(base > 0, self.acc.mean() / base, np.nan)

    @property
    def std_err(self):
        base = self.baseline
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(base > 0, self.acc.std_error() / base, np.nan)

    @property
    def k2_theory(self):
        return pair_theory_bins(self.L_theory, self.L_density, self.r_max, self.acc.edges)

    @property
    def pairs(self):
        return self.acc.counts

    def bin_at_r(self, r: float) -> int:
        tau = 2.0 * math.atanh(r)
        i = int(np.searchsorted(self.acc.edges, tau, side="right") - 1)
        if not 0 <= i < self.acc.bins:
            raise ValueError(f"r={r} outside the binned range")
        return i

    def rows(self):
        return {"tau": self.tau, "r": self.r, "k2_theory": self.k2_theory, "k2_hat": self.k2_hat,
                "std_err": self.std_err, "pairs": self.pairs}


def default_tau_edges(r_max: float, bins: int = 16) -> np.ndarray:
    """Uniform ``tau`` bins up to the largest distance possible within ``|z| <= r_max``."""
    return np.linspace(0.0, 4.0 * math.atanh(r_max), bins + 1)


def centered_tau_edges(r_center: float, r_max: float, per_center: int = 5) -> np.ndarray:
    """Uniform ``tau`` bins from 0, sized so that one bin is centred on ``tanh(tau/2) = r_center``.

    ``per_center`` bins lie wholly below the centred one.
    """
    if not 0 < r_center <= r_max < 1:
        raise ValueError("need 0 < r_center <= r_max < 1")
    width = 2.0 * math.atanh(r_center) / (per_center + 0.5)
    n = int(math.ceil(4.0 * math.atanh(r_max) / width))
    return width * np.arange(n + 1)


class _PairAccumulator:
    # histogram of pair distances plus the number of zeros used
    def __init__(self, edges):
        self.hist = HistogramAccumulator(edges=edges)
        self.zeros = 0

    def add(self, pts):
        self.hist.add_trial(pair_taus(pts))
        self.zeros += pts.size

    def __add__(self, other):
        out = _PairAccumulator(self.hist.edges)
        out.hist = self.hist + other.hist
        out.zeros = self.zeros + other.zeros
        return out


def _pair_chunk(L, r_max, seed, M, edges, start, stop):
    acc = _PairAccumulator(edges)
    for t in range(start, stop):
        z = analytic_zeros(L, r_max, seed, t, M)
        acc.add(z[np.abs(z) <= r_max])
    return acc


def pair_correlation_estimate(L: int, trials: int, r_max: float = DEFAULT_R_MAX, tau_edges=None, seed: int = 0,
                              M: int | None = None, workers: int = 1) -> PairCorrelationEstimate:
    """Pair counts of zeros in ``|z| <= r_max`` per ``tau`` bin over the independence baseline."""
    edges = default_tau_edges(r_max) if tau_edges is None else np.asarray(tau_edges, dtype=float)
    pair_baseline(L, r_max, edges)  # fail early on quadrature trouble
    acc = run_trials(_pair_chunk, (L, r_max, seed, M, edges), trials, workers)
    return PairCorrelationEstimate(L, L, r_max, acc.hist, acc.zeros)


# ---------------------------------------------------------------- outer zeros


def _outer_chunk(params, r_max, edges, start, stop):
    outer = _PairAccumulator(edges)
    inner = _PairAccumulator(edges)
    for t in range(start, stop):
        z = polynomial_zeros(params, t)
        out = z[np.abs(z) > 1.0]
        w = 1.0 / out
        outer.add(w[np.abs(w) <= r_max])
        inner.add(z[np.abs(z) <= r_max])
    return outer, inner


def _merge_pairs(a, b):
    return a[0] + b[0], a[1] + b[1]


class _OuterResult(tuple):
    def __add__(self, other):
        return _OuterResult(_merge_pairs(self, other))


def _outer_chunk_wrapped(params, r_max, edges, start, stop):
    return _OuterResult(_outer_chunk(params, r_max, edges, start, stop))


@dataclass
class OuterCorrelationResult:
    outer: PairCorrelationEstimate
    inner: PairCorrelationEstimate


def outer_zero_correlation(params: EnsembleParams, trials: int, r_max: float = DEFAULT_R_MAX, tau_edges=None,
                           workers: int = 1) -> OuterCorrelationResult:
    """Pair correlation of the outer zeros mapped by ``z -> 1/z`` (compared with ``L = 1``),
    alongside the inner zeros of the same samples (compared with the ensemble ``L``)."""
    edges = default_tau_edges(r_max) if tau_edges is None else np.asarray(tau_edges, dtype=float)
    outer, inner = run_trials(_outer_chunk_wrapped, (params, r_max, edges), trials, workers)
    return OuterCorrelationResult(
        PairCorrelationEstimate(1, 1, r_max, outer.hist, outer.zeros),
        PairCorrelationEstimate(params.L, params.L, r_max, inner.hist, inner.zeros),
    )


# ---------------------------------------------------------------- inner/outer independence


def eta_cross_covariance(L: int, N: int, z: complex, zp: complex) -> complex:
    """``E eta(z) conj eta(z')`` for ``|z| > 1 >= |z'|``, where ``eta = z^-N psi / sqrt(C(N+L-1,N))``
    outside the disk and ``eta = psi`` inside."""
    v = z * np.conj(zp)
    logc = log_binomial_weights(N, L)
    m = np.arange(N + 1)
    if v == 0:
        log_s = complex(logc[0])
    elif abs(v) <= 1.0:
        log_s = np.log(np.sum(np.exp(logc) * v ** m.astype(float)) + 0j)
    else:
        # factor v^N out so that the remaining powers are bounded
        terms = np.exp(logc - logc.max()) * (1.0 / v) ** (N - m).astype(float)
        log_s = N * np.log(v + 0j) + logc.max() + np.log(np.sum(terms) + 0j)
    log_e = log_s - N * np.log(complex(z)) - 0.5 * log_binomial_weight(N, L)
    return complex(np.exp(log_e))


def log_eta_cross_covariance(L: int, N: int, z: complex, zp: complex) -> float:
    """Natural log of ``|E eta(z) conj eta(z')|`` (no underflow)."""
    v = z * np.conj(zp)
    logc = log_binomial_weights(N, L)
    m = np.arange(N + 1)
    if v == 0:
        log_abs_s = float(logc[0])
    else:
        lv = np.log(v + 0j)
        log_terms = logc + m * lv
        top = np.max(log_terms.real)
        log_abs_s = top + math.log(abs(np.sum(np.exp(log_terms - top))))
    return log_abs_s - N * math.log(abs(z)) - 0.5 * log_binomial_weight(N, L)


def log_eta_bound(L: int, N: int, z: complex, zp: complex) -> float:
    """``ln[N^L max(|z|^-1, |z'|)^N]``."""
    return L * math.log(N) + N * math.log(max(1.0 / abs(z), abs(zp)))


def eta_bound_margins(L: int, N: int, z_grid, zp_grid) -> np.ndarray:
    """``bound / |E eta conj eta|`` on the product grid (rows: ``z``, columns: ``z'``)."""
    out = np.empty((len(z_grid), len(zp_grid)))
    for i, z in enumerate(z_grid):
        for j, zp in enumerate(zp_grid):
            out[i, j] = math.exp(min(700.0, log_eta_bound(L, N, z, zp) - log_eta_cross_covariance(L, N, z, zp)))
    return out


def default_eta_grid(n: int = 10):
    """``n`` outer points with ``|z|`` in [1.1, 2] and ``n`` inner points with ``|z'|`` in [0, 0.9]."""
    phases = np.exp(2j * math.pi * np.arange(n) * 0.6180339887498949)
    return np.linspace(1.1, 2.0, n) * phases, np.linspace(0.0, 0.9, n) * phases[::-1]


def _region_chunk(params, r_in, r_out, start, stop):
    acc = TrialCounts(("inner", "outer", "total"))
    for t in range(start, stop):
        a = np.abs(polynomial_zeros(params, t))
        acc.add(np.count_nonzero(a <= r_in), np.count_nonzero(a >= r_out), a.size)
    return acc


@dataclass
class IndependenceResult:
    covariance: EstimateWithError
    correlation: float
    mean_inner: float
    mean_outer: float
    margins: np.ndarray

    @property
    def min_margin(self) -> float:
        return float(self.margins.min())


def inner_outer_independence(params: EnsembleParams, trials: int, r_inner: float = 0.6, r_outer: float | None = None,
                             grid=None, workers: int = 1) -> IndependenceResult:
    """Covariance of zero counts in ``|z| <= r_inner`` and ``|z| >= r_outer`` plus the
    cross-covariance bound check on a grid of ``(z, z')``."""
    if r_outer is None:
        r_outer = 1.0 / r_inner
    if not (r_inner < 1.0 < r_outer):
        raise ValueError("need r_inner < 1 < r_outer")
    if trials < 2:
        raise ValueError("need at least two trials")
    counts = run_trials(_region_chunk, (params, r_inner, r_outer), trials, workers).array().astype(float)
    a, b = counts[:, 0], counts[:, 1]
    da, db = a - a.mean(), b - b.mean()
    prod = da * db
    n = len(a)
    cov = prod.sum() / (n - 1)
    se = prod.std(ddof=1) / math.sqrt(n)
    denom = math.sqrt(da.var() * db.var())
    corr = float(prod.mean() / denom) if denom > 0 else 0.0
    z_grid, zp_grid = default_eta_grid() if grid is None else grid
    margins = eta_bound_margins(params.L, params.N, z_grid, zp_grid)
    return IndependenceResult(EstimateWithError(float(cov), float(se), n), corr, float(a.mean()), float(b.mean()), margins)
