import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import qmc

from su11zeros import mcstats as mc
from su11zeros import theory as th
from su11zeros.ensemble import EnsembleParams
from su11zeros.mcstats import HistogramAccumulator

counts_strategy = st.lists(st.lists(st.floats(-2, 2, allow_nan=False), max_size=20), max_size=15)


def filled(trials):
    acc = HistogramAccumulator(-1.0, 1.0, 6)
    for values in trials:
        acc.add_trial(values)
    return acc


class TestHistogram:
    @settings(max_examples=60, deadline=None)
    @given(counts_strategy, counts_strategy, counts_strategy)
    def test_merge_associative_and_commutative(self, a, b, c):
        A, B, C = filled(a), filled(b), filled(c)
        assert (A + B) + C == A + (B + C)
        assert A + B == B + A

    @settings(max_examples=60, deadline=None)
    @given(counts_strategy, st.integers(0, 15))
    def test_split_merge_is_bit_identical(self, trials, cut):
        cut = min(cut, len(trials))
        whole = filled(trials)
        merged = filled(trials[:cut]) + filled(trials[cut:])
        assert merged == whole
        assert np.array_equal(merged.std_error(), whole.std_error())

    @settings(max_examples=60, deadline=None)
    @given(counts_strategy)
    def test_count_conservation(self, trials):
        acc = filled(trials)
        assert acc.counts.sum() + acc.underflow + acc.overflow == sum(len(t) for t in trials)
        assert acc.trials == len(trials)

    def test_bin_edges_are_half_open(self):
        acc = HistogramAccumulator(edges=[0.0, 1.0, 2.0])
        acc.add_trial([0.0, 1.0, 2.0, -0.1])
        assert list(acc.counts) == [1, 1]
        assert acc.overflow == 1 and acc.underflow == 1

    def test_std_error(self):
        acc = HistogramAccumulator(edges=[0.0, 1.0])
        for c in (1, 3, 2, 6):
            acc.add_counts([c])
        x = np.array([1, 3, 2, 6])
        assert acc.std_error()[0] == pytest.approx(x.std(ddof=1) / 2)
        assert acc.mean()[0] == 3.0

    def test_empty(self):
        acc = HistogramAccumulator(0, 1, 3)
        assert np.array_equal(acc.mean(), np.zeros(3)) and np.array_equal(acc.std_error(), np.zeros(3))

    def test_incompatible_merge(self):
        with pytest.raises(ValueError):
            HistogramAccumulator(0, 1, 3) + HistogramAccumulator(0, 1, 4)

    def test_bad_edges(self):
        with pytest.raises(ValueError):
            HistogramAccumulator(edges=[0.0, 0.0, 1.0])
        with pytest.raises(ValueError):
            HistogramAccumulator(1.0, 0.0, 3)


def test_estimate_z_score():
    e = mc.EstimateWithError(1.2, 0.1, 100)
    assert e.z_score(1.0) == pytest.approx(2.0)
    assert mc.EstimateWithError(1.0, 0.0, 1).z_score(1.0) == 0.0


class TestScaledDensity:
    def test_empty_trial_set(self):
        d = mc.scaled_density_estimate(EnsembleParams(4, 60, 1), 0)
        assert d.trials == 0
        assert np.array_equal(d.p_hat, np.zeros(10)) and d.window_fraction() == 0.0

    def test_jacobian_identity(self):
        d = mc.scaled_density_estimate(EnsembleParams(3, 60, 2), 30, s_range=4, bins=8)
        total = np.sum(d.p_hat * math.pi * np.diff(d.edges))
        assert total == pytest.approx(d.window_fraction(), rel=1e-14)

    def test_captured_fraction(self):
        L, N, A = 4, 150, 5.0
        d = mc.scaled_density_estimate(EnsembleParams(L, N, 3), 400, s_range=A, bins=1)
        se = d.acc.std_error()[0] / N
        exact = th.finite_N_distribution(L, N, 1 + A / N) - th.finite_N_distribution(L, N, 1 - A / N)
        assert abs(d.window_fraction() - exact) < 3 * se
        # the limiting value differs by an O(1/N) amount
        limit = th.distribution_P(L, A) - th.distribution_P(L, -A)
        assert abs(exact - limit) < 2.0 / N

    def test_rows_and_theory(self):
        d = mc.scaled_density_estimate(EnsembleParams(4, 80, 4), 20)
        rows = d.rows()
        assert set(rows) == {"s", "p_theory", "p_hat", "std_err", "count"}
        assert np.all(d.p_theory > 0) and np.all(d.std_err >= 0)

    def test_range_check(self):
        with pytest.raises(ValueError):
            mc.scaled_density_estimate(EnsembleParams(1, 60, 1), 1, s_range=11)


class TestFractions:
    def test_boundary_counts_as_inner(self, monkeypatch):
        monkeypatch.setattr(mc, "polynomial_zeros", lambda params, t: np.array([1.0, 2.0, 0.5j]))
        est = mc.inside_fraction(EnsembleParams(1, 3, 0), 4)
        assert est.value == pytest.approx(2 / 3) and est.std_error == 0

    def test_conservation(self):
        params = EnsembleParams(3, 90, 5)
        for t in range(10):
            z = mc.polynomial_zeros(params, t)
            inner = np.count_nonzero(np.abs(z) <= 1)
            outer = np.count_nonzero(np.abs(z) > 1)
            assert inner + outer == params.N == z.size

    def test_inside_fraction_small_run(self):
        est = mc.inside_fraction(EnsembleParams(4, 100, 6), 60)
        assert est.n_samples == 60
        assert abs(est.value - 0.8) < 4 * est.std_error + 0.01

    def test_std_error_shrinks_like_sqrt_two(self):
        params = EnsembleParams(2, 60, 7)
        a = mc.inside_fraction(params, 200)
        b = mc.inside_fraction(EnsembleParams(2, 60, 8), 400)
        ratio = a.std_error / b.std_error
        assert math.sqrt(2) / 1.3 < ratio < math.sqrt(2) * 1.3

    def test_density_errors_shrink_like_sqrt_two(self):
        a = mc.scaled_density_estimate(EnsembleParams(4, 60, 9), 150, bins=4)
        b = mc.scaled_density_estimate(EnsembleParams(4, 60, 10), 300, bins=4)
        ratio = a.std_err / b.std_err
        assert np.all((ratio > math.sqrt(2) / 1.3) & (ratio < math.sqrt(2) * 1.3))

    def test_distribution(self):
        params = EnsembleParams(4, 80, 11)
        s = np.array([-20.0, -5.0, 0.0, 3.0, 10.0])
        d = mc.empirical_distribution(params, 50, s)
        assert np.all(np.diff(d.P_hat) >= 0)
        assert np.all(np.abs(d.P_hat - d.P_finite) < 4 * d.std_err + 1e-12)
        assert d.P_theory[2] == pytest.approx(0.8)
        with pytest.raises(ValueError):
            mc.empirical_distribution(params, 5, [-100.0])

    def test_trial_count_checks(self):
        with pytest.raises(ValueError):
            mc.inside_fraction(EnsembleParams(1, 10, 0), 0)
        with pytest.raises(ValueError):
            mc.run_trials(None, (), -1)


class TestWorkers:
    def test_parallel_run_is_bit_identical(self):
        params = EnsembleParams(3, 60, 12)
        serial = mc.scaled_density_estimate(params, 24)
        parallel = mc.scaled_density_estimate(params, 24, workers=2)
        assert serial.acc == parallel.acc

    def test_chunks_cover_range(self):
        parts = mc._chunks(10, 4)
        assert parts[0][0] == 0 and parts[-1][1] == 10
        assert all(a[1] == b[0] for a, b in zip(parts, parts[1:]))


class TestRadial:
    def test_equal_count_edges(self):
        e = mc.equal_count_edges(0.7, 4)
        F = e**2 / (1 - e**2)
        assert e[0] == 0 and e[-1] == 0.7
        assert np.allclose(np.diff(F), np.diff(F)[0], rtol=1e-12)

    def test_rejects_bins_beyond_r_max(self):
        with pytest.raises(ValueError):
            mc.unscaled_density_estimate(1, 1, r_max=0.7, edges=[0, 0.5, 0.8])

    def test_theory_annulus_average(self):
        est = mc.RadialDensityEstimate(3, HistogramAccumulator(edges=[0.2, 0.5]))
        x0, x1 = 0.04, 0.25
        ref = integrate_rho(3, 0.2, 0.5) / (math.pi * (x1 - x0))
        assert est.rho_theory[0] == pytest.approx(ref, rel=1e-10)

    def test_small_run(self):
        est = mc.unscaled_density_estimate(1, 200, r_max=0.7, bins=2, seed=13)
        assert np.all(np.abs(est.rho_hat / est.rho_theory - 1) < 5 * est.std_err / est.rho_theory)


def integrate_rho(L, a, b):
    from scipy import integrate
    val, _ = integrate.quad(lambda r: 2 * math.pi * r * th.density_rho(L, r), a, b, epsabs=0, epsrel=1e-12)
    return val


class TestPairBaseline:
    @pytest.mark.parametrize("L,r_max", [(1, 0.7), (5, 0.7), (2, 0.5)])
    def test_total(self, L, r_max):
        x = r_max * r_max
        total = mc.pair_baseline(L, r_max, mc.default_tau_edges(r_max, 12)).sum()
        assert total == pytest.approx(0.5 * (L * x / (1 - x)) ** 2, rel=1e-9)

    def test_against_quasi_random_oracle(self):
        # Sobol pairs drawn from the normalized one-point law on |z| <= r_max
        L, r_max = 1, 0.7
        X = r_max**2 / (1 - r_max**2)
        u = qmc.Sobol(4, scramble=True, seed=1).random_base2(18)
        pts = []
        for k in (0, 2):
            c = u[:, k] * X
            r = np.sqrt(c / (1 + c))
            pts.append(r * np.exp(2j * np.pi * u[:, k + 1]))
        z, w = pts
        tau = 2 * np.arctanh(np.abs(z - w) / np.abs(1 - z * np.conj(w)))
        edges = mc.default_tau_edges(r_max, 8)
        frac = np.histogram(tau, edges)[0] / tau.size
        oracle = 0.5 * (L * X) ** 2 * frac
        base = mc.pair_baseline(L, r_max, edges)
        big = oracle > 0.01 * oracle.max()
        assert np.allclose(base[big], oracle[big], rtol=0.01)

    def test_inside_angle(self):
        assert mc._inside_angle(0.1, 0.2, 1.0) == 2 * math.pi
        assert mc._inside_angle(0.5, 2.0, 1.0) == 0.0

    def test_theory_bins_bracketed_by_edges(self):
        # k2 increases in tau, so each weighted bin average lies between its edge values
        edges = mc.default_tau_edges(0.7, 8)
        k = mc.pair_theory_bins(1, 1, 0.7, edges)
        lo = th.k2_theory_from_tau(1, edges[:-1])
        hi = th.k2_theory_from_tau(1, edges[1:])
        assert np.all((k > lo) & (k < hi))


class TestPairs:
    def test_pair_taus(self):
        pts = np.array([0.1, -0.4j, 0.5 + 0.2j])
        t = mc.pair_taus(pts)
        ref = [th.hyperbolic_distance(pts[i], pts[j]) for i, j in [(0, 1), (0, 2), (1, 2)]]
        assert np.allclose(t, ref, rtol=1e-13)
        assert mc.pair_taus(np.array([0.3])).size == 0

    def test_centered_edges(self):
        e = mc.centered_tau_edges(0.5, 0.7)
        tau = 2 * math.atanh(0.5)
        i = np.searchsorted(e, tau) - 1
        assert 0.5 * (e[i] + e[i + 1]) == pytest.approx(tau, rel=1e-12)
        assert e[-1] >= 4 * math.atanh(0.7)
        with pytest.raises(ValueError):
            mc.centered_tau_edges(0.8, 0.7)

    def test_small_run(self):
        est = mc.pair_correlation_estimate(1, 100, tau_edges=mc.centered_tau_edges(0.5, 0.7), seed=14)
        assert est.trials == 100 and est.pairs.sum() > 0
        i = est.bin_at_r(0.5)
        assert est.k2_theory[i] == pytest.approx(0.4375, abs=0.02)
        assert np.all(np.isfinite(est.k2_hat)) and np.all(est.std_err >= 0)
        # any populated bin has a non-zero error over 100 trials
        assert np.all(est.std_err[est.pairs > 0] > 0)
        assert est.zero_counts > 0
        with pytest.raises(ValueError):
            est.bin_at_r(0.9999999)

    def test_outer_small_run(self):
        res = mc.outer_zero_correlation(EnsembleParams(5, 120, 15), 30)
        assert res.outer.L_theory == 1 and res.inner.L_theory == 5
        assert res.outer.trials == res.inner.trials == 30
        assert res.outer.pairs.sum() > 0

    def test_outer_without_outer_zeros(self):
        # degree 2 with heavy high-order weight: few or no outer zeros
        res = mc.outer_zero_correlation(EnsembleParams(30, 2, 16), 20)
        assert res.outer.trials == 20


class TestEta:
    def test_single_term_at_origin(self):
        L, N, z = 2, 50, 1.5 + 0.2j
        ref = z ** (-N) / math.sqrt(math.comb(N + L - 1, N))
        assert abs(mc.eta_cross_covariance(L, N, z, 0) - ref) <= 1e-13 * abs(ref)
        assert mc.log_eta_cross_covariance(L, N, z, 0) == pytest.approx(math.log(abs(ref)), rel=1e-13)

    @pytest.mark.parametrize("z,zp", [(1.5, 0.5), (1.2 + 0.3j, 0.9j), (3.0, 0.8 - 0.1j)])
    def test_against_direct_sum(self, z, zp):
        L, N = 2, 50
        with mpmath.workdps(40):
            v = mpmath.mpc(z) * mpmath.conj(mpmath.mpc(zp))
            s = mpmath.fsum(mpmath.binomial(m + L - 1, m) * v**m for m in range(N + 1))
            ref = complex(s * mpmath.mpc(z) ** (-N) / mpmath.sqrt(mpmath.binomial(N + L - 1, N)))
        assert abs(mc.eta_cross_covariance(L, N, z, zp) - ref) <= 1e-12 * abs(ref)
        assert mc.log_eta_cross_covariance(L, N, z, zp) == pytest.approx(math.log(abs(ref)), rel=1e-12)

    def test_bound_example(self):
        L, N = 2, 50
        e = abs(mc.eta_cross_covariance(L, N, 1.5, 0.5))
        bound = N**L * (1 / 1.5) ** N
        assert e <= bound
        assert mc.eta_bound_margins(L, N, [1.5], [0.5])[0, 0] == pytest.approx(bound / e, rel=1e-10)

    def test_default_grid_holds(self):
        z, zp = mc.default_eta_grid()
        assert np.all(np.abs(z) > 1) and np.all(np.abs(zp) < 1)
        assert mc.eta_bound_margins(2, 50, z, zp).min() > 1

    def test_independence_small_run(self):
        res = mc.inner_outer_independence(EnsembleParams(2, 60, 17), 100)
        assert res.covariance.n_samples == 100
        assert abs(res.correlation) <= 1 and res.min_margin > 1
        assert res.mean_inner > 0 and res.mean_outer > 0
        with pytest.raises(ValueError):
            mc.inner_outer_independence(EnsembleParams(2, 60, 17), 10, r_inner=0.5, r_outer=0.9)
