import math

import numpy as np
import pytest
from scipy import stats

from semihard_edgeworth.cumulants import estimate_cumulants
from semihard_edgeworth.distributions import (ClusterTripletConfig, Distance, Normal, NormalMixture,
                                              ShiftedGamma, batch_mean_law, draw_values,
                                              exact_cdf, exact_density, sample, simulate_triplets,
                                              skewness, standardized_law)
from semihard_edgeworth.errors import DomainError, UnsupportedFamilyError
from semihard_edgeworth.oracle import bootstrap_cumulant_se, mc_semi_hard_probability, quadrature

FAMILIES = [Normal(1.5, 2.0), ShiftedGamma(4.0, 1.0, 0.0), ShiftedGamma(2.5, 0.7, -1.0),
            NormalMixture(0.3, -1.0, 0.5, 2.0, 1.2)]


class TestReference:
    def test_cumulants_closed_form(self):
        g = ShiftedGamma(4.0, 2.0, 1.0)
        assert (g.mean, g.variance, g.kappa3) == (9.0, 16.0, 64.0)
        assert skewness(g) == pytest.approx(1.0)
        assert Normal(3, 2).kappa3 == 0.0

    def test_mixture_cumulants_by_quadrature(self):
        m = NormalMixture(0.3, -1.0, 0.5, 2.0, 1.2)
        raw = [quadrature(lambda t, k=k: t ** k * m.pdf(t), -15, 15, 1e-12).value for k in (1, 2, 3)]
        mean = raw[0]
        var = raw[1] - mean ** 2
        k3 = raw[2] - 3 * mean * raw[1] + 2 * mean ** 3
        assert m.mean == pytest.approx(mean, abs=1e-10)
        assert m.variance == pytest.approx(var, abs=1e-10)
        assert m.kappa3 == pytest.approx(k3, abs=1e-9)

    def test_invariants(self):
        with pytest.raises(DomainError):
            Normal(0, 0)
        with pytest.raises(DomainError):
            ShiftedGamma(0, 1)
        with pytest.raises(DomainError):
            NormalMixture(1.0, 0, 1, 0, 1)

    def test_density_examples(self):
        assert exact_density(Normal(0, 1), 0.0) == pytest.approx(0.3989422804014327, rel=1e-15)
        assert exact_density(ShiftedGamma(1, 1, 0), 0.0) == 1.0
        assert exact_density(ShiftedGamma(1, 1, 0), 1e-300) == pytest.approx(1.0)
        assert exact_density(ShiftedGamma(3, 1, 2.0), 1.9) == 0.0
        m = NormalMixture(1 - 1e-12, 0.3, 1.4, 5.0, 0.2)
        for t in (-2.0, 0.3, 1.7):
            assert exact_density(m, t) == pytest.approx(exact_density(Normal(0.3, 1.4), t), rel=1e-10)

    def test_density_matches_scipy(self):
        t = np.linspace(0.01, 15, 50)
        np.testing.assert_allclose(exact_density(ShiftedGamma(4, 1.3, 0), t),
                                   stats.gamma.pdf(t, 4, scale=1.3), rtol=1e-12)
        np.testing.assert_allclose(exact_cdf(ShiftedGamma(4, 1.3, 0), t),
                                   stats.gamma.cdf(t, 4, scale=1.3), rtol=1e-12)

    @pytest.mark.parametrize("dist", FAMILIES)
    def test_density_unit_mass(self, dist):
        sd = math.sqrt(dist.variance)
        lo = max(dist.support_lo, dist.mean - 40 * sd)
        r = quadrature(lambda t: exact_density(dist, t), lo, dist.mean + 40 * sd, 1e-11)
        assert r.value == pytest.approx(1.0, abs=1e-9)


class TestBatchMeanLaw:
    def test_examples(self):
        assert batch_mean_law(Normal(2.0, 3.0), 9) == Normal(2.0, 1.0)
        g = batch_mean_law(ShiftedGamma(4.0, 1.0), 25)
        assert g == ShiftedGamma(100.0, 1 / 25, 0.0)
        assert skewness(g) == pytest.approx(0.2)
        for d in FAMILIES[:3]:
            assert batch_mean_law(d, 1) == d

    def test_mixture_unsupported(self):
        with pytest.raises(UnsupportedFamilyError):
            batch_mean_law(FAMILIES[3], 4)

    def test_ks_against_simulated_means(self):
        base = ShiftedGamma(4.0, 1.0, 0.5)
        law = batch_mean_law(base, 10)
        means = draw_values(base, 10 * 100_000, seed=3).reshape(100_000, 10).mean(axis=1)
        res = stats.kstest(means, lambda t: exact_cdf(law, t))
        assert res.pvalue > 1e-3

    def test_standardized(self):
        z = standardized_law(batch_mean_law(ShiftedGamma(4.0, 1.0), 16))
        assert z.mean == pytest.approx(0.0, abs=1e-12)
        assert z.variance == pytest.approx(1.0, rel=1e-12)
        assert skewness(z) == pytest.approx(1.0 / 4.0, rel=1e-12)


class TestSampling:
    def test_deterministic(self):
        a = sample(ShiftedGamma(4.0, 1.0), 1000, seed=9)
        b = sample(ShiftedGamma(4.0, 1.0), 1000, seed=9)
        np.testing.assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, sample(ShiftedGamma(4.0, 1.0), 1000, seed=10).values)

    def test_thread_count_irrelevant(self):
        d = NormalMixture(0.4, 0, 1, 3, 0.5)
        one = sample(d, 300_000, seed=5, threads=1)
        four = sample(d, 300_000, seed=5, threads=4)
        np.testing.assert_array_equal(one.values, four.values)

    def test_normal_and_gamma(self):
        n = 1_000_000
        z = sample(Normal(0, 1), n, seed=1)
        assert abs(estimate_cumulants(z).skewness) < 3 * math.sqrt(6 / n)
        g = sample(ShiftedGamma(4, 1, 0), n, seed=2)
        assert abs(g.values.mean() - 4.0) < 3 * 2.0 / math.sqrt(n)

    @pytest.mark.parametrize("dist", FAMILIES)
    def test_sample_cumulants(self, dist):
        x = sample(dist, 1_000_000, seed=17).values
        s = estimate_cumulants(x)
        se = bootstrap_cumulant_se(x, 200, seed=18)
        assert abs(s.mean - dist.mean) < 4 * se.mean
        assert abs(s.variance - dist.variance) < 4 * se.variance
        assert abs(s.kappa3 - dist.kappa3) < 4 * se.kappa3
        assert abs(s.skewness - skewness(dist)) < 4 * se.skewness


class TestTriplets:
    def test_config_invariants(self):
        with pytest.raises(DomainError):
            ClusterTripletConfig(dimension=0)
        with pytest.raises(DomainError):
            ClusterTripletConfig(n_triplets=3)
        assert ClusterTripletConfig(distance="sqeuclidean").distance is Distance.SQUARED_EUCLIDEAN

    def test_deterministic(self):
        cfg = ClusterTripletConfig(4, 1.0, 1.0, "euclidean", 5000, 7)
        np.testing.assert_array_equal(simulate_triplets(cfg).values, simulate_triplets(cfg).values)

    def test_no_separation_symmetric(self):
        s = simulate_triplets(ClusterTripletConfig(8, 0.0, 1.0, "euclidean", 100_000, 3))
        x = s.values
        assert abs(x.mean()) < 4 * x.std() / math.sqrt(x.size)

    def test_large_separation(self):
        s = simulate_triplets(ClusterTripletConfig(8, 100.0, 1.0, "euclidean", 10_000, 4))
        assert np.all(s.values > 0)
        assert mc_semi_hard_probability(s, 1.0).value == 0.0

    def test_squared_distance_matches_brute_force(self):
        cfg = ClusterTripletConfig(3, 1.5, 0.8, "sqeuclidean", 10, 21)
        got = simulate_triplets(cfg).values
        # regenerate the single chunk by hand
        ss = np.random.SeedSequence(21).spawn(1)[0]
        rng = np.random.Generator(np.random.PCG64(ss))
        a, p, n = (rng.normal(0, 0.8, size=(10, 3)) for _ in range(3))
        n[:, 0] += 1.5
        expected = [np.sum((a[i] - n[i]) ** 2) - np.sum((a[i] - p[i]) ** 2) for i in range(10)]
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_squared_more_skewed(self):
        e = simulate_triplets(ClusterTripletConfig(8, 2.0, 1.0, "euclidean", 100_000, 8))
        q = simulate_triplets(ClusterTripletConfig(8, 2.0, 1.0, "sqeuclidean", 100_000, 8))
        assert abs(estimate_cumulants(q).skewness) > abs(estimate_cumulants(e).skewness)
