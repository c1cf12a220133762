import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from semihard_edgeworth.cumulants import (DeltaSample, MomentAccumulator, estimate_cumulants,
                                          estimate_cumulants_chunked, read_sample, standardize,
                                          unstandardize, write_sample)
from semihard_edgeworth.errors import DomainError, InsufficientSampleError, ZeroVarianceError


def kstats_bruteforce(x):
    """k2, k3 from power sums (textbook formulas, independent of the accumulator)."""
    x = [float(v) for v in x]
    n = len(x)
    s1, s2, s3 = (math.fsum(v ** p for v in x) for p in (1, 2, 3))
    k2 = (n * s2 - s1 ** 2) / (n * (n - 1))
    k3 = (2 * s1 ** 3 - 3 * n * s1 * s2 + n * n * s3) / (n * (n - 1) * (n - 2))
    return k2, k3


class TestEstimate:
    def test_symmetric_sample(self):
        s = estimate_cumulants(DeltaSample([-1.0, 0.0, 1.0, 2.0]))
        assert s.mean == 0.5
        assert s.kappa3 == pytest.approx(0.0, abs=1e-15)
        assert s.n_samples == 4

    def test_matches_power_sum_formulas(self, rng):
        x = rng.gamma(2.0, 1.5, size=37)
        s = estimate_cumulants(x)
        k2, k3 = kstats_bruteforce(x)
        assert s.variance == pytest.approx(k2, rel=1e-12)
        assert s.kappa3 == pytest.approx(k3, rel=1e-10)
        assert s.skewness == pytest.approx(k3 / k2 ** 1.5, rel=1e-10)

    def test_matches_scipy_kstat(self, rng):
        from scipy.stats import kstat
        x = rng.normal(size=500) ** 2
        s = estimate_cumulants(x)
        assert s.variance == pytest.approx(kstat(x, 2), rel=1e-12)
        assert s.kappa3 == pytest.approx(kstat(x, 3), rel=1e-10)

    def test_normal_skewness_near_zero(self):
        x = np.random.default_rng(3).normal(2.0, 3.0, size=1_000_000)
        s = estimate_cumulants(x)
        se = math.sqrt(6.0 / x.size)
        assert abs(s.skewness) < 3 * se

    def test_gamma_skewness(self):
        from semihard_edgeworth.oracle import bootstrap_cumulant_se
        x = np.random.default_rng(4).gamma(4.0, 1.0, size=1_000_000)
        s = estimate_cumulants(x)
        assert abs(s.skewness - 1.0) < 3 * bootstrap_cumulant_se(x, 200, seed=5).skewness

    def test_errors(self):
        with pytest.raises(InsufficientSampleError):
            estimate_cumulants([1.0, 2.0, 3.0])
        with pytest.raises(ZeroVarianceError):
            estimate_cumulants([2.0] * 10)
        with pytest.raises(DomainError):
            DeltaSample([1.0, 2.0, math.nan, 4.0])

    def test_large_offset_is_stable(self):
        base = np.array([-1.0, 0.0, 1.0, 2.0, 5.0])
        a = estimate_cumulants(base)
        b = estimate_cumulants(base + 1e9)
        assert b.variance == pytest.approx(a.variance, rel=1e-9)
        assert b.kappa3 == pytest.approx(a.kappa3, rel=1e-6)


class TestProperties:
    @settings(max_examples=100, deadline=None)
    @given(arrays(float, st.integers(5, 60), elements=st.floats(-100, 100)),
           st.floats(0.01, 50), st.floats(-1e3, 1e3))
    def test_affine_equivariance(self, x, a, b):
        if np.ptp(x) < 1e-3:
            return
        sx = estimate_cumulants(x)
        sy = estimate_cumulants(a * x + b)
        assert sy.mean == pytest.approx(a * sx.mean + b, rel=1e-12, abs=1e-12 * (abs(b) + a * 100))
        assert sy.variance == pytest.approx(a * a * sx.variance, rel=1e-10)
        scale = a ** 3 * sx.variance ** 1.5
        assert sy.kappa3 == pytest.approx(a ** 3 * sx.kappa3, rel=1e-9, abs=1e-9 * scale)
        assert sy.skewness == pytest.approx(sx.skewness, rel=1e-9, abs=1e-9)

    def test_unbiased_on_gamma(self):
        rng = np.random.default_rng(11)
        draws = rng.gamma(4.0, 1.0, size=(10_000, 20))
        k2 = np.empty(len(draws)); k3 = np.empty(len(draws))
        for i, row in enumerate(draws):
            s = estimate_cumulants(row)
            k2[i], k3[i] = s.variance, s.kappa3
        for est, truth in ((k2, 4.0), (k3, 8.0)):
            se = est.std(ddof=1) / math.sqrt(est.size)
            assert abs(est.mean() - truth) < 3 * se

    @given(st.floats(-1e6, 1e6))
    def test_standardize_roundtrip(self, x):
        s = estimate_cumulants([1.0, 4.0, 2.0, 9.0, -3.0])
        assert unstandardize(standardize(x, s), s) == pytest.approx(x, rel=1e-14, abs=1e-14)

    def test_standardize_examples(self):
        s = estimate_cumulants([1.0, 4.0, 2.0, 9.0, -3.0])
        assert standardize(s.mean, s) == 0.0
        assert standardize(s.mean + math.sqrt(s.variance), s) == pytest.approx(1.0, rel=1e-15)
        from semihard_edgeworth.cumulants import CumulantSummary
        assert standardize(5.0, CumulantSummary(2.0, 9.0, 0.0, 0.0, 10)) == 1.0
        with pytest.raises(ZeroVarianceError):
            standardize(1.0, CumulantSummary(2.0, 0.0, 0.0, 0.0, 10))

    @pytest.mark.parametrize("n_chunks", [1, 2, 7, 64])
    def test_chunked_merge(self, rng, n_chunks):
        x = rng.gamma(3.0, 2.0, size=10_001) + 50.0
        whole = estimate_cumulants(x)
        parts = estimate_cumulants_chunked(np.array_split(x, n_chunks))
        for field in ("mean", "variance", "kappa3", "skewness"):
            assert getattr(parts, field) == pytest.approx(getattr(whole, field), rel=1e-12)

    def test_merge_order_independent(self, rng):
        chunks = np.array_split(rng.normal(size=1000) ** 3, 5)
        fwd = MomentAccumulator()
        for c in chunks:
            fwd.merge(MomentAccumulator.from_array(c))
        rev = MomentAccumulator()
        for c in reversed(chunks):
            rev.merge(MomentAccumulator.from_array(c))
        assert rev.summary().kappa3 == pytest.approx(fwd.summary().kappa3, rel=1e-12)


class TestFileFormat:
    def test_roundtrip(self, tmp_path, rng):
        s = DeltaSample(rng.normal(size=50), "t")
        p = tmp_path / "d.txt"
        with open(p, "w") as fh:
            write_sample(s, fh, ["hello"])
        back = read_sample(p)
        np.testing.assert_array_equal(back.values, s.values)

    def test_comments_and_blank_lines(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("# header\n1.0\n\n2.5  # trailing\n-3\n4e-1\n")
        assert list(read_sample(p).values) == [1.0, 2.5, -3.0, 0.4]

    def test_bad_line_named(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("1\n2\nabc\n4\n5\n")
        with pytest.raises(DomainError, match=":3:"):
            read_sample(p)
