import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate
from scipy import stats as sps

from retarget import (
    ChainParams,
    DistributionSpec,
    DomainError,
    HashrateSchedule,
    Marker,
    cdf,
    estimate_hashrate,
    pdf,
    predicted_blocktime,
    predicted_moments,
    quantile,
)

SPECS = [
    DistributionSpec.exponential(0.1),
    DistributionSpec.exponential(3.0),
    DistributionSpec.erlang(1, 0.1),
    DistributionSpec.erlang(2, 1.0),
    DistributionSpec.erlang(20, 200.0),
    DistributionSpec.erlang(2016, 20160.0),
    DistributionSpec.lomax(1, 10.0),
    DistributionSpec.lomax(2, 20.0),
    DistributionSpec.lomax(20, 200.0),
    DistributionSpec.lomax(2016, 20160.0),
]


def scipy_law(spec):
    if spec.family.value == "exponential":
        return sps.expon(scale=1 / spec.rate_or_scale)
    if spec.family.value == "erlang":
        return sps.gamma(spec.shape, scale=1 / spec.rate_or_scale)
    return sps.lomax(spec.shape, scale=spec.rate_or_scale)


class TestPointValues:
    def test_lomax_density_at_zero(self):
        assert pdf(DistributionSpec.lomax(20, 200), 0.0) == pytest.approx(0.1, rel=1e-15)

    def test_exponential_density_at_zero(self):
        assert pdf(DistributionSpec.exponential(0.1), 0.0) == 0.1

    def test_erlang_density(self):
        assert pdf(DistributionSpec.erlang(2, 1), 1.0) == pytest.approx(math.exp(-1), rel=1e-14)

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_cdf_zero(self, spec):
        assert cdf(spec, 0.0) == 0.0
        assert quantile(spec, 0.0) == 0.0

    def test_lomax_median(self):
        x = 200 * (2 ** (1 / 20) - 1)
        assert cdf(DistributionSpec.lomax(20, 200), x) == pytest.approx(0.5, abs=1e-14)

    def test_erlang_one_is_exponential(self):
        assert cdf(DistributionSpec.erlang(1, 0.1), 10.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)

    def test_exponential_quantile(self):
        assert quantile(DistributionSpec.exponential(0.1), 1 - math.exp(-1)) == pytest.approx(10.0, rel=1e-14)

    def test_erlang_median_self_consistent(self):
        spec = DistributionSpec.erlang(20, 200)
        assert abs(cdf(spec, quantile(spec, 0.5)) - 0.5) < 1e-10

    def test_large_shape_lomax_does_not_overflow(self):
        value = pdf(DistributionSpec.lomax(2016, 20160.0), 10.0)
        assert math.isfinite(value) and value > 0


class TestAgainstScipy:
    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_pdf(self, spec):
        law = scipy_law(spec)
        xs = law.ppf(np.linspace(0.001, 0.999, 41))
        np.testing.assert_allclose(pdf(spec, xs), law.pdf(xs), rtol=1e-9)

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_cdf(self, spec):
        law = scipy_law(spec)
        xs = law.ppf(np.linspace(0.0001, 0.9999, 41))
        np.testing.assert_allclose(cdf(spec, xs), law.cdf(xs), rtol=1e-9, atol=1e-14)

    def test_erlang_lower_tail_relative_precision(self):
        spec = DistributionSpec.erlang(20, 200.0)
        xs = np.array([1e-3, 5e-3, 0.02])
        np.testing.assert_allclose(cdf(spec, xs), sps.gamma(20, scale=1 / 200).cdf(xs), rtol=1e-10)


class TestProperties:
    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_normalization(self, spec):
        upper = quantile(spec, 1 - 1e-8)
        points = list(quantile(spec, np.array([0.1, 0.5, 0.9, 0.99, 0.9999])))
        mass, _ = integrate.quad(lambda x: pdf(spec, x), 0, upper, points=points, limit=400, epsabs=1e-13)
        # the integral stops at the 1 - 1e-8 quantile
        assert abs(mass - 1) < 1e-6

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_round_trip(self, spec):
        xs = quantile(spec, np.linspace(0.005, 0.995, 60))
        back = quantile(spec, cdf(spec, xs))
        np.testing.assert_allclose(back, xs, rtol=1e-8)

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_quantile_inverts_cdf(self, spec):
        us = np.linspace(0.0, 0.999, 50)
        np.testing.assert_allclose(cdf(spec, quantile(spec, us)), us, atol=1e-10)

    @pytest.mark.parametrize("spec", SPECS, ids=str)
    def test_cdf_monotone(self, spec):
        xs = quantile(spec, np.linspace(0, 0.9999, 500))
        values = cdf(spec, xs)
        assert np.all(np.diff(values) >= 0)
        assert values[0] == 0.0 and 0.999 < values[-1] <= 1.0

    @pytest.mark.parametrize("n", [4, 5, 8, 20])
    @pytest.mark.parametrize("scale", [1.0, 200.0])
    def test_lomax_moments_by_quadrature(self, n, scale):
        spec = DistributionSpec.lomax(n, scale)
        m1, _ = integrate.quad(lambda x: x * pdf(spec, x), 0, np.inf, epsrel=1e-12, limit=400)
        m2, _ = integrate.quad(lambda x: x * x * pdf(spec, x), 0, np.inf, epsrel=1e-12, limit=400)
        report = predicted_moments(spec)
        assert report.mean == pytest.approx(m1, rel=1e-6)
        assert report.variance == pytest.approx(m2 - m1**2, rel=1e-6)

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    @pytest.mark.parametrize("scale", [1.0, 200.0])
    def test_compound_identity(self, n, scale):
        # exponential density mixed over an Erlang(n, scale) rate, integrated numerically
        rate_law = sps.gamma(n, scale=1 / scale)
        lomax = DistributionSpec.lomax(n, scale)
        for x in np.linspace(0, 20 * scale, 25):
            mixed, _ = integrate.quad(
                lambda lam: lam * math.exp(-lam * x) * rate_law.pdf(lam), 0, np.inf, epsabs=1e-13, epsrel=1e-12
            )
            assert abs(mixed - pdf(lomax, x)) < 1e-8


class TestMoments:
    def test_bitcoin_scale_mean(self):
        report = predicted_moments(DistributionSpec.lomax(2016, 20160))
        assert report.mean == pytest.approx(20160 / 2015, rel=1e-15)
        assert report.mean == pytest.approx(10.00496, abs=5e-6)

    def test_n20(self):
        report = predicted_moments(DistributionSpec.lomax(20, 200))
        assert report.mean == pytest.approx(200 / 19, rel=1e-15)
        assert report.variance == pytest.approx(200**2 * 20 / (19**2 * 18), rel=1e-15)
        assert report.variance == pytest.approx(123.11, abs=0.01)

    def test_infinite_variance(self):
        report = predicted_moments(DistributionSpec.lomax(2, 20))
        assert report.mean == 20.0
        assert report.variance is Marker.INFINITE

    def test_undefined_mean(self):
        report = predicted_moments(DistributionSpec.lomax(1, 10))
        assert report.mean is Marker.UNDEFINED and report.variance is Marker.UNDEFINED
        assert report.to_dict() == {"mean": "undefined", "variance": "undefined"}

    def test_corrected_rule_mean_is_target(self):
        report = predicted_moments(DistributionSpec.lomax(20, 190))
        assert report.mean == 10.0
        # both closed forms of the variance agree exactly
        assert Fraction(190) ** 2 * 20 / (Fraction(19) ** 2 * 18) == Fraction(20, 18) * 100
        assert report.variance == pytest.approx(20 * 100 / 18, rel=1e-14)

    def test_exponential_and_erlang(self):
        assert predicted_moments(DistributionSpec.exponential(0.1)) == predicted_moments(
            DistributionSpec.exponential(0.1)
        )
        e = predicted_moments(DistributionSpec.exponential(0.1))
        assert e.mean == pytest.approx(10) and e.variance == pytest.approx(100)
        g = predicted_moments(DistributionSpec.erlang(20, 200))
        assert g.mean == pytest.approx(0.1) and g.variance == pytest.approx(20 / 200**2)


class TestPredictedBlocktime:
    def test_first_period(self):
        spec = predicted_blocktime(1, ChainParams(20, 10.0, initial_difficulty=10.0), HashrateSchedule.constant())
        assert spec == DistributionSpec.exponential(0.1)

    def test_ideal(self):
        spec = predicted_blocktime(2, ChainParams(20, 10.0), HashrateSchedule.constant())
        assert spec == DistributionSpec.lomax(20, 200.0)

    def test_corrected(self):
        spec = predicted_blocktime(2, ChainParams(20, 10.0, "corrected"), HashrateSchedule.constant())
        assert spec == DistributionSpec.lomax(20, 190.0)

    @pytest.mark.parametrize("rule", ["clamped", "bitcoin_bug"])
    def test_no_closed_form(self, rule):
        assert predicted_blocktime(2, ChainParams(20, 10.0, rule), HashrateSchedule.constant()) is None
        assert predicted_blocktime(1, ChainParams(20, 10.0, rule), HashrateSchedule.constant()) is not None


class TestEstimateHashrate:
    def test_values(self):
        assert estimate_hashrate(10, (10, 10)) == 1.0
        assert estimate_hashrate(10, (10,)) == 1.0

    @pytest.mark.parametrize("times", [(), (0.0, 0.0)])
    def test_errors(self, times):
        with pytest.raises(DomainError):
            estimate_hashrate(10, times)

    def test_bias_factor(self):
        # E[1/T] for T ~ Erlang(N, lambda) is lambda/(N-1), so the estimate is biased by N/(N-1)
        from retarget import RngHandle, sample_erlang

        n, d = 20, 10.0
        totals = sample_erlang(n, 0.1, RngHandle(11), size=10**5)
        estimates = n * d / totals
        se = estimates.std(ddof=1) / math.sqrt(estimates.size)
        assert abs(estimates.mean() - 20 / 19) < 4 * se


class TestDomain:
    def test_negative_x(self):
        with pytest.raises(DomainError):
            pdf(DistributionSpec.exponential(1.0), -1.0)
        with pytest.raises(DomainError):
            cdf(DistributionSpec.lomax(2, 1.0), -0.5)

    @pytest.mark.parametrize("u", [-0.1, 1.0, 1.5])
    def test_bad_probability(self, u):
        with pytest.raises(DomainError):
            quantile(DistributionSpec.exponential(1.0), u)

    @pytest.mark.parametrize(
        "args", [("exponential", 0.0, None), ("lomax", 1.0, 0), ("erlang", 1.0, None), ("exponential", 1.0, 2)]
    )
    def test_bad_spec(self, args):
        with pytest.raises(DomainError):
            DistributionSpec(*args)
