"""Core GEV math: distribution/density/quantile identities, sampling, support."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import genextreme, kstest

from tailfit import (
    DomainError,
    GevParams,
    ParameterError,
    Sample,
    fit_mle,
    gev_cdf,
    gev_logpdf,
    gev_pdf,
    gev_quantile,
    gev_sample,
    support,
)

E_INV = math.exp(-1.0)

# oracle: bisection inversion of exp(-exp(-z)) = 1/2 gives z = -ln ln 2
Z_MEDIAN = 0.36651292058166435


def bisect_cdf(target, params, lo=-1e6, hi=1e6, tol=1e-13):
    """Independent quantile oracle: bisection on gev_cdf."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gev_cdf(mid, params) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def params_strategy():
    return st.builds(
        GevParams,
        loc=st.floats(-10, 10),
        scale=st.floats(0.01, 100),
        shape=st.floats(-0.9, 0.9),
    )


class TestGevParams:
    def test_scale_must_be_positive(self):
        with pytest.raises(ParameterError, match="scale"):
            GevParams(0.0, 0.0, 0.1)
        with pytest.raises(ParameterError, match="scale"):
            GevParams(0.0, -1.0, 0.1)

    def test_fields_must_be_finite(self):
        with pytest.raises(ParameterError):
            GevParams(math.nan, 1.0, 0.0)
        with pytest.raises(ParameterError):
            GevParams(0.0, 1.0, math.inf)

    def test_support_by_shape_sign(self):
        s = support(GevParams(2.0, 1.0, 0.5))
        assert s.lower == 2.0 - 1.0 / 0.5 and s.upper == math.inf
        s = support(GevParams(2.0, 1.0, -0.5))
        assert s.lower == -math.inf and s.upper == 2.0 + 1.0 / 0.5
        s = support(GevParams(2.0, 1.0, 0.0))
        assert s.lower == -math.inf and s.upper == math.inf


class TestCdf:
    def test_value_at_location_is_e_inverse(self):
        assert gev_cdf(0.0, GevParams(0.0, 1.0, 0.0)) == pytest.approx(E_INV, abs=1e-15)
        assert gev_cdf(5.0, GevParams(5.0, 3.0, 0.0)) == pytest.approx(E_INV, abs=1e-15)
        # (1 + shape*0) ** (-1/shape) is 1 for any shape
        assert gev_cdf(0.0, GevParams(0.0, 1.0, 0.5)) == pytest.approx(E_INV, abs=1e-15)

    def test_median_of_standard_gumbel(self):
        p = GevParams(0.0, 1.0, 0.0)
        assert gev_cdf(Z_MEDIAN, p) == pytest.approx(0.5, abs=1e-12)
        # the value quoted to six decimals
        assert gev_cdf(0.366513, p) == pytest.approx(0.5, abs=1e-6)

    def test_limits_outside_support(self):
        frechet = GevParams(0.0, 1.0, 1.0)
        assert gev_cdf(-2.0, frechet) == 0.0
        assert gev_cdf(-1.0, frechet) == 0.0  # exact lower endpoint
        weibull = GevParams(0.0, 1.0, -1.0)
        assert gev_cdf(2.0, weibull) == 1.0
        assert gev_cdf(1.0, weibull) == 1.0  # exact upper endpoint

    def test_matches_reference_implementation(self):
        # scipy parameterizes with c = -shape
        rng = np.random.default_rng(1)
        for _ in range(200):
            params = GevParams(rng.uniform(-5, 5), rng.uniform(0.05, 20), rng.uniform(-0.9, 0.9))
            x = rng.uniform(-30, 30)
            ref = genextreme.cdf(x, c=-params.shape, loc=params.loc, scale=params.scale)
            assert gev_cdf(x, params) == pytest.approx(ref, abs=1e-12)

    @given(params_strategy(), st.floats(-50, 50), st.floats(0.0, 10.0))
    @settings(max_examples=200, deadline=None)
    def test_monotone_and_bounded(self, params, x, dx):
        lo = gev_cdf(x, params)
        hi = gev_cdf(x + dx, params)
        assert 0.0 <= lo <= hi <= 1.0


class TestPdf:
    def test_value_at_location(self):
        assert gev_pdf(0.0, GevParams(0.0, 1.0, 0.0)) == pytest.approx(E_INV, abs=1e-15)

    def test_zero_outside_support(self):
        assert gev_pdf(-2.0, GevParams(0.0, 1.0, 1.0)) == 0.0
        assert gev_logpdf(-2.0, GevParams(0.0, 1.0, 1.0)) == -math.inf

    def test_standard_gumbel_at_one(self):
        # direct evaluation, cross-checked against a central difference of the CDF
        expected = math.exp(-1.0 - math.exp(-1.0))
        assert gev_pdf(1.0, GevParams(0.0, 1.0, 0.0)) == pytest.approx(expected, rel=1e-12)
        h = 1e-6
        fd = (gev_cdf(1.0 + h, GevParams(0.0, 1.0, 0.0)) - gev_cdf(1.0 - h, GevParams(0.0, 1.0, 0.0))) / (2 * h)
        assert fd == pytest.approx(expected, rel=1e-9)

    def test_matches_reference_implementation(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            params = GevParams(rng.uniform(-5, 5), rng.uniform(0.05, 20), rng.uniform(-0.9, 0.9))
            p = rng.uniform(0.01, 0.99)
            x = gev_quantile(p, params)
            ref = genextreme.pdf(x, c=-params.shape, loc=params.loc, scale=params.scale)
            assert gev_pdf(x, params) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    def test_normalizes_to_one(self):
        # piecewise quadrature between quantiles keeps the adaptive rule on
        # the mass even for the heavy-tailed shapes
        from scipy.integrate import quad

        for shape in (-0.5, -0.1, 0.0, 0.1, 0.5):
            params = GevParams(1.0, 2.0, shape)
            sup = support(params)
            cuts = [gev_quantile(p, params) for p in (1e-9, 0.001, 0.5, 0.999, 1.0 - 1e-9)]
            if math.isfinite(sup.lower):
                cuts.insert(0, sup.lower)
            if math.isfinite(sup.upper):
                cuts.append(sup.upper)
            total = sum(
                quad(lambda x: gev_pdf(x, params), a, b, limit=200)[0]
                for a, b in zip(cuts[:-1], cuts[1:])
            )
            assert total == pytest.approx(1.0, abs=1e-6)


class TestQuantile:
    def test_e_inverse_maps_to_location(self):
        for params in (GevParams(0.0, 1.0, 0.0), GevParams(3.0, 0.5, 0.4), GevParams(-2.0, 2.0, -0.4)):
            assert gev_quantile(E_INV, params) == pytest.approx(params.loc, abs=1e-12)

    def test_gumbel_median(self):
        oracle = bisect_cdf(0.5, GevParams(0.0, 1.0, 0.0))
        assert oracle == pytest.approx(-math.log(math.log(2.0)), abs=1e-9)
        assert gev_quantile(0.5, GevParams(0.0, 1.0, 0.0)) == pytest.approx(oracle, abs=1e-9)

    def test_unit_frechet_median(self):
        # closed form 1/ln 2 - 1, and the bisection oracle agrees
        params = GevParams(0.0, 1.0, 1.0)
        expected = 1.0 / math.log(2.0) - 1.0
        assert gev_quantile(0.5, params) == pytest.approx(expected, rel=1e-12)
        assert bisect_cdf(0.5, params) == pytest.approx(expected, abs=1e-9)

    def test_rejects_out_of_domain(self):
        params = GevParams(0.0, 1.0, 0.0)
        for p in (0.0, 1.0, -0.1, 1.1, math.nan):
            with pytest.raises(DomainError):
                gev_quantile(p, params)

    @given(params_strategy(), st.floats(0.001, 0.998))
    @settings(max_examples=200, deadline=None)
    def test_strictly_increasing(self, params, p):
        assert gev_quantile(p + 0.001, params) > gev_quantile(p, params)


class TestRoundTrip:
    def test_cdf_of_quantile_sweep(self):
        """1000 random (p, params) tuples round-trip to 1e-9."""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            p = rng.uniform(0.001, 0.999)
            params = GevParams(rng.uniform(-10, 10), rng.uniform(0.01, 100), rng.uniform(-0.9, 0.9))
            assert abs(gev_cdf(gev_quantile(p, params), params) - p) < 1e-9

    @given(params_strategy(), st.floats(0.001, 0.999))
    @settings(max_examples=300, deadline=None)
    def test_cdf_of_quantile_property(self, params, p):
        assert abs(gev_cdf(gev_quantile(p, params), params) - p) < 1e-9


def test_pdf_matches_cdf_derivative():
    """Central finite difference of the CDF reproduces the density to 1e-6."""
    rng = np.random.default_rng(7)
    for _ in range(300):
        params = GevParams(rng.uniform(-5, 5), rng.uniform(0.05, 20), rng.uniform(-0.8, 0.8))
        x = gev_quantile(rng.uniform(0.05, 0.95), params)
        h = 1e-6 * max(1.0, abs(x))
        fd = (gev_cdf(x + h, params) - gev_cdf(x - h, params)) / (2 * h)
        assert fd == pytest.approx(gev_pdf(x, params), rel=1e-6)


def test_branch_continuity_near_zero_shape():
    """Tiny |shape| routes to the Gumbel formulas without a jump."""
    gumbel = GevParams(2.0, 3.0, 0.0)
    xs = np.linspace(2.0 - 15.0, 2.0 + 15.0, 101)
    for shape in (1e-10, -1e-10):
        tilted = GevParams(2.0, 3.0, shape)
        diff = np.abs(gev_cdf(xs, tilted) - gev_cdf(xs, gumbel))
        assert diff.max() < 1e-6
    # just above the routing threshold the stable log forms keep it continuous
    for shape in (1e-7, -1e-7):
        tilted = GevParams(2.0, 3.0, shape)
        diff = np.abs(gev_cdf(xs, tilted) - gev_cdf(xs, gumbel))
        assert diff.max() < 1e-6


class TestSampling:
    def test_inverse_transform_definition(self):
        params = GevParams(0.0, 1.0, 0.0)
        drawn = gev_sample(params, 1, 42)
        u = np.random.default_rng(42).random(1)
        assert drawn[0] == gev_quantile(float(u[0]), params)

    def test_same_seed_same_sequence(self):
        params = GevParams(1.0, 2.0, 0.3)
        a = gev_sample(params, 100, 7)
        b = gev_sample(params, 100, 7)
        np.testing.assert_array_equal(a, b)

    def test_rejects_empty_request(self):
        with pytest.raises(DomainError):
            gev_sample(GevParams(0.0, 1.0, 0.0), 0, 1)

    def test_ks_distance_to_analytic_cdf(self):
        params = GevParams(0.0, 1.0, 0.0)
        x = gev_sample(params, 100_000, 99)
        stat = kstest(x, lambda v: gev_cdf(v, params)).statistic
        assert stat < 0.01

    @given(params_strategy(), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_samples_stay_inside_support(self, params, seed):
        x = gev_sample(params, 256, seed)
        sup = support(params)
        assert np.all(x > sup.lower) and np.all(x < sup.upper)


def test_max_stability():
    """max of k iid GEV is GEV with the same shape and the scaled loc/scale;
    checked by refitting simulated block maxima (3 stderr tolerance)."""
    cases = ((GevParams(1.0, 0.5, 0.2), 8), (GevParams(1.0, 0.5, 0.0), 8), (GevParams(0.0, 1.0, -0.2), 16))
    for params, k in cases:
        n = 4000
        maxima = gev_sample(params, n * k, [55, k]).reshape(n, k).max(axis=1)
        fit = fit_mle(Sample(maxima))
        if abs(params.shape) > 1e-8:
            loc_k = params.loc + params.scale * (k**params.shape - 1.0) / params.shape
            scale_k = params.scale * k**params.shape
        else:
            loc_k = params.loc + params.scale * math.log(k)
            scale_k = params.scale
        assert fit.converged and fit.stderr is not None
        for name, truth, se in zip(("loc", "scale", "shape"), (loc_k, scale_k, params.shape), fit.stderr):
            assert abs(getattr(fit.params, name) - truth) <= 3.0 * se
