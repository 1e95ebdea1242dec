"""Max-of-nodes write simulator: models, coupling invariants, limit behavior."""

import numpy as np
import pytest
from scipy.stats import kstest

from tailfit import (
    LatencyModel,
    ParameterError,
    Sample,
    SimConfig,
    confidence_interval,
    fit_mle,
    sample_node,
    simulate_campaign,
    simulate_write,
)

H16 = sum(1.0 / k for k in range(1, 17))


class TestLatencyModel:
    def test_uniform_needs_ordered_bounds(self):
        with pytest.raises(ParameterError):
            LatencyModel.uniform(1.0, 1.0)
        with pytest.raises(ParameterError):
            LatencyModel.uniform(-0.5, 1.0)  # durations cannot be negative

    def test_rate_and_tail_must_be_positive(self):
        with pytest.raises(ParameterError):
            LatencyModel.exponential(0.0)
        with pytest.raises(ParameterError):
            LatencyModel.pareto(1.0, -2.0)

    def test_unknown_kind_lists_supported(self):
        with pytest.raises(ParameterError, match="exponential.*pareto"):
            LatencyModel.from_spec("zipf:1.5")

    def test_empirical_must_be_nonempty_nonnegative(self):
        with pytest.raises(ParameterError):
            LatencyModel.empirical([])
        with pytest.raises(ParameterError):
            LatencyModel.empirical([1.0, -2.0])

    def test_spec_round_trip(self):
        m = LatencyModel.from_spec("lognormal:0.5,0.25")
        assert m.kind == "lognormal" and m.params == (0.5, 0.25)
        assert LatencyModel.from_spec(m.spec).params == m.params
        assert LatencyModel.from_spec("exp:1").kind == "exponential"

    def test_exponential_mean(self):
        rng = np.random.default_rng(3)
        draws = LatencyModel.exponential(1.0).draw(rng, 100_000)
        assert 0.98 <= draws.mean() <= 1.02

    def test_single_atom_empirical(self):
        rng = np.random.default_rng(4)
        m = LatencyModel.empirical([3.0])
        assert all(sample_node(m, rng) == 3.0 for _ in range(20))

    def test_truncated_normal_is_nonnegative(self):
        rng = np.random.default_rng(5)
        draws = LatencyModel.normal(0.1, 0.5).draw(rng, 10_000)
        assert np.all(draws >= 0.0)

    def test_scalar_draw_matches_stream_prefix(self):
        # sample_node consumes the stream exactly like the first element of a
        # vector draw, which is what the coupling invariants rely on
        m = LatencyModel.exponential(2.0)
        a = sample_node(m, np.random.default_rng(6))
        b = m.draw(np.random.default_rng(6), 4)
        assert a == b[0]


class TestSimConfig:
    def test_traffic_factor_floor(self):
        with pytest.raises(ParameterError, match="traffic factor"):
            SimConfig(model=LatencyModel.exponential(1.0), traffic_factor=0.5)

    def test_counts_positive(self):
        with pytest.raises(ParameterError):
            SimConfig(model=LatencyModel.exponential(1.0), nodes=0)
        with pytest.raises(ParameterError):
            SimConfig(model=LatencyModel.exponential(1.0), runs=0)


class TestSimulateWrite:
    def test_single_atom_single_node(self):
        cfg = SimConfig(model=LatencyModel.empirical([3.0]), nodes=1, runs=1)
        assert simulate_write(cfg, np.random.default_rng(0)) == 3.0

    def test_constant_scales_with_traffic_factor(self):
        cfg = SimConfig(model=LatencyModel.empirical([3.0]), nodes=16, traffic_factor=2.0, runs=1)
        assert simulate_write(cfg, np.random.default_rng(0)) == 6.0

    def test_meta_overhead_added_outside_max(self):
        cfg = SimConfig(
            model=LatencyModel.empirical([3.0]), nodes=4, traffic_factor=2.0,
            runs=1, meta_overhead=0.25,
        )
        assert simulate_write(cfg, np.random.default_rng(0)) == 6.25

    def test_mean_of_exponential_maxima_is_harmonic_number(self):
        # E[max of 16 unit exponentials] is the 16th harmonic number
        cfg = SimConfig(model=LatencyModel.exponential(1.0), nodes=16, runs=100_000, seed=8)
        obs = simulate_campaign(cfg)
        assert obs.durations.mean() == pytest.approx(H16, rel=0.01)


class TestSimulateCampaign:
    def test_deterministic_and_positive(self):
        cfg = SimConfig(model=LatencyModel.exponential(1.0), nodes=16, runs=400, seed=7)
        a = simulate_campaign(cfg)
        b = simulate_campaign(cfg)
        np.testing.assert_array_equal(a.durations, b.durations)
        assert a.durations.size == 400
        assert np.all(a.durations > 0)

    def test_traffic_factor_linearity_is_exact(self):
        quiet = SimConfig(model=LatencyModel.lognormal(0.0, 0.5), nodes=16, runs=300, seed=11)
        busy = SimConfig(
            model=LatencyModel.lognormal(0.0, 0.5), nodes=16, runs=300, seed=11, traffic_factor=2.0
        )
        np.testing.assert_array_equal(
            simulate_campaign(busy).durations, 2.0 * simulate_campaign(quiet).durations
        )

    @pytest.mark.parametrize(
        "model",
        [LatencyModel.exponential(1.0), LatencyModel.normal(1.0, 0.4), LatencyModel.pareto(1.0, 2.0)],
    )
    def test_monotone_in_node_count(self, model):
        # node j's draw is the j-th value of the (seed, run) substream, so a
        # wider fan-out takes the max over a superset, run by run
        small = simulate_campaign(SimConfig(model=model, nodes=8, runs=200, seed=13))
        large = simulate_campaign(SimConfig(model=model, nodes=16, runs=200, seed=13))
        assert np.all(large.durations >= small.durations)

    def test_durations_respect_model_lower_bound(self):
        cfg = SimConfig(model=LatencyModel.uniform(0.5, 1.0), nodes=4, runs=200, seed=14,
                        traffic_factor=2.0)
        obs = simulate_campaign(cfg)
        assert np.all(obs.durations >= 2.0 * 0.5)

    def test_node_max_retained_on_request(self):
        cfg = SimConfig(model=LatencyModel.exponential(1.0), nodes=4, runs=50, seed=15,
                        traffic_factor=3.0, keep_node_max=True)
        obs = simulate_campaign(cfg)
        np.testing.assert_allclose(obs.durations, 3.0 * obs.node_max, rtol=1e-15)


def test_empirical_cdf_matches_exact_max_law():
    """10^5 simulated max-of-16 exponentials vs F(x) = (1 - e^-x)^16."""
    cfg = SimConfig(model=LatencyModel.exponential(1.0), nodes=16, runs=100_000, seed=16)
    obs = simulate_campaign(cfg)
    stat = kstest(obs.durations, lambda x: (1.0 - np.exp(-x)) ** 16).statistic
    assert stat < 0.01


def test_gumbel_limit_of_paper_scale_campaign():
    """The 16-node, 400-observation campaign yields a shape CI containing 0."""
    cfg = SimConfig(model=LatencyModel.exponential(1.0), nodes=16, runs=400, seed=0)
    fit = fit_mle(Sample(simulate_campaign(cfg).durations))
    lo, hi = confidence_interval(fit, "shape", 0.95)
    assert lo < 0 < hi


def test_domain_of_attraction_signs():
    """Power-law nodes push the fitted shape above 0, bounded nodes below;
    the Gumbel-domain kinds stay near 0 (slow penultimate convergence keeps
    lognormal visibly positive and normal visibly negative at 64 nodes, so
    only magnitude is asserted for them)."""
    def fitted_shape(model, seed):
        cfg = SimConfig(model=model, nodes=64, runs=2000, seed=seed)
        return fit_mle(
            Sample(simulate_campaign(cfg).durations),
            _fallback_options(),
        )

    pareto = fitted_shape(LatencyModel.pareto(1.0, 2.0), 21)
    lo, hi = confidence_interval(pareto, "shape", 0.95)
    assert lo > 0

    uniform = fitted_shape(LatencyModel.uniform(0.0, 1.0), 22)
    lo, hi = confidence_interval(uniform, "shape", 0.95)
    assert hi < 0

    lognormal = fitted_shape(LatencyModel.lognormal(0.0, 1.0), 23)
    normal = fitted_shape(LatencyModel.normal(1.0, 0.2), 24)
    assert abs(lognormal.params.shape) < 0.35
    assert abs(normal.params.shape) < 0.35


def _fallback_options():
    from tailfit import FitOptions

    return FitOptions(stderr_fallback_b=60, stderr_fallback_seed=77, stderr_fallback_maxiter=500)
