import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from evstream import (
    BlockDesign,
    ConfigurationError,
    Divergence,
    DomainError,
    PosteriorUnderflowError,
    RestrictedPrior,
    StreamState,
    ValidationError,
    build_grid,
    d_inverse,
    divergence_value,
    grid_posterior_means,
    grid_posterior_update,
    point_alternative_from_rate,
)
from evstream.kernels import restricted_log_e_batch
from evstream.sim import block_count_streams, first_crossing


class TestDInverse:
    def test_difference_is_additive(self):
        assert d_inverse("difference", 0.05, 0.1) == pytest.approx(0.15)

    def test_log_odds_doubles_the_odds(self):
        assert d_inverse("log_odds_ratio", math.log(2), 0.5) == pytest.approx(
            2 / 3, abs=1e-12
        )

    def test_stillbirth_restriction_values(self):
        assert d_inverse("difference", 0.00318, 0.0001) == pytest.approx(
            0.00328, abs=1e-12
        )

    def test_difference_domain_error(self):
        with pytest.raises(DomainError):
            d_inverse("difference", 0.2, 0.9)
        with pytest.raises(DomainError):
            d_inverse("difference", -0.2, 0.1)

    def test_log_odds_domain_error(self):
        with pytest.raises(DomainError):
            d_inverse("log_odds_ratio", 1.0, 0.0)
        with pytest.raises(DomainError):
            d_inverse("log_odds_ratio", 1.0, 1.0)

    @settings(derandomize=True, max_examples=200)
    @given(
        st.sampled_from([Divergence.DIFFERENCE, Divergence.LOG_ODDS_RATIO]),
        st.floats(min_value=-2.0, max_value=2.0),
        st.floats(min_value=0.01, max_value=0.99),
    )
    def test_round_trip(self, divergence, delta, theta_a):
        if divergence is Divergence.DIFFERENCE and not (
            0.0 <= theta_a + delta <= 1.0
        ):
            return
        if delta == 0:
            return
        theta_b = d_inverse(divergence, delta, theta_a)
        assert divergence_value(divergence, theta_a, theta_b) == pytest.approx(
            delta, abs=1e-12
        )


class TestBuildGrid:
    def test_uniform_difference_grid_by_hand(self):
        prior = build_grid("difference", 0.2, 0.25, 1.0, 1.0)
        np.testing.assert_allclose(prior.theta_a, [0.2, 0.4, 0.6, 0.8], atol=1e-12)
        np.testing.assert_allclose(prior.weights, [0.25] * 4, atol=1e-12)
        np.testing.assert_allclose(prior.theta_b, [0.4, 0.6, 0.8, 1.0], atol=1e-12)
        assert prior.zeta == 0.2

    @pytest.mark.parametrize(
        "divergence,delta,precision,a,b",
        [
            ("difference", 0.05, 0.01, 0.18, 0.18),
            ("difference", -0.3, 0.02, 1.0, 2.0),
            ("log_odds_ratio", math.log(2), 0.005, 0.5, 0.5),
            ("log_odds_ratio", -1.0, 0.01, 2.0, 3.0),
        ],
    )
    def test_weights_normalized(self, divergence, delta, precision, a, b):
        prior = build_grid(divergence, delta, precision, a, b)
        assert prior.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(prior.weights >= 0)

    def test_log_odds_default_prior_grid_is_interior(self):
        prior = build_grid("log_odds_ratio", math.log(2), 0.01, 0.18, 0.18)
        assert prior.zeta == 0.0
        # nominal 1/K = 100 candidates; the rho = 1 endpoint is dropped
        assert prior.size == 99
        assert np.all((prior.theta_b > 0) & (prior.theta_b < 1))
        assert np.all((prior.theta_a > 0) & (prior.theta_a < 1))

    def test_mirrored_negative_difference(self):
        prior = build_grid("difference", -0.2, 0.25, 1.0, 1.0)
        np.testing.assert_allclose(prior.theta_a, [0.4, 0.6, 0.8, 1.0], atol=1e-12)
        np.testing.assert_allclose(prior.theta_b - prior.theta_a, -0.2, atol=1e-12)

    def test_invalid_configs(self):
        with pytest.raises(ValidationError):
            build_grid("difference", 0.0, 0.01)
        with pytest.raises(ValidationError):
            build_grid("difference", 0.1, 0.013)
        with pytest.raises(ValidationError):
            build_grid("difference", 0.1, 0.01, alpha=0.0)
        with pytest.raises(ConfigurationError):
            build_grid("difference", 1.0, 0.01)


def two_point_prior(weights=(0.5, 0.5)):
    return RestrictedPrior(
        divergence=Divergence.DIFFERENCE,
        delta=0.2,
        zeta=0.2,
        grid_precision=0.5,
        alpha=1.0,
        beta=1.0,
        rho=np.array([0.25, 0.75]),
        theta_a=np.array([0.2, 0.6]),
        theta_b=np.array([0.4, 0.8]),
        weights=np.array(weights, dtype=float),
    )


class TestGridPosterior:
    def test_empty_state_is_identity(self):
        prior = build_grid("difference", 0.1, 0.1, 0.18, 0.18)
        updated = grid_posterior_update(prior, StreamState())
        np.testing.assert_array_equal(updated.weights, prior.weights)

    def test_single_point_stays_point_mass(self):
        prior = RestrictedPrior(
            divergence=Divergence.DIFFERENCE,
            delta=0.2,
            zeta=0.2,
            grid_precision=1.0,
            alpha=1.0,
            beta=1.0,
            rho=np.array([0.5]),
            theta_a=np.array([0.4]),
            theta_b=np.array([0.6]),
            weights=np.array([1.0]),
        )
        state = StreamState(u_a=3, t_a=9, u_b=5, t_b=9, j=9)
        assert grid_posterior_update(prior, state).weights[0] == 1.0

    def test_two_point_hand_bayes_update(self):
        prior = two_point_prior(weights=(0.3, 0.7))
        state = StreamState(u_a=1, t_a=1, u_b=0, t_b=1, j=1)
        lik = np.array([0.2 * (1 - 0.4), 0.6 * (1 - 0.8)])
        expected = np.array([0.3, 0.7]) * lik
        expected /= expected.sum()
        updated = grid_posterior_update(prior, state)
        np.testing.assert_allclose(updated.weights, expected, atol=1e-12)

    def test_underflow_raises(self):
        prior = RestrictedPrior(
            divergence=Divergence.DIFFERENCE,
            delta=0.2,
            zeta=0.2,
            grid_precision=1.0,
            alpha=1.0,
            beta=1.0,
            rho=np.array([1.0]),
            theta_a=np.array([0.8]),
            theta_b=np.array([1.0]),
            weights=np.array([1.0]),
        )
        with pytest.raises(PosteriorUnderflowError):
            grid_posterior_update(prior, StreamState(u_b=0, t_b=1, j=1))


class TestGridMeans:
    def test_uniform_grid_means(self):
        prior = build_grid("difference", 0.2, 0.25, 1.0, 1.0)
        assert grid_posterior_means(prior) == pytest.approx((0.5, 0.7))

    def test_point_mass_returns_the_point(self):
        prior = two_point_prior(weights=(0.0, 1.0))
        assert grid_posterior_means(prior) == pytest.approx((0.6, 0.8))

    def test_difference_mean_commutes_with_map(self):
        prior = two_point_prior(weights=(0.35, 0.65))
        theta_a_hat, theta_b_hat = grid_posterior_means(prior)
        assert theta_b_hat == pytest.approx(
            float(prior.weights @ prior.theta_b), abs=1e-12
        )

    def test_log_odds_mean_uses_the_inverse_map(self):
        prior = build_grid("log_odds_ratio", math.log(3), 0.05, 0.5, 0.5)
        skewed = grid_posterior_update(
            prior, StreamState(u_a=2, t_a=10, u_b=8, t_b=10, j=10)
        )
        theta_a_hat, theta_b_hat = grid_posterior_means(skewed)
        assert theta_b_hat == pytest.approx(
            d_inverse("log_odds_ratio", math.log(3), theta_a_hat), abs=1e-15
        )
        assert theta_b_hat != pytest.approx(
            float(skewed.weights @ skewed.theta_b), abs=1e-6
        )


class TestRestrictionConfig:
    def test_grid_round_trip(self):
        from evstream import parse_restriction_config, restriction_config

        config = restriction_config("difference", 0.05, 0.05, 0.18, 0.18)
        prior = parse_restriction_config(config)
        assert isinstance(prior, RestrictedPrior)
        assert prior.grid_precision == 0.05
        assert prior.alpha == 0.18

    def test_control_rate_selects_the_point_mode(self):
        from evstream import parse_restriction_config

        point = parse_restriction_config(
            {
                "divergence": "difference",
                "delta": 0.00318,
                "control_rate": 0.0001,
            }
        )
        assert point.theta_b == pytest.approx(0.00328)

    def test_missing_keys_rejected(self):
        from evstream import parse_restriction_config

        with pytest.raises(ValidationError):
            parse_restriction_config({"divergence": "difference"})


class TestPointFromRate:
    def test_examples(self):
        point = point_alternative_from_rate(0.1, "difference", 0.05)
        assert (point.theta_a, point.theta_b) == pytest.approx((0.1, 0.15))
        point = point_alternative_from_rate(0.0001, "difference", 0.00318)
        assert point.theta_b == pytest.approx(0.00328, abs=1e-12)
        point = point_alternative_from_rate(0.5, "log_odds_ratio", math.log(2))
        assert point.theta_b == pytest.approx(2 / 3, abs=1e-12)

    def test_domain_error_propagates(self):
        with pytest.raises(DomainError):
            point_alternative_from_rate(0.99, "difference", 0.05)


class TestRestrictedProcessInvariants:
    @pytest.mark.parametrize("theta", [0.1, 0.5])
    def test_mean_one_and_ville_under_null(self, theta):
        design = BlockDesign(1, 1)
        reps, blocks = 10_000, 50
        counts_a, counts_b = block_count_streams(
            theta, theta, design, blocks, reps, seed=4242
        )
        prior = build_grid("difference", 0.1, 0.01, 0.18, 0.18)
        log_e = restricted_log_e_batch(counts_a, counts_b, design, prior)
        finals = np.exp(log_e[:, -1])
        assert 0.85 <= finals.mean() <= 1.15
        alpha = 0.05
        rejected = np.mean(first_crossing(log_e, math.log(1 / alpha)) > 0)
        assert rejected <= alpha

    def test_posterior_consistency_on_grid_point(self):
        prior = build_grid("difference", 0.2, 0.05, 0.18, 0.18)
        index = 9
        theta_a = float(prior.theta_a[index])
        theta_b = float(prior.theta_b[index])
        for seed in (1, 2, 3):
            rng = np.random.default_rng(seed)
            blocks = 5000
            u_a = int(rng.binomial(blocks, theta_a))
            u_b = int(rng.binomial(blocks, theta_b))
            state = StreamState(
                u_a=u_a, t_a=blocks, u_b=u_b, t_b=blocks, j=blocks
            )
            posterior = grid_posterior_update(prior, state)
            assert posterior.weights[index] > 0.9

    def test_grid_refinement_stability(self):
        design = BlockDesign(1, 1)
        counts_a, counts_b = block_count_streams(
            0.3, 0.5, design, 1000, 1, seed=99
        )
        finals = []
        for precision in (0.01, 0.005):
            prior = build_grid("difference", 0.2, precision, 0.18, 0.18)
            log_e = restricted_log_e_batch(counts_a, counts_b, design, prior)
            finals.append(log_e[0, -1])
        assert abs(finals[0] - finals[1]) < 0.05
