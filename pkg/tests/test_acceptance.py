"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test prints a PASS/FAIL line (visible with ``pytest -s``); the
pytest verdict per test is the per-criterion pass/fail signal.
"""

import itertools
import math
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from evstream import (
    AlternativePoint,
    BetaPriorConfig,
    Block,
    BlockDesign,
    DegenerateEvidenceError,
    DomainError,
    bayes_factor_identity_check,
    divergence_value,
    point_alternative_from_rate,
    simple_block_e,
    simple_block_e_general,
)
from evstream.baselines import (
    ContingencyTable,
    fisher_exact_one_sided,
    gd_expectation_check,
)
from evstream.core import log_simple_block_e
from evstream.sim import (
    SimConfig,
    default_type1_models,
    estimate_growth,
    simulate_power,
    simulate_swepis,
    simulate_type1,
    swepis_config,
)

SEED = 20260810


@contextmanager
def criterion(number, description):
    try:
        yield
    except BaseException:
        print(f"FAIL criterion {number}: {description}")
        raise
    print(f"PASS criterion {number}: {description}")


def designs_up_to(total):
    return [
        BlockDesign(n_a, n_b)
        for n_a in range(1, total)
        for n_b in range(1, total)
        if n_a + n_b <= total
    ]


def alternative_grid(step=0.05):
    values = np.round(np.arange(0, round(1 / step) + 1) * step, 10)
    for theta_a in values:
        for theta_b in values:
            if theta_a == theta_b and theta_a in (0.0, 1.0):
                continue  # fully degenerate corner: 0/0 on any data
            yield AlternativePoint(float(theta_a), float(theta_b))


def restricted_point_alternatives():
    rates = np.round(np.arange(1, 20) * 0.05, 10)
    settings = [
        ("difference", 0.05),
        ("difference", 0.2),
        ("log_odds_ratio", math.log(2)),
        ("log_odds_ratio", -math.log(2)),
    ]
    for rate in rates:
        for div, delta in settings:
            try:
                yield point_alternative_from_rate(float(rate), div, delta)
            except DomainError:
                continue


def sup_null_expectation(design, alt, theta_grid, powers):
    """sup over the theta grid of the enumerated expectation of the block
    e-variable, via per-count weights (exact enumeration by counts)."""
    weights = np.zeros(design.n + 1)
    for k_a in range(design.n_a + 1):
        for k_b in range(design.n_b + 1):
            s = math.exp(log_simple_block_e(k_a, k_b, design, alt))
            weights[k_a + k_b] += (
                math.comb(design.n_a, k_a) * math.comb(design.n_b, k_b) * s
            )
    return float((powers @ weights).max())


def test_criterion_1_e_variable_brute_force():
    theta_grid = np.round(np.arange(0, 101) * 0.01, 10)
    with criterion(1, "brute-force e-variable bound over all small designs"):
        checked = 0
        for design in designs_up_to(6):
            ks = np.arange(design.n + 1)
            with np.errstate(invalid="ignore"):
                powers = theta_grid[:, None] ** ks[None, :] * (
                    1 - theta_grid[:, None]
                ) ** (design.n - ks[None, :])
            powers = np.nan_to_num(powers)
            alts = itertools.chain(
                alternative_grid(), restricted_point_alternatives()
            )
            for alt in alts:
                sup = sup_null_expectation(design, alt, theta_grid, powers)
                assert sup <= 1 + 1e-10, (design, alt, sup)
                checked += 1
        assert checked > 7000


@pytest.fixture(scope="module")
def type1_result():
    config = SimConfig(
        scenario="type1",
        replications=1000,
        max_blocks=1000,
        alpha=0.05,
        design=BlockDesign(1, 1),
        generator=(0.1, 0.1),
        models=default_type1_models(),
        seed=SEED,
        include_fisher=True,
    )
    return simulate_type1(config)


def test_criterion_2_type1_under_optional_stopping(type1_result):
    with criterion(2, "type-I error bounded for e-processes, inflated for the misused exact test"):
        fisher = type1_result.variant("fisher-optional-stopping")
        for variant in type1_result.variants:
            rate = variant.rejection_rate[-1]
            se = variant.rejection_se[-1]
            if variant is fisher:
                assert rate - 0.05 > 3 * se, (variant.label, rate, se)
            else:
                assert rate <= 0.05 + 3 * se, (variant.label, rate, se)


def test_criterion_3_swepis_replay_stops_early():
    with criterion(3, "known-rate replay stops before the final block in >= 99% of runs"):
        result = simulate_swepis(swepis_config(replications=1000, seed=SEED))
        point = result.variant("point-from-rate")
        stopped_early = np.mean(
            (point.stop_block > 0) & (point.stop_block < 1380)
        )
        assert stopped_early >= 0.99, stopped_early
        rejected = point.stop_block > 0
        assert np.all(point.final_log_e[rejected] >= math.log(20.0) - 1e-9)


def test_criterion_4_fisher_value_for_the_stopped_trial():
    with criterion(4, "one-sided exact test on the 0/1381 vs 6/1379 table"):
        p = fisher_exact_one_sided(ContingencyTable(0, 1381, 6, 1373))
        assert abs(p - 0.015) <= 0.002, p


def test_criterion_5_gunel_dickey_counterexamples():
    with criterion(5, "default Bayes factors exceed expectation 1; a true e-variable does not"):
        poisson = gd_expectation_check("poisson", rates=1.0, truncation=30)
        assert poisson.value > 1.0, poisson
        multinomial = gd_expectation_check(
            "indep_multinomial", theta=0.5, n_a=10, n_b=10
        )
        assert multinomial.value > 1.0, multinomial

        design = BlockDesign(10, 10)
        alt = AlternativePoint(0.3, 0.7)  # induced null mix exactly 0.5

        def statistic(table):
            return math.exp(
                log_simple_block_e(table.n_a1, table.n_b1, design, alt)
            )

        cross = gd_expectation_check(
            "indep_multinomial", theta=0.5, n_a=10, n_b=10, statistic=statistic
        )
        assert abs(cross.value - 1.0) <= 1e-10, cross


def test_criterion_6_bayes_factor_identity():
    with criterion(6, "telescoped numerator equals the product of group marginals"):
        rng = np.random.default_rng(SEED)
        for _ in range(100):
            gamma = float(rng.uniform(0.05, 3.0))
            prior = BetaPriorConfig(
                gamma,
                float(rng.uniform(0.05, 3.0)),
                float(rng.uniform(0.05, 3.0)),
                float(rng.uniform(0.05, 3.0)),
            )
            m = int(rng.integers(1, 13))
            blocks = [
                Block((int(rng.integers(2)),), (int(rng.integers(2)),))
                for _ in range(m)
            ]
            lhs, rhs = bayes_factor_identity_check(prior, blocks)
            assert lhs == pytest.approx(rhs, rel=1e-12), (lhs, rhs)


def test_criterion_7_power_and_growth_properties():
    with criterion(7, "stopping-time and growth properties substituting the graphical figures"):
        strong = SimConfig(
            scenario="power",
            replications=1000,
            max_blocks=60,
            alpha=0.05,
            design=BlockDesign(1, 1),
            generator=(0.1, 0.9),
            models=[{"type": "beta", "gamma": 0.18}],
            seed=SEED,
        )
        result = simulate_power(strong)
        assert result.worst_case_m is not None
        assert result.expected_stopping_time <= result.worst_case_m
        assert result.worst_case_m < 25, result.worst_case_m

        sizes = []
        for delta in (0.2, 0.4, 0.6):
            config = SimConfig(
                scenario="power",
                replications=1000,
                max_blocks=400,
                alpha=0.05,
                design=BlockDesign(1, 1),
                generator=(0.1, 0.1 + delta),
                models=[{"type": "beta", "gamma": 0.18}],
                seed=SEED,
            )
            outcome = simulate_power(config)
            assert outcome.worst_case_m is not None
            assert (
                outcome.expected_stopping_time <= outcome.worst_case_m
            )
            sizes.append(outcome.worst_case_m)
        assert sizes[0] >= sizes[1] >= sizes[2], sizes

        growth_small = estimate_growth(
            {"type": "beta", "gamma": 0.18},
            (0.2, 0.8),
            BlockDesign(1, 1),
            max_blocks=100,
            replications=1000,
            seed=SEED,
        )
        growth_large = estimate_growth(
            {"type": "beta", "gamma": 5.0},
            (0.2, 0.8),
            BlockDesign(1, 1),
            max_blocks=100,
            replications=1000,
            seed=SEED,
        )
        combined_se = math.hypot(growth_small.se, growth_large.se)
        assert (
            growth_small.mean_log_e - growth_large.mean_log_e > 3 * combined_se
        ), (growth_small, growth_large)


def test_criterion_8_fact_property_and_module_invariants():
    with criterion(8, "weighted power-product bound and module invariants"):
        rng = np.random.default_rng(SEED)
        samples = 10_000
        n_a = rng.integers(1, 7, size=samples)
        n_b = rng.integers(1, 7, size=samples)
        n = n_a + n_b
        u = rng.uniform(0, n / n_a)
        v = rng.uniform(0, (n - n_a * u) / n_b)
        assert np.all(u**n_a * v**n_b <= 1 + 1e-12)

        # order invariance: the block score is a function of counts alone
        design = BlockDesign(3, 2)
        alt = AlternativePoint(0.25, 0.55)
        reference = simple_block_e(Block((1, 1, 0), (0, 1)), design, alt)
        for ys_a in itertools.permutations((1, 1, 0)):
            assert simple_block_e(Block(ys_a, (0, 1)), design, alt) == reference

        # convexity rewrite: the general mixture denominator collapses to
        # the Bernoulli mixture rate
        for _ in range(200):
            design = BlockDesign(int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            alt = AlternativePoint(
                float(rng.uniform(0.02, 0.98)), float(rng.uniform(0.02, 0.98))
            )
            ys_a = tuple(int(v) for v in rng.integers(2, size=design.n_a))
            ys_b = tuple(int(v) for v in rng.integers(2, size=design.n_b))
            general = simple_block_e_general(
                ys_a,
                ys_b,
                design,
                (1 - alt.theta_a, alt.theta_a),
                (1 - alt.theta_b, alt.theta_b),
            )
            direct = simple_block_e(Block(ys_a, ys_b), design, alt)
            assert general == pytest.approx(direct, abs=1e-12)

        # degenerate corners refuse to guess a 0/0 limit
        with pytest.raises(DegenerateEvidenceError):
            simple_block_e(
                Block((1,), (0,)), BlockDesign(1, 1), AlternativePoint(0.0, 0.0)
            )

        # the divergence round trip holds across the domain
        for div, delta in (("difference", 0.3), ("log_odds_ratio", -0.7)):
            for theta_a in np.linspace(0.05, 0.65, 13):
                from evstream import d_inverse

                theta_b = d_inverse(div, delta, float(theta_a))
                assert divergence_value(
                    div, float(theta_a), theta_b
                ) == pytest.approx(delta, abs=1e-12)
