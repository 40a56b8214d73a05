import numpy as np
import pytest

from monfg import (
    MONFG,
    CorrelatedStrategy,
    LinearUtility,
    MixedStrategy,
    PolySumUtility,
    ProductUtility,
    StrategyModification,
    StrategyProfile,
    ThresholdUtility,
    conditional_expected_payoff,
    esr_value,
    esr_value_correlated,
    expected_payoff_correlated,
    expected_payoff_modified,
    expected_payoff_profile,
    utility_eval,
    utility_grad,
)
from monfg.core import utility_values
from monfg.errors import (
    DimensionMismatch,
    NonDifferentiable,
    ShapeMismatch,
    ZeroMarginal,
)
from monfg.optim import finite_difference_grad

from conftest import random_game, random_profile


# ---------------------------------------------------------------------------
# Type validation
# ---------------------------------------------------------------------------


def test_game_shape_validation():
    with pytest.raises(ShapeMismatch):
        MONFG(np.zeros((2, 2, 3, 1)))  # 2 action axes but 3 player slots
    with pytest.raises(ShapeMismatch):
        MONFG(np.full((2, 2, 2, 1), np.nan))
    g = MONFG(np.zeros((2, 3, 2, 1)))
    assert g.num_players == 2
    assert g.num_objectives == 1
    assert g.action_counts == (2, 3)
    assert g.num_joint_actions == 6


def test_single_objective_games_are_allowed(chicken):
    assert chicken.num_objectives == 1


def test_mixed_strategy_rejects_bad_distributions():
    with pytest.raises(ShapeMismatch):
        MixedStrategy(np.array([0.5, 0.6]))  # sums to 1.1, not renormalized
    with pytest.raises(ShapeMismatch):
        MixedStrategy(np.array([-0.1, 1.1]))
    with pytest.raises(ShapeMismatch):
        MixedStrategy(np.array([0.5, 0.5 + 1e-6]))  # outside the 1e-9 tolerance
    MixedStrategy(np.array([0.5, 0.5 + 1e-10]))  # inside tolerance is fine


def test_correlated_strategy_rejects_bad_distributions():
    with pytest.raises(ShapeMismatch):
        CorrelatedStrategy(np.array([[0.5, 0.5], [0.5, -0.5]]))
    with pytest.raises(ShapeMismatch):
        CorrelatedStrategy(np.full((2, 2), 0.3))


def test_strategy_modification_validation():
    with pytest.raises(ShapeMismatch):
        StrategyModification(player=0, mapping=(0, 3, 1))  # 3 out of range
    m = StrategyModification.swap(0, 3, recommended=0, response=2)
    assert m.mapping == (2, 1, 2)
    assert m.apply(0) == 2


# ---------------------------------------------------------------------------
# Utility evaluation
# ---------------------------------------------------------------------------

U1 = PolySumUtility(weights=(1.0, 1.0), exponents=(2, 2))
U2 = ProductUtility()


def test_utility_eval_worked_examples():
    assert utility_eval(U1, [3.0, 1.0]) == pytest.approx(10.0, abs=1e-12)
    assert utility_eval(U2, [3.5, 0.5]) == pytest.approx(1.75, abs=1e-12)
    assert utility_eval(LinearUtility((0.5, 0.5)), [4.0, 0.0]) == pytest.approx(2.0)
    thr = ThresholdUtility(objective=0, threshold=2.0, reward=5.0)
    assert utility_eval(thr, [1.9, 7.0]) == 0.0
    assert utility_eval(thr, [2.0, 7.0]) == 5.0


def test_nonneg_guard_zeroes_negative_payoffs():
    assert utility_eval(U1, [-0.5, 3.0]) == 0.0
    assert utility_eval(U2, [-1.0, -1.0]) == 0.0
    unguarded = PolySumUtility(weights=(1.0, 1.0), exponents=(2, 2), nonneg_guard=False)
    assert utility_eval(unguarded, [-0.5, 3.0]) == pytest.approx(9.25)


def test_utility_eval_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        utility_eval(U1, [1.0, 2.0, 3.0])
    with pytest.raises(DimensionMismatch):
        utility_eval(LinearUtility((1.0,)), [1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        utility_eval(ThresholdUtility(objective=2, threshold=0.0, reward=1.0), [1.0, 2.0])


def test_linear_weights_must_be_a_distribution():
    with pytest.raises(DimensionMismatch):
        LinearUtility((0.5, 0.6))
    with pytest.raises(DimensionMismatch):
        LinearUtility((-0.5, 1.5))


def test_utility_values_matches_scalar_eval():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-2.0, 4.0, size=(50, 2))
    for u in (U1, U2, LinearUtility((0.3, 0.7)),
              ThresholdUtility(objective=1, threshold=1.0, reward=2.0)):
        batch = utility_values(u, pts)
        for row, val in zip(pts, batch):
            assert val == pytest.approx(utility_eval(u, row), abs=0.0)


def test_utility_grad_examples():
    np.testing.assert_allclose(utility_grad(U1, [3.0, 1.0]), [6.0, 2.0])
    np.testing.assert_allclose(utility_grad(U2, [2.0, 2.0]), [2.0, 2.0])
    np.testing.assert_allclose(
        utility_grad(LinearUtility((0.25, 0.75)), [9.0, -4.0]), [0.25, 0.75]
    )
    np.testing.assert_allclose(utility_grad(U1, [-1.0, 1.0]), [0.0, 0.0])
    with pytest.raises(NonDifferentiable):
        utility_grad(ThresholdUtility(objective=0, threshold=1.0, reward=1.0), [2.0, 0.0])


def _random_linear(rng):
    w = rng.uniform(0.1, 1.0, 2)
    return LinearUtility(tuple(w / w.sum()))


def _random_polysum(rng):
    return PolySumUtility(
        weights=tuple(rng.uniform(-2, 2, 2)),
        exponents=tuple(int(e) for e in rng.integers(1, 5, 2)),
    )


@pytest.mark.parametrize(
    "make",
    [_random_linear, _random_polysum, lambda rng: ProductUtility()],
    ids=["linear", "polysum", "product"],
)
def test_gradients_match_finite_differences(make):
    # 1,000 random strictly positive points per variant, relative error 1e-4.
    rng = np.random.default_rng(11)
    for _ in range(50):
        u = make(rng)
        for _ in range(20):
            p = rng.uniform(0.1, 5.0, size=2)
            analytic = utility_grad(u, p)
            numeric = finite_difference_grad(lambda x: utility_eval(u, x), p, h=1e-5)
            scale = max(1e-12, float(np.max(np.abs(numeric))))
            assert float(np.max(np.abs(analytic - numeric))) / scale < 1e-4


# ---------------------------------------------------------------------------
# Expected payoffs
# ---------------------------------------------------------------------------


def test_expected_payoff_profile_worked_example(imbalancing, mixed_profile):
    np.testing.assert_array_equal(
        expected_payoff_profile(imbalancing, mixed_profile, 0), [2.0, 2.0]
    )


def test_expected_payoff_pure_profile_equals_table_entry():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = random_game(rng)
        actions = tuple(int(rng.integers(k)) for k in g.action_counts)
        prof = StrategyProfile.pure(g.action_counts, actions)
        for i in range(2):
            np.testing.assert_array_equal(
                expected_payoff_profile(g, prof, i), g.payoff(actions, i)
            )


def test_chicken_mixed_nash_expected_payoff(chicken):
    prof = StrategyProfile.from_probs([[2 / 3, 1 / 3], [2 / 3, 1 / 3]])
    for i in range(2):
        got = expected_payoff_profile(chicken, prof, i)
        np.testing.assert_allclose(got, [14.0 / 3.0], atol=1e-12)


def test_expected_payoff_correlated_worked_examples(chicken, chicken_ce, game3, game3_ce):
    np.testing.assert_allclose(
        expected_payoff_correlated(chicken, chicken_ce, 0), [5.25], atol=1e-12
    )
    np.testing.assert_allclose(
        expected_payoff_correlated(game3, game3_ce, 0), [3.5, 1.5], atol=1e-12
    )


def test_expected_payoff_correlated_point_mass(game3):
    probs = np.zeros((3, 3))
    probs[1, 2] = 1.0
    sigma = CorrelatedStrategy(probs)
    for i in range(2):
        np.testing.assert_array_equal(
            expected_payoff_correlated(game3, sigma, i), game3.payoff((1, 2), i)
        )


def test_expected_payoff_modified(game3, game3_ce, chicken, chicken_ce, imbalancing, imbalancing_ce):
    identity = StrategyModification.identity(0, 3)
    np.testing.assert_array_equal(
        expected_payoff_modified(game3, game3_ce, identity),
        expected_payoff_correlated(game3, game3_ce, 0),
    )
    # Row remaps everything to M: 0.5 * p(M, L) + 0.5 * p(M, M).
    to_m = StrategyModification(player=0, mapping=(1, 1, 1))
    np.testing.assert_allclose(
        expected_payoff_modified(game3, game3_ce, to_m), [3.0, 1.5], atol=1e-12
    )
    # Row always plays D against the Chicken CE:
    # 0.5 * p(D,S) + 0.25 * p(D,D) + 0.25 * p(D,S) = 0.5*7 + 0.25*0 + 0.25*7.
    always_d = StrategyModification(player=0, mapping=(1, 1))
    np.testing.assert_allclose(
        expected_payoff_modified(chicken, chicken_ce, always_d), [5.25], atol=1e-12
    )


def test_conditional_expected_payoff_worked_examples(imbalancing, imbalancing_ce):
    np.testing.assert_allclose(
        conditional_expected_payoff(imbalancing, imbalancing_ce, 0, 0, 0),
        [3.0, 1.0],
        atol=1e-12,
    )
    np.testing.assert_allclose(
        conditional_expected_payoff(imbalancing, imbalancing_ce, 1, 1, 2),
        [1.5, 2.5],
        atol=1e-12,
    )


def test_conditional_expected_payoff_point_mass(game3):
    probs = np.zeros((3, 3))
    probs[2, 1] = 1.0
    sigma = CorrelatedStrategy(probs)
    np.testing.assert_array_equal(
        conditional_expected_payoff(game3, sigma, 0, 2, 0), game3.payoff((0, 1), 0)
    )


def test_conditional_expected_payoff_zero_marginal(imbalancing, imbalancing_ce):
    with pytest.raises(ZeroMarginal):
        conditional_expected_payoff(imbalancing, imbalancing_ce, 0, 1, 1)


def test_esr_value_worked_examples(imbalancing, mixed_profile):
    assert esr_value(imbalancing, mixed_profile, 0, U1) == pytest.approx(10.0, abs=1e-12)
    assert esr_value(imbalancing, mixed_profile, 1, U2) == pytest.approx(3.0, abs=1e-12)


def test_esr_value_pure_profile(game3):
    prof = StrategyProfile.pure((3, 3), (0, 0))
    assert esr_value(game3, prof, 0, U1) == utility_eval(U1, game3.payoff((0, 0), 0))


# ---------------------------------------------------------------------------
# Cross-operation invariants
# ---------------------------------------------------------------------------


def test_product_marginals_match_independent_expectation():
    rng = np.random.default_rng(17)
    for _ in range(30):
        g = random_game(rng)
        prof = random_profile(rng, g.action_counts)
        sigma = CorrelatedStrategy.from_profile(prof)
        for i in range(2):
            np.testing.assert_allclose(
                expected_payoff_correlated(g, sigma, i),
                expected_payoff_profile(g, prof, i),
                atol=1e-12,
            )


def test_linear_utility_makes_esr_equal_ser():
    rng = np.random.default_rng(23)
    for _ in range(50):
        g = random_game(rng)
        prof = random_profile(rng, g.action_counts)
        w = rng.uniform(0.05, 1.0, 2)
        u = LinearUtility(tuple(w / w.sum()))
        for i in range(2):
            ser = utility_eval(u, expected_payoff_profile(g, prof, i))
            assert esr_value(g, prof, i, u) == pytest.approx(ser, abs=1e-9)


def test_law_of_total_expectation():
    rng = np.random.default_rng(29)
    for _ in range(20):
        g = random_game(rng)
        raw = rng.uniform(0.0, 1.0, size=g.action_counts)
        sigma = CorrelatedStrategy(raw / raw.sum())
        for i in range(2):
            marginal = sigma.marginal(i)
            total = np.zeros(g.num_objectives)
            for rec in range(g.action_counts[i]):
                if marginal[rec] > 0.0:
                    total += marginal[rec] * conditional_expected_payoff(
                        g, sigma, i, rec, rec
                    )
            np.testing.assert_allclose(
                total, expected_payoff_correlated(g, sigma, i), atol=1e-12
            )
