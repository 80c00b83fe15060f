"""Core response-function, likelihood and sufficient-statistic tests."""

import math

import numpy as np
import pytest

from irtaudit.errors import BoundaryScoreError, ValidationError
from irtaudit.model import (
    Item,
    ItemBank,
    ModelKind,
    QuadratureGrid,
    ResponseMatrix,
    accumulated_discrimination,
    g_inverse,
    g_of_theta,
    icc_prob,
    log_likelihood,
    log_likelihood_curve,
)

TWO_PL = ModelKind.two_pl()
THREE_PL = ModelKind.three_pl()


def random_bank(rng, n_items, model=TWO_PL):
    a = rng.uniform(0.5, 2.0, n_items)
    b = rng.uniform(-2.0, 2.0, n_items)
    return ItemBank.from_arrays(model, a, b)


class TestIccProb:
    def test_half_at_difficulty(self):
        """At theta = b the guessing-free logistic is exactly 1/2 for any slope."""
        for a in (0.3, 1.0, 2.7):
            assert icc_prob(0.8, Item(a, 0.8), TWO_PL) == pytest.approx(0.5, abs=1e-15)

    def test_lower_asymptote(self):
        p = icc_prob(-50.0, Item(1.0, 0.0, 0.2), THREE_PL)
        assert abs(p - 0.2) < 1e-15

    def test_value_against_high_precision(self):
        # 1/(1+e^-2) evaluated at 40 decimal digits: 0.8807970779778824440...
        p = icc_prob(1.0, Item(2.0, 0.0), TWO_PL)
        assert p == pytest.approx(0.8807970779778823, abs=1e-15)

    def test_strictly_increasing_on_fine_grid(self):
        thetas = np.linspace(-8, 8, 1000)
        rng = np.random.default_rng(7)
        for _ in range(5):
            item = Item(rng.uniform(0.3, 2.5), rng.uniform(-2, 2), rng.uniform(0, 0.3))
            p = icc_prob(thetas, item, THREE_PL)
            assert np.all(np.diff(p) > 0)

    def test_asymptotes(self):
        for a, b, c in [(0.5, -1.0, 0.0), (2.0, 1.5, 0.25)]:
            item = Item(a, b, c)
            model = THREE_PL if c else TWO_PL
            assert abs(icc_prob(b - 60.0 / a, item, model) - c) < 1e-9
            assert abs(icc_prob(b + 60.0 / a, item, model) - 1.0) < 1e-9

    def test_no_overflow_far_out(self):
        # |a*(theta-b)| = 700: must stay finite, inside [0, 1]
        item = Item(7.0, 0.0)
        lo = icc_prob(-100.0, item, TWO_PL)
        hi = icc_prob(100.0, item, TWO_PL)
        assert 0.0 < lo < 1e-300
        assert hi == 1.0

    def test_guessing_requires_3pl(self):
        with pytest.raises(ValidationError):
            icc_prob(0.0, Item(1.0, 0.0, 0.1), TWO_PL)


class TestLogLikelihood:
    def test_single_item_at_difficulty(self):
        bank = ItemBank.from_arrays(TWO_PL, [1.3], [0.4])
        assert log_likelihood([1], 0.4, bank) == pytest.approx(math.log(0.5), abs=1e-15)

    def test_complement_symmetry(self):
        # 1 - P(theta, a, b) = P(-theta, a, -b), so flipping responses,
        # difficulties and ability together leaves the likelihood unchanged.
        rng = np.random.default_rng(11)
        bank = random_bank(rng, 6)
        mirrored = ItemBank.from_arrays(TWO_PL, bank.a, -bank.b)
        u = rng.integers(0, 2, 6)
        theta = 0.7
        assert log_likelihood(u, theta, bank) == pytest.approx(
            log_likelihood(1 - u, -theta, mirrored), abs=1e-12
        )

    def test_matches_per_item_summation_oracle(self):
        bank = ItemBank.from_arrays(TWO_PL, [0.8, 1.5, 2.0], [-1.0, 0.2, 1.4])
        u = [1, 0, 1]
        theta = 0.3
        expected = 0.0
        for item, resp in zip(bank.items, u):
            p = 1.0 / (1.0 + math.exp(-item.a * (theta - item.b)))
            expected += math.log(p) if resp else math.log(1.0 - p)
        assert log_likelihood(u, theta, bank) == pytest.approx(expected, abs=1e-12)

    def test_additive_over_concatenated_banks(self):
        rng = np.random.default_rng(3)
        b1, b2 = random_bank(rng, 4), random_bank(rng, 3)
        joint = ItemBank(TWO_PL, b1.items + b2.items)
        u1, u2 = rng.integers(0, 2, 4), rng.integers(0, 2, 3)
        theta = -0.9
        assert log_likelihood(np.concatenate([u1, u2]), theta, joint) == pytest.approx(
            log_likelihood(u1, theta, b1) + log_likelihood(u2, theta, b2), abs=1e-12
        )

    def test_finite_at_extreme_ability(self):
        bank = random_bank(np.random.default_rng(5), 10)
        for theta in (-60.0, 60.0):
            ll = log_likelihood_curve(np.zeros(10, dtype=int), bank, [theta])
            assert np.isfinite(ll).all()

    def test_length_mismatch_rejected(self):
        bank = random_bank(np.random.default_rng(0), 4)
        with pytest.raises(ValidationError):
            log_likelihood([1, 0], 0.0, bank)


class TestAccumulatedDiscrimination:
    def test_all_incorrect_is_zero(self):
        bank = random_bank(np.random.default_rng(1), 5)
        assert accumulated_discrimination(np.zeros(5, dtype=int), bank) == 0.0

    def test_all_correct_is_total(self):
        bank = random_bank(np.random.default_rng(2), 5)
        total = accumulated_discrimination(np.ones(5, dtype=int), bank)
        assert total == pytest.approx(bank.sum_a, abs=1e-12)

    def test_hand_summation(self):
        bank = ItemBank.from_arrays(TWO_PL, [0.5, 1.2, 2.0], [0.0, 0.0, 0.0])
        assert accumulated_discrimination([1, 0, 1], bank) == pytest.approx(2.5, abs=1e-15)


class TestG:
    def test_single_item_midpoint(self):
        bank = ItemBank.from_arrays(TWO_PL, [1.0], [0.0])
        assert g_of_theta(0.0, bank) == pytest.approx(0.5, abs=1e-15)

    def test_symmetric_pair(self):
        bank = ItemBank.from_arrays(TWO_PL, [1.0, 1.0], [-1.0, 1.0])
        assert g_of_theta(0.0, bank) == pytest.approx(1.0, abs=1e-15)

    def test_matches_term_summation_oracle(self):
        bank = ItemBank.from_arrays(
            TWO_PL, [0.6, 0.9, 1.3, 1.7, 2.0], [-1.5, -0.5, 0.0, 0.8, 1.9]
        )
        theta = 0.4
        expected = sum(
            item.a / (1.0 + math.exp(-item.a * (theta - item.b))) for item in bank.items
        )
        assert g_of_theta(theta, bank) == pytest.approx(expected, abs=1e-12)

    def test_strictly_increasing(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            bank = random_bank(rng, 8)
            vals = [g_of_theta(t, bank) for t in np.linspace(-8, 8, 200)]
            assert np.all(np.diff(vals) > 0)

    def test_rejects_guessing_banks(self):
        bank = ItemBank.from_arrays(THREE_PL, [1.0], [0.0], [0.2])
        with pytest.raises(ValidationError):
            g_of_theta(0.0, bank)
        with pytest.raises(ValidationError):
            g_inverse(0.5, bank)


class TestGInverse:
    def test_single_item_center(self):
        bank = ItemBank.from_arrays(TWO_PL, [1.0], [0.0])
        assert g_inverse(0.5, bank) == pytest.approx(0.0, abs=1e-10)

    def test_roundtrip(self):
        bank = random_bank(np.random.default_rng(13), 7)
        assert g_inverse(g_of_theta(1.3, bank), bank) == pytest.approx(1.3, abs=1e-10)

    def test_symmetric_bank_center(self):
        bank = ItemBank.from_arrays(TWO_PL, [1.0, 1.0], [-1.0, 1.0])
        assert g_inverse(1.0, bank) == pytest.approx(0.0, abs=1e-10)

    def test_boundary_errors(self):
        bank = random_bank(np.random.default_rng(17), 4)
        with pytest.raises(BoundaryScoreError) as err:
            g_inverse(0.0, bank)
        assert err.value.code == "zero_score"
        with pytest.raises(BoundaryScoreError) as err:
            g_inverse(bank.sum_a, bank)
        assert err.value.code == "perfect_score"

    def test_roundtrip_random_cases(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            bank = random_bank(rng, int(rng.integers(1, 20)))
            theta = rng.uniform(-3, 3)
            back = g_inverse(g_of_theta(theta, bank), bank)
            assert abs(back - theta) < 1e-8


class TestDomainTypes:
    def test_item_invariants(self):
        with pytest.raises(ValidationError):
            Item(0.0, 0.0)
        with pytest.raises(ValidationError):
            Item(-1.0, 0.0)
        with pytest.raises(ValidationError):
            Item(1.0, 0.0, 1.0)
        with pytest.raises(ValidationError):
            Item(1.0, math.inf)

    def test_bank_model_consistency(self):
        with pytest.raises(ValidationError):
            ItemBank.from_arrays(ModelKind.one_pl(), [1.2], [0.0])
        with pytest.raises(ValidationError):
            ItemBank.from_arrays(ModelKind.rasch(1.5), [1.0], [0.0])
        with pytest.raises(ValidationError):
            ItemBank.from_arrays(TWO_PL, [1.0], [0.0], [0.1])
        ItemBank.from_arrays(ModelKind.rasch(1.5), [1.5, 1.5], [0.0, 1.0])

    def test_rasch_requires_positive_common_discrimination(self):
        with pytest.raises(ValidationError):
            ModelKind.rasch(0.0)

    def test_bank_subset_keeps_labels(self):
        bank = ItemBank.from_arrays(TWO_PL, [1.0, 1.5, 0.7], [0, 1, 2])
        sub = bank.subset([2, 0])
        assert sub.labels == ("item_3", "item_1")
        assert sub.items[0].b == 2.0

    def test_grid_invariants(self):
        with pytest.raises(ValidationError):
            QuadratureGrid(np.array([0.0, 0.0]), np.array([0.5, 0.5]))
        with pytest.raises(ValidationError):
            QuadratureGrid(np.array([0.0, 1.0]), np.array([0.6, 0.6]))
        grid = QuadratureGrid.standard_normal()
        assert grid.n_points == 61
        assert grid.nodes[0] == -4.0 and grid.nodes[-1] == 4.0
        assert abs(grid.weights.sum() - 1.0) <= 1e-12
        assert np.all(np.diff(grid.nodes) > 0)

    def test_response_matrix_validation(self):
        with pytest.raises(ValidationError):
            ResponseMatrix(("a", "b"), np.array([[0, 2], [1, 0]]))
        with pytest.raises(ValidationError):
            ResponseMatrix(("a", "a"), np.array([[0, 1], [1, 0]]))
        m = ResponseMatrix(("a", "b"), np.array([[0, 1], [1, 1]]))
        assert m.counts().tolist() == [1, 2]
        assert m.select_items([1]).values.tolist() == [[1], [1]]
