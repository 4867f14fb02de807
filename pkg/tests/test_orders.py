from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from helpers import random_stationary_m3
from ordpat.errors import ConstraintViolation, NonStationaryInput, SizeLimit
from ordpat.orders import (
    PatternMeasure,
    check_consistency,
    check_stationarity,
    coin_tossing_measure,
    extend_to,
    histogram,
    interval_of,
    interval_rank,
    markov_extension,
    parse_measure,
    point_mass,
    restrict,
    serialize_measure,
    uniform_measure,
)
from ordpat.patterns import Pattern, ranks_from_lex

COIN_M3 = (
    Fraction(1, 4),
    Fraction(1, 8),
    Fraction(1, 8),
    Fraction(1, 8),
    Fraction(1, 8),
    Fraction(1, 4),
)


class TestIntervals:
    def test_length_two(self):
        i12 = interval_of((1, 2))
        assert (i12.left, i12.right) == (Fraction(0), Fraction(1, 2))
        i21 = interval_of((2, 1))
        assert (i21.left, i21.right) == (Fraction(1, 2), Fraction(1))

    def test_known_codes(self):
        i231 = interval_of((2, 3, 1))
        assert (i231.left, i231.right) == (Fraction(1, 3), Fraction(1, 2))
        i312 = interval_of((3, 1, 2))
        assert (i312.left, i312.right) == (Fraction(4, 6), Fraction(5, 6))

    def test_numeric_window_accepted(self):
        assert interval_of((0.0, 6.0, -2.0)) == interval_of((2, 3, 1))
        assert interval_of(Pattern((2, 3, 1))) == interval_of((2, 3, 1))

    def test_prefix_coding_nested(self):
        i12 = interval_of((1, 2))
        i123 = interval_of((1, 2, 3))
        i132 = interval_of((1, 3, 2))
        i231 = interval_of((2, 3, 1))
        assert (i123.left, i123.right) == (Fraction(0), Fraction(1, 6))
        assert (i132.left, i132.right) == (Fraction(1, 6), Fraction(2, 6))
        assert (i231.left, i231.right) == (Fraction(2, 6), Fraction(3, 6))
        for sub in (i123, i132, i231):
            assert i12.left <= sub.left and sub.right <= i12.right

    @pytest.mark.parametrize("m", range(2, 8))
    def test_tiling(self, m):
        lefts = sorted(
            interval_of(ranks_from_lex(m, i)).left for i in range(factorial(m))
        )
        assert lefts == [Fraction(i, factorial(m)) for i in range(factorial(m))]

    def test_nesting_along_prefixes(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            ranks = tuple(int(r) + 1 for r in rng.permutation(6))
            outer = interval_of(ranks[:2])
            for k in range(3, 7):
                inner = interval_of(ranks[:k])
                assert outer.left <= inner.left and inner.right <= outer.right
                outer = inner

    def test_contains_endpoint_convention(self):
        i12 = interval_of((1, 2))
        assert i12.contains(Fraction(0))
        assert not i12.contains(Fraction(1, 2))  # half-open on the right
        i21 = interval_of((2, 1))
        assert i21.contains(Fraction(1, 2))
        assert i21.contains(1)  # last interval closed at 1


class TestHistogram:
    def test_uniform_is_flat(self):
        h = histogram(uniform_measure(3))
        assert set(h.heights) == {Fraction(1)}
        assert h.integral() == 1

    def test_coin_heights_in_interval_order(self):
        h = histogram(PatternMeasure(3, COIN_M3))
        expected = tuple(
            Fraction(x, 4) for x in (6, 3, 3, 3, 3, 6)
        )
        assert h.heights == expected

    def test_point_mass(self):
        h = histogram(point_mass((1, 2, 3)))
        assert h(Fraction(1, 12)) == 6
        assert h(Fraction(1, 2)) == 0
        assert h.integral() == 1

    def test_evaluation_matches_interval(self):
        measure = coin_tossing_measure(3)
        h = histogram(measure)
        for idx in range(6):
            ranks = ranks_from_lex(3, idx)
            mid = interval_of(ranks).left + Fraction(1, 12)
            assert h(mid) == 6 * measure.probs[idx]

    def test_martingale_property(self):
        p3 = coin_tossing_measure(3)
        p4 = coin_tossing_measure(4)
        f3, f4 = histogram(p3), histogram(p4)
        for idx in range(6):
            interval = interval_of(ranks_from_lex(3, idx))
            assert f4.integral_over(interval) == f3.integral_over(interval)

    def test_martingale_on_random_extension(self):
        rng = np.random.default_rng(1)
        p3 = random_stationary_m3(rng)
        p4 = markov_extension(p3)
        f3, f4 = histogram(p3), histogram(p4)
        for idx in range(6):
            interval = interval_of(ranks_from_lex(3, idx))
            assert f4.integral_over(interval) == f3.integral_over(interval)

    def test_interval_rank_roundtrip(self):
        ordering = sorted(range(6), key=lambda i: interval_of(ranks_from_lex(3, i)).left)
        for pos, idx in enumerate(ordering):
            assert interval_rank(ranks_from_lex(3, idx)) == pos


class TestRestrict:
    def test_coin_first_two(self):
        marg = restrict(coin_tossing_measure(3), (0, 1))
        assert marg.probs == (Fraction(1, 2), Fraction(1, 2))

    def test_identity_on_all_positions(self):
        p = coin_tossing_measure(4)
        assert restrict(p, range(4)).probs == p.probs

    def test_point_mass_last_two(self):
        marg = restrict(point_mass((3, 2, 1)), (1, 2))
        assert marg.probs == (Fraction(0), Fraction(1))  # pattern 21

    def test_bad_positions(self):
        with pytest.raises(ValueError):
            restrict(uniform_measure(3), (0, 5))
        with pytest.raises(ValueError):
            restrict(uniform_measure(3), ())


class TestChecks:
    def test_coin_tower_consistent(self):
        for m in (2, 3, 4, 5):
            res = check_consistency(coin_tossing_measure(m), coin_tossing_measure(m + 1))
            assert res.ok and res.max_violation == 0

    def test_uniform_tower_consistent(self):
        assert check_consistency(uniform_measure(3), uniform_measure(4)).ok

    def test_inconsistent_pair(self):
        res = check_consistency(uniform_measure(3), point_mass((1, 2, 3, 4)))
        assert not res.ok
        assert res.max_violation == Fraction(5, 6)

    def test_wrong_sizes(self):
        with pytest.raises(ValueError):
            check_consistency(uniform_measure(3), uniform_measure(5))

    @pytest.mark.parametrize("m", range(2, 8))
    def test_coin_measure_stationary(self, m):
        res = check_stationarity(coin_tossing_measure(m))
        assert res.ok and res.max_violation == 0

    def test_uniform_stationary(self):
        assert check_stationarity(uniform_measure(5)).ok

    def test_point_mass_not_stationary(self):
        res = check_stationarity(point_mass((1, 3, 2)))
        assert not res.ok
        assert res.max_violation == 1  # law of 12 at positions 1-2 vs 2-3


class TestMarkovExtension:
    def test_uniform_pair_law_gives_coin_three(self):
        p3 = markov_extension(uniform_measure(2))
        assert p3.probs == COIN_M3

    def test_coin_three_extends_to_coin_four(self):
        assert markov_extension(coin_tossing_measure(3)).probs == coin_tossing_measure(4).probs

    def test_random_walk_law_extends_cleanly(self):
        p3 = PatternMeasure(3, COIN_M3)  # the random-walk length-3 law
        p4 = markov_extension(p3)
        assert check_consistency(p3, p4).max_violation == 0
        assert check_stationarity(p4).max_violation == 0

    def test_non_stationary_rejected(self):
        with pytest.raises(NonStationaryInput):
            markov_extension(point_mass((1, 3, 2)))

    def test_zero_over_zero_is_zero(self):
        p4 = markov_extension(point_mass((1, 2, 3)))
        assert p4.probs[0] == 1  # stays concentrated on the increasing pattern
        assert sum(p4.probs) == 1

    def test_half_split_shares_between_twins(self):
        p4 = markov_extension(coin_tossing_measure(3))
        # 3124 and 4123 are indistinguishable by the formula; both get 1/32
        from ordpat.patterns import lex_index

        assert p4.probs[lex_index((3, 1, 2, 4))] == Fraction(1, 32)
        assert p4.probs[lex_index((4, 1, 2, 3))] == Fraction(1, 32)

    def test_extend_to_reproduces_coin_tower(self):
        p5 = extend_to(uniform_measure(2), 5)
        assert p5.probs == coin_tossing_measure(5).probs

    def test_extend_to_limits(self):
        with pytest.raises(SizeLimit):
            extend_to(uniform_measure(2), 9)
        with pytest.raises(ValueError):
            extend_to(uniform_measure(3), 2)

    def test_random_stationary_inputs_extend_exactly(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            p3 = random_stationary_m3(rng)
            assert p3.full_support()
            p4 = markov_extension(p3)
            assert check_consistency(p3, p4).max_violation == 0
            assert check_stationarity(p4).max_violation == 0
            assert sum(p4.probs) == 1

    def test_normalization_exact_through_tower(self):
        rng = np.random.default_rng(3)
        p = random_stationary_m3(rng)
        tower = extend_to(p, 6)
        assert sum(tower.probs) == 1
        assert tower.m == 6


class TestMeasureType:
    def test_sum_must_be_one(self):
        with pytest.raises(ConstraintViolation):
            PatternMeasure(2, (Fraction(1, 2), Fraction(1, 3)))

    def test_negative_rejected(self):
        with pytest.raises(ConstraintViolation):
            PatternMeasure(2, (Fraction(3, 2), Fraction(-1, 2)))

    def test_floats_converted_exactly(self):
        p = PatternMeasure(2, (0.5, 0.5))
        assert p.probs == (Fraction(1, 2), Fraction(1, 2))

    def test_prob_lookup(self):
        p = coin_tossing_measure(3)
        assert p.prob((1, 2, 3)) == Fraction(1, 4)
        assert p.prob(Pattern((2, 3, 1))) == Fraction(1, 8)
        assert p.prob((0.1, 5.0, 0.7)) == Fraction(1, 8)  # window showing 132

    def test_wrong_pattern_length(self):
        with pytest.raises(ValueError):
            coin_tossing_measure(3).prob((1, 2))


class TestSerialization:
    def test_round_trip(self):
        p = coin_tossing_measure(4)
        text = serialize_measure(p)
        assert text.startswith("pattern-measure-v1; 4; 0:1/8")
        assert parse_measure(text).probs == p.probs

    def test_zeros_omitted(self):
        text = serialize_measure(point_mass((1, 2, 3)))
        assert text == "pattern-measure-v1; 3; 0:1/1"
        assert parse_measure(text).probs[0] == 1

    def test_version_enforced(self):
        with pytest.raises(ValueError):
            parse_measure("pattern-measure-v2; 3; 0:1/1")
