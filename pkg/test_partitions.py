import math
import random
from fractions import Fraction

import pytest
from mpmath import mp

from services.partitions import (
    Partition,
    cycle_type_census,
    derangement_census,
    derangement_count,
    gamma,
    gamma_ratio,
    long_cycle_census,
    long_cycle_prob,
    no_odd_census,
    odd_cycle_census,
    partition_count_P,
    partitions_P,
    split_bound,
    split_bound_sweep,
    split_set,
    split_sum_exact,
    wilf_no_odd,
)


def P(text):
    return Partition.parse(text)


class TestPartition:
    def test_parse_and_str(self):
        lam = P('3^1 2^1')
        assert lam.m == 5
        assert lam.parts == (3, 2)
        assert str(lam) == '2^1 3^1'
        assert P('5') == Partition.from_parts([5])

    def test_bad_partition(self):
        with pytest.raises(ValueError):
            Partition(5, ((2, 1),))
        with pytest.raises(ValueError):
            P('2^x')

    def test_partitions_P(self):
        assert [p.parts for p in partitions_P(2)] == [(2,)]
        assert [p.parts for p in partitions_P(6)] == [(6,), (4, 2), (3, 3), (2, 2, 2)]
        assert list(partitions_P(1)) == []

    @pytest.mark.parametrize('m', range(0, 25))
    def test_partition_count_P(self, m):
        assert sum(1 for _ in partitions_P(m)) == partition_count_P(m)

    def test_partition_count_twelve(self):
        assert partition_count_P(12) == 21


class TestGamma:
    def test_values(self):
        assert gamma(P('5')) == 24
        assert gamma(P('3^1 2^1')) == 20
        assert gamma(P('2^3')) == 15

    def test_rejects_fixed_points(self):
        with pytest.raises(ValueError, match='part of size 1'):
            gamma(P('1^1 2^1'))

    @pytest.mark.parametrize('m', range(2, 15))
    def test_sums_to_derangements(self, m):
        assert sum(gamma(lam) for lam in partitions_P(m)) == derangement_count(m)

    @pytest.mark.parametrize('m', range(2, 9))
    def test_matches_census(self, m):
        census = derangement_census(m)
        assert set(census) == set(partitions_P(m))
        for lam, count in census.items():
            assert gamma(lam) == count

    def test_census_order_five(self):
        assert derangement_census(5) == {P('5'): 24, P('3^1 2^1'): 20}
        assert derangement_census(2) == {P('2'): 1}

    def test_census_guard(self):
        with pytest.raises(ValueError, match='size guard'):
            cycle_type_census(10)

    def test_census_with_workers(self):
        assert cycle_type_census(6, workers=2) == cycle_type_census(6)

    @pytest.mark.slow
    def test_matches_census_order_nine(self):
        for lam, count in derangement_census(9).items():
            assert gamma(lam) == count


class TestLongCycles:
    def test_order_four(self):
        assert long_cycle_prob(4) == Fraction(7, 12)
        assert long_cycle_census(4) == Fraction(7, 12)

    def test_order_eight(self):
        assert long_cycle_prob(8) == Fraction(73, 168)

    @pytest.mark.parametrize('n', range(4, 9))
    def test_matches_brute_force(self, n):
        assert long_cycle_prob(n) == long_cycle_census(n)

    @pytest.mark.slow
    def test_matches_brute_force_order_nine(self):
        assert long_cycle_prob(9) == long_cycle_census(9)

    def test_log_base(self):
        # 8 - log2(8) = 5
        assert long_cycle_prob(8, '2') == Fraction(1, 5) + Fraction(73, 168)
        assert long_cycle_prob(8, 2) == long_cycle_census(8, 2)

    def test_precondition(self):
        with pytest.raises(ValueError, match='n/2'):
            long_cycle_prob(2, '2')


class TestOddCycles:
    @pytest.mark.parametrize('n, expected', [(2, Fraction(1, 2)), (4, Fraction(3, 8))])
    def test_wilf_values(self, n, expected):
        assert wilf_no_odd(n) == expected

    @pytest.mark.parametrize('n', [2, 4, 6, 8])
    def test_wilf_matches_brute_force(self, n):
        assert wilf_no_odd(n) == no_odd_census(n)

    def test_wilf_odd_order(self):
        assert wilf_no_odd(7) == 0

    def test_odd_cycle_census(self):
        assert odd_cycle_census(3).histogram == {1: 2}
        assert odd_cycle_census(4).histogram == {0: 9}
        census = odd_cycle_census(4, derangements_only=False)
        assert census.total == 24
        assert census.histogram[0] == 9

    @pytest.mark.parametrize('m', range(2, 9))
    def test_odd_cycle_parity(self, m):
        for count in odd_cycle_census(m, derangements_only=False).histogram:
            assert count % 2 == m % 2

    def test_at_most_one_fraction(self):
        # derangements of 6: 120 six-cycles, 90 of type 4+2, 15 of type 2+2+2, 40 of type 3+3
        census = odd_cycle_census(6)
        assert census.histogram == {0: 225, 2: 40}
        assert census.at_most_one_fraction == Fraction(225, 265)
        assert census.bound_shape == pytest.approx(math.log(6) / math.sqrt(6))


class TestSplits:
    def test_single_split(self):
        lam = P('8^1 2^2')
        result = split_set(lam, 8)
        assert [(a, b) for a, b, _ in result] == [(3, 5)]
        assert [str(mu) for _, _, mu in result] == ['2^2 3^1 5^1']
        assert len(result) == result.w == 1

    def test_two_splits(self):
        result = split_set(P('12'), 12)
        assert [(a, b) for a, b, _ in result] == [(3, 9), (5, 7)]

    def test_equal_split_excluded(self):
        result = split_set(P('6'), 6)
        assert len(result) == 0
        assert (3, 3, 'equal split') in result.excluded
        assert any(a == 1 for a, _, _ in result.excluded)

    def test_rejects(self):
        with pytest.raises(ValueError, match='odd parts'):
            split_set(P('3^1 2^1'), 2)
        with pytest.raises(ValueError, match='no part of size'):
            split_set(P('4^1 2^1'), 8)
        with pytest.raises(ValueError, match='even'):
            split_set(P('4^1 2^1'), 3)

    def test_gamma_ratio(self):
        lam = P('8^1 2^2')
        assert gamma(lam) == 7484400
        assert gamma(P('5^1 3^1 2^2')) == 3991680
        assert gamma_ratio(lam, 8, 3) == Fraction(8, 15)
        assert gamma_ratio(P('12'), 12, 3) == Fraction(4, 9)
        assert gamma_ratio(P('8^2'), 8, 3) == 2 * gamma_ratio(P('8^1 2^4'), 8, 3)

    def test_equal_ratio_behind_flag(self):
        with pytest.raises(ValueError, match='equal split'):
            gamma_ratio(P('6'), 6, 3)
        assert gamma_ratio(P('6'), 6, 3, allow_equal=True) == Fraction(gamma(P('3^2')), gamma(P('6')))

    def test_ratio_matches_direct_quotient(self):
        rng = random.Random(3)
        even_parts = [lam for m in range(2, 41, 2) for lam in partitions_P(m)
                      if all(p % 2 == 0 for p in lam.parts)]
        for lam in rng.sample(even_parts, 300):
            for z, _ in lam.multiplicities:
                for a, _, mu in split_set(lam, z):
                    assert gamma_ratio(lam, z, a) == Fraction(gamma(mu), gamma(lam))

    def test_split_bound_ten(self):
        result = split_bound(10)
        assert result.w == 1
        assert float(result.sum) == pytest.approx(1 / 21)
        assert split_sum_exact(10) == Fraction(1, 21)
        assert result.holds
        assert str(result).endswith('PASS')

    @pytest.mark.parametrize('z', [12, 14, 30, 100, 1000])
    def test_prefix_sums_match_exact_sum(self, z):
        assert float(split_bound(z).sum) == pytest.approx(float(split_sum_exact(z)), rel=1e-12)

    def test_split_bound_guard(self):
        for z in (8, 11):
            with pytest.raises(ValueError):
                split_bound(z)

    def test_sweep(self):
        assert split_bound_sweep(2000) == []

    @pytest.mark.slow
    def test_sweep_full_range(self):
        assert split_bound_sweep(10_000) == []

    def test_order_of_growth(self):
        result = split_bound(10_000)
        assert result.holds
        assert float(result.sum * 10_000 / mp.log(10_000)) > 0.1
