import math

import pytest

import services.enumeration as enumeration
from services.enumeration import (
    LatinClass,
    ParityTally,
    alon_tarsi,
    check_size,
    class_relations,
    domain_census,
    enumerate_squares,
    evaluate,
    exact_event_fractions,
    invert_rows_bijection,
    prefixes,
    reduction_fibers,
    reference_enumerate,
    tally,
    verify_identities,
)
from services.latin_square import validate

REDUCED_COUNTS = {1: 1, 2: 1, 3: 1, 4: 4, 5: 56, 6: 9408}


class TestEnumerate:
    @pytest.mark.parametrize('n, count', sorted(REDUCED_COUNTS.items()))
    def test_reduced_counts(self, n, count):
        assert sum(1 for _ in enumerate_squares(n, LatinClass.REDUCED)) == count

    @pytest.mark.parametrize('n', [1, 2, 3, 4, 5])
    @pytest.mark.parametrize('klass', [LatinClass.REDUCED, LatinClass.NORMALISED_UNIPOTENT])
    def test_matches_reference(self, n, klass):
        assert list(enumerate_squares(n, klass)) == list(reference_enumerate(n, klass))

    @pytest.mark.slow
    def test_all_squares_order_five_match_reference(self):
        fast = sorted(sq.grid for sq in enumerate_squares(5, LatinClass.ALL))
        slow = sorted(sq.grid for sq in reference_enumerate(5, LatinClass.ALL))
        assert len(fast) == 161280
        assert fast == slow

    def test_all_squares_order_four(self):
        squares = list(enumerate_squares(4, LatinClass.ALL))
        assert len(squares) == 576
        assert squares == sorted(squares, key=lambda sq: sq.grid)
        assert squares == list(reference_enumerate(4, LatinClass.ALL))
        for sq in squares[:20]:
            validate(sq.grid)

    def test_class_membership(self):
        for sq in enumerate_squares(5, LatinClass.NORMALISED_UNIPOTENT):
            assert sq.is_normalised_unipotent()
        assert sum(1 for _ in enumerate_squares(5, LatinClass.NORMALISED_UNIPOTENT)) == 56

    def test_size_guards(self):
        with pytest.raises(ValueError, match='size guard'):
            check_size(6, 'all')
        with pytest.raises(ValueError, match='size guard'):
            list(enumerate_squares(8, LatinClass.REDUCED))
        with pytest.raises(ValueError):
            check_size(4, 'latin')

    def test_prefixes_cover_the_class(self):
        shards = prefixes(5, LatinClass.REDUCED)
        assert all(p[0] == (1, 2, 3, 4, 5) and p[1][0] == 2 for p in shards)
        assert len(set(shards)) == len(shards)

    @pytest.mark.slow
    def test_reduced_order_six_matches_reference(self):
        assert list(enumerate_squares(6, LatinClass.REDUCED)) == list(reference_enumerate(6, LatinClass.REDUCED))

    @pytest.mark.slow
    def test_reduced_order_seven(self):
        assert tally(7, LatinClass.REDUCED, workers=4).total == 16942080


class TestTally:
    def test_order_four(self):
        t = tally(4, LatinClass.REDUCED)
        assert t.total == 4
        assert t.counts['000'] == 4
        assert t.to_dict() == {'n': 4, 'class': 'reduced', 'counts': t.counts, 'total': 4}

    def test_small_orders(self):
        assert tally(2, 'reduced').counts['111'] == 1
        assert tally(3, 'reduced').counts['001'] == 1
        assert tally(3, 'normalised_unipotent').counts['010'] == 1

    def test_reduced_triples_stay_allowed(self):
        for n in (4, 5, 6):
            assert tally(n, LatinClass.REDUCED).outside_allowed() == {}

    def test_workers_do_not_change_the_result(self):
        assert tally(5, LatinClass.REDUCED, workers=2).counts == tally(5, LatinClass.REDUCED).counts

    def test_alon_tarsi(self):
        assert alon_tarsi(4, 'reduced') == 4
        assert alon_tarsi(4, 'all') == 576

    def test_property_count(self):
        t = ParityTally(5, 'reduced', {k: 0 for k in ('000', '001', '010', '011', '100', '101', '110', '111')})
        t.counts.update({'000': 3, '110': 2, '011': 1})
        assert t.property_count('ELS') == 5
        assert t.property_count('SOLS') == 1
        assert t.property_count('ROLS') == 2


class TestIdentities:
    def test_evaluate(self):
        t = tally(4, LatinClass.REDUCED)
        assert evaluate('R^000+R^110', {'R': t}) == 4
        assert evaluate('144*R^ELS', {'R': t}) == 576
        assert evaluate('0', {'R': t}) == 0
        with pytest.raises(ValueError):
            evaluate('R^0000', {'R': t})

    @pytest.mark.parametrize('n', [4, 5, 6])
    def test_table_holds(self, n):
        report = verify_identities(n)
        assert report.passed, report.lines()
        assert all(c.status == 'PASS' for c in report.checks if c.status != 'SKIP')

    def test_odd_order_skips_even_identity(self):
        report = verify_identities(5)
        assert [c.status for c in report.checks][-1] == 'SKIP'
        assert report.checks[-1].line().startswith('IDENTITY R^101 = R^110 : - - SKIP')

    def test_corrupted_tally_fails(self, monkeypatch):
        real = enumeration.tally

        def corrupted(n, klass, workers=1):
            result = real(n, klass, workers)
            if LatinClass(klass) is LatinClass.REDUCED:
                result.counts['011'] += 1
            return result

        monkeypatch.setattr(enumeration, 'tally', corrupted)
        report = verify_identities(4)
        assert not report.passed
        assert any('R^011' in c.lhs_expr or 'R^011' in c.rhs_expr for c in report.failures)

    def test_guard(self):
        with pytest.raises(ValueError, match='size guard'):
            verify_identities(7)

    def test_class_relations_order_four(self):
        report = class_relations(4)
        assert report.passed
        assert 'IDENTITY L^000 = 144*R^000 : 576 576 PASS' in report.lines()

    def test_class_relations_beyond_all_guard_skip(self):
        report = class_relations(6)
        assert report.passed
        assert any(c.status == 'SKIP' for c in report.checks)

    @pytest.mark.slow
    def test_class_relations_order_five(self):
        report = class_relations(5)
        assert report.passed
        assert tally(5, LatinClass.ALL).total == 161280


class TestExhaustiveChecks:
    def test_reduction_fibers_order_four(self):
        report = reduction_fibers(4)
        assert report.squares == 576
        assert len(report.fibers) == 4
        assert report.expected_fiber == 144
        assert report.passed

    @pytest.mark.slow
    def test_reduction_fibers_order_five(self):
        report = reduction_fibers(5)
        assert report.expected_fiber == 2880
        assert report.passed

    def test_domain_census(self):
        census = domain_census(5)
        assert census.reduced == 56
        assert census.involution_domain > 0
        assert census.extended_domain >= census.involution_domain
        assert census.passed

    def test_domain_census_order_four_is_empty(self):
        census = domain_census(4)
        assert census.involution_domain == 0
        assert census.passed

    @pytest.mark.slow
    def test_domain_census_order_six(self):
        assert domain_census(6).passed

    def test_invert_rows_bijection(self):
        assert invert_rows_bijection(4)
        assert invert_rows_bijection(5)

    def test_exact_event_fractions(self):
        fractions = exact_event_fractions(3)
        assert fractions['odd_cycle'] == (1, 1)
        assert fractions['switchable_odd_cycle'] == (0, 1)
        fractions = exact_event_fractions(5, math.e)
        assert all(total == 56 for _, total in fractions.values())
        assert fractions['few_cycles'] == (56, 56)
        assert fractions['switchable_odd_cycle'][0] <= fractions['extended_domain'][0]
