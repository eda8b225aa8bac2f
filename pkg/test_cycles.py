import pytest

from services.cycles import (
    CycleStructure,
    RowCycle,
    cycle_structure,
    extended_domain_pair,
    extended_involution,
    find_switchable_odd,
    involution,
    parity_flip_violations,
    row_cycles,
    scanned_pairs,
    switch,
    switching_graph,
)
from services.enumeration import LatinClass, enumerate_squares
from services.latin_square import LatinSquare, validate
from services.sampler import sample


def flipped(before, after):
    return (after.row, after.col, after.sym) == (before.row, 1 - before.col, 1 - before.sym)


class TestRowCycles:
    def test_cyclic_three(self, cyclic_three):
        assert row_cycles(cyclic_three, 2, 3) == [RowCycle((2, 3), (1, 2, 3))]
        assert row_cycles(cyclic_three, 3, 2) == row_cycles(cyclic_three, 2, 3)

    def test_columns_partitioned(self, switchable_five):
        cycles = row_cycles(switchable_five, 4, 5)
        assert [c.columns for c in cycles] == [(1, 2), (3, 4, 5)]
        assert str(cycles[1]) == 'rows=(4,5) cols=[3,4,5]'

    def test_same_row_rejected(self, cyclic_three):
        with pytest.raises(ValueError, match='distinct rows'):
            row_cycles(cyclic_three, 2, 2)

    def test_row_out_of_range(self, cyclic_three):
        with pytest.raises(ValueError, match='out of range'):
            row_cycles(cyclic_three, 1, 4)

    def test_cycle_structure(self, switchable_five):
        assert cycle_structure(switchable_five, 4, 5) == CycleStructure((3, 2))
        assert cycle_structure(switchable_five, 4, 5, excluded_columns=[1, 2]).lengths == (3,)
        with pytest.raises(ValueError, match='split the cycle'):
            cycle_structure(switchable_five, 4, 5, excluded_columns=[1])

    def test_cycle_structure_rejects_short_cycles(self):
        with pytest.raises(ValueError):
            CycleStructure((3, 1))


class TestSwitch:
    def test_switch_and_back(self, switchable_five, switched_five):
        cycle = RowCycle((4, 5), (3, 4, 5))
        assert switch(switchable_five, cycle) == switched_five
        assert switch(switched_five, RowCycle((4, 5), (3, 5, 4))) == switchable_five

    def test_switch_rejects_foreign_cycle(self, switchable_five):
        with pytest.raises(ValueError, match='not a row cycle'):
            switch(switchable_five, RowCycle((4, 5), (2, 3)))

    def test_switch_rejects_repeated_column(self, switchable_five):
        with pytest.raises(ValueError, match='repeated column'):
            switch(switchable_five, RowCycle((4, 5), (3, 4, 5, 5)))

    def test_switch_accepts_any_column_order(self, switchable_five, switched_five):
        result = switch(switchable_five, RowCycle((5, 4), (5, 3, 4)))
        assert result == switched_five
        validate(result.grid)

    def test_odd_switch_flips_column_and_symbol(self, switchable_five, switched_five):
        assert flipped(switchable_five.parity_triple(), switched_five.parity_triple())

    def test_parity_flip_law_exhaustive_order_four(self):
        for sq in enumerate_squares(4, LatinClass.ALL):
            assert parity_flip_violations(sq) == []

    def test_parity_flip_law_order_five(self, switchable_five, switched_five):
        assert parity_flip_violations(switchable_five) == []
        assert parity_flip_violations(switched_five) == []

    @pytest.mark.slow
    def test_parity_flip_law_exhaustive_order_five(self):
        for sq in enumerate_squares(5, LatinClass.ALL):
            assert parity_flip_violations(sq) == []

    def test_parity_flip_law_sampled_order_eight(self):
        for k in range(20):
            assert parity_flip_violations(sample(8, seed=11, steps=60, index=k)) == []

    @pytest.mark.slow
    def test_parity_flip_law_sampled_order_eight_full(self):
        for k in range(10_000):
            assert parity_flip_violations(sample(8, seed=11, steps=200, index=k)) == []

    def test_find_switchable_odd(self, switchable_five, cyclic_three):
        assert find_switchable_odd(switchable_five, 4, 5) == RowCycle((4, 5), (3, 4, 5))
        assert find_switchable_odd(cyclic_three, 2, 3) is None


class TestInvolutions:
    def test_involution(self, switchable_five, switched_five):
        assert involution(switchable_five) == switched_five
        assert involution(switched_five) == switchable_five

    def test_outside_domain(self, cyclic_three):
        assert involution(cyclic_three) is None
        assert extended_involution(cyclic_three) is None

    def test_requires_reduced(self):
        square = validate([[2, 3, 1], [1, 2, 3], [3, 1, 2]])
        with pytest.raises(ValueError, match='reduced'):
            involution(square)

    def test_requires_order_above_two(self, order_two):
        with pytest.raises(ValueError, match='n > 2'):
            extended_involution(order_two)

    @pytest.mark.parametrize('n, pairs', [
        (3, [(2, 3)]),
        (4, [(3, 4)]),
        (6, [(5, 6), (3, 4)]),
        (7, [(6, 7), (4, 5), (2, 3)]),
    ])
    def test_scanned_pairs(self, n, pairs):
        assert scanned_pairs(n) == pairs

    def test_extended_reaches_beyond_last_rows(self):
        found = None
        for sq in enumerate_squares(5, LatinClass.REDUCED):
            if involution(sq) is None and extended_involution(sq) is not None:
                found = sq
                break
        assert found is not None
        _, pair = extended_domain_pair(found)
        assert pair == (2, 3)
        image = extended_involution(found)
        assert image.is_reduced()
        assert extended_involution(image) == found
        assert flipped(found.parity_triple(), image.parity_triple())

    def test_involutions_exhaustive_order_five(self):
        for sq in enumerate_squares(5, LatinClass.REDUCED):
            for fn in (involution, extended_involution):
                image = fn(sq)
                if image is None:
                    continue
                assert fn(image) == sq
                assert flipped(sq.parity_triple(), image.parity_triple())


class TestSwitchingGraph:
    def test_order_four(self):
        summary = switching_graph(4)
        assert summary.vertex_count == 4
        assert sum(c.size for c in summary.components) == 4
        assert set(summary.to_dict()) == {'n', 'policy', 'vertices', 'edges', 'component_count', 'components'}

    def test_order_five_policies(self):
        full = switching_graph(5, 'all')
        last = switching_graph(5, 'last')
        assert full.vertex_count == last.vertex_count == 56
        assert last.edge_count <= full.edge_count
        assert full.component_count <= last.component_count

    def test_guards(self):
        with pytest.raises(ValueError):
            switching_graph(7)
        with pytest.raises(ValueError):
            switching_graph(4, 'sideways')

    def test_cyclic_square_helper(self):
        assert LatinSquare.cyclic(5).is_reduced()
