"""
Row cycles, cycle switching and the switching involutions

A row cycle of rows (x, y) is a minimal set of columns on which both rows
carry the same symbols. Switching it exchanges the two rows on those columns.
Odd cycles flip the column and symbol parities, even cycles flip nothing.
"""
import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from services.latin_square import LatinSquare

logger = logging.getLogger(__name__)

MAX_GRAPH_ORDER = 6


@dataclass(frozen=True)
class RowCycle:
    rows: Tuple[int, int]
    columns: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.columns)

    @property
    def is_odd(self) -> bool:
        return len(self.columns) % 2 == 1

    def __str__(self) -> str:
        cols = ','.join(str(c) for c in self.columns)
        return f'rows=({self.rows[0]},{self.rows[1]}) cols=[{cols}]'


@dataclass(frozen=True)
class CycleStructure:
    """Multiset of cycle lengths, largest first."""
    lengths: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if any(length < 2 for length in self.lengths):
            raise ValueError(f'row cycles have length at least 2, got {self.lengths}')
        object.__setattr__(self, 'lengths', tuple(sorted(self.lengths, reverse=True)))

    @property
    def total(self) -> int:
        return sum(self.lengths)

    def has_odd(self) -> bool:
        return any(length % 2 for length in self.lengths)


def _row_pair(square: LatinSquare, x: int, y: int) -> Tuple[int, int]:
    n = square.n
    if x == y:
        raise ValueError(f'row cycles need two distinct rows, got ({x},{y})')
    for r in (x, y):
        if not 1 <= r <= n:
            raise ValueError(f'row index {r} out of range 1..{n}')
    return (x, y) if x < y else (y, x)


def row_cycles(square: LatinSquare, x: int, y: int) -> List[RowCycle]:
    """Cycles of rows (x, y), ordered by their smallest column.

    Each cycle starts at its smallest column c and moves to the column where
    row x holds the symbol that row y holds at c.
    """
    x, y = _row_pair(square, x, y)
    top = square.grid[x - 1]
    bottom = square.grid[y - 1]
    where_top = {s: j for j, s in enumerate(top)}

    seen = [False] * square.n
    cycles = []
    for start in range(square.n):
        if seen[start]:
            continue
        cols = []
        j = start
        while not seen[j]:
            seen[j] = True
            cols.append(j + 1)
            j = where_top[bottom[j]]
        cycles.append(RowCycle((x, y), tuple(cols)))
    return cycles


def cycle_structure(square: LatinSquare, x: int, y: int,
                    excluded_columns: Sequence[int] = ()) -> CycleStructure:
    """Lengths of the cycles of rows (x, y) that avoid excluded_columns.

    Raises:
        ValueError: if excluded_columns cuts through a cycle.
    """
    excluded = set(excluded_columns)
    lengths = []
    for cycle in row_cycles(square, x, y):
        inside = excluded.intersection(cycle.columns)
        if inside and len(inside) != cycle.length:
            raise ValueError(f'excluded columns split the cycle {cycle}')
        if not inside:
            lengths.append(cycle.length)
    return CycleStructure(tuple(lengths))


def _exchange(square: LatinSquare, rows: Tuple[int, int], columns: Sequence[int]) -> LatinSquare:
    x, y = rows
    grid = [list(row) for row in square.grid]
    for c in columns:
        grid[x - 1][c - 1], grid[y - 1][c - 1] = grid[y - 1][c - 1], grid[x - 1][c - 1]
    return LatinSquare(square.n, tuple(tuple(row) for row in grid))


def switch(square: LatinSquare, cycle: RowCycle) -> LatinSquare:
    """Exchange the two rows of the cycle on its columns.

    The columns may be given in any order; the result uses the traversal
    order of the matching cycle.

    Raises:
        ValueError: if a column is repeated or the columns are not a row
            cycle of the square.
    """
    if len(set(cycle.columns)) != len(cycle.columns):
        raise ValueError(f'{cycle} has a repeated column')
    wanted = frozenset(cycle.columns)
    for found in row_cycles(square, *cycle.rows):
        if frozenset(found.columns) == wanted:
            return _exchange(square, found.rows, found.columns)
    raise ValueError(f'{cycle} is not a row cycle of this square')


def find_switchable_odd(square: LatinSquare, x: int, y: int) -> Optional[RowCycle]:
    """First odd cycle of rows (x, y) that avoids column 1, or None."""
    for cycle in row_cycles(square, x, y):
        if cycle.is_odd and 1 not in cycle.columns:
            return cycle
    return None


def _require_reduced(square: LatinSquare):
    if square.n <= 2:
        raise ValueError(f'the involutions need order n > 2, got {square.n}')
    if not square.is_reduced():
        raise ValueError('the involutions act on reduced squares only')


def involution(square: LatinSquare) -> Optional[LatinSquare]:
    """Switch the switchable odd cycle of the last two rows, if there is one."""
    _require_reduced(square)
    n = square.n
    cycle = find_switchable_odd(square, n - 1, n)
    if cycle is None:
        return None
    return _exchange(square, cycle.rows, cycle.columns)


def scanned_pairs(n: int) -> List[Tuple[int, int]]:
    """(n-1, n), (n-3, n-2), ... never reaching row 1."""
    pairs = []
    y = n
    while y - 1 >= 2:
        pairs.append((y - 1, y))
        y -= 2
    return pairs


def extended_domain_pair(square: LatinSquare) -> Optional[Tuple[RowCycle, Tuple[int, int]]]:
    for pair in scanned_pairs(square.n):
        cycle = find_switchable_odd(square, *pair)
        if cycle is not None:
            return cycle, pair
    return None


def extended_involution(square: LatinSquare) -> Optional[LatinSquare]:
    """Like involution, but falls back to rows (n-3, n-2), (n-5, n-4), ...

    Switching rows (x, y) leaves every other pair's cycles alone, so the pair
    found first is found again after the switch.
    """
    _require_reduced(square)
    found = extended_domain_pair(square)
    if found is None:
        return None
    cycle, _ = found
    return _exchange(square, cycle.rows, cycle.columns)


def parity_flip_violations(square: LatinSquare) -> List[RowCycle]:
    """Cycles whose switch breaks the parity-flip law."""
    before = square.parity_triple()
    bad = []
    n = square.n
    for x in range(1, n + 1):
        for y in range(x + 1, n + 1):
            for cycle in row_cycles(square, x, y):
                after = _exchange(square, cycle.rows, cycle.columns).parity_triple()
                flip = 1 if cycle.is_odd else 0
                expected = (before.row, before.col ^ flip, before.sym ^ flip)
                if (after.row, after.col, after.sym) != expected:
                    bad.append(cycle)
    return bad


class RowPairPolicy(str, enum.Enum):
    ALL = 'all'
    SCANNED = 'scanned'
    LAST = 'last'


def _policy_pairs(n: int, policy: RowPairPolicy) -> List[Tuple[int, int]]:
    if policy is RowPairPolicy.ALL:
        return [(x, y) for x in range(2, n + 1) for y in range(x + 1, n + 1)]
    if policy is RowPairPolicy.SCANNED:
        return scanned_pairs(n)
    return [(n - 1, n)] if n > 2 else []


@dataclass
class ComponentSummary:
    size: int
    row_parity: int


@dataclass
class GraphSummary:
    n: int
    policy: str
    vertex_count: int
    edge_count: int
    components: List[ComponentSummary]

    @property
    def component_count(self) -> int:
        return len(self.components)

    def to_dict(self) -> Dict:
        return {
            'n': self.n,
            'policy': self.policy,
            'vertices': self.vertex_count,
            'edges': self.edge_count,
            'component_count': self.component_count,
            'components': [{'size': c.size, 'row_parity': c.row_parity} for c in self.components],
        }


def switching_graph(n: int, row_pairs_policy='all') -> GraphSummary:
    """Components of the graph on reduced squares joined by cycle switches.

    Only cycles avoiding row 1 and column 1 are switched, so every neighbour
    is again reduced.
    """
    from services.enumeration import LatinClass, enumerate_squares

    if n > MAX_GRAPH_ORDER:
        raise ValueError(f'switching_graph is limited to n <= {MAX_GRAPH_ORDER}, got {n}')
    policy = RowPairPolicy(row_pairs_policy)
    squares = list(enumerate_squares(n, LatinClass.REDUCED))
    index = {sq.grid: k for k, sq in enumerate(squares)}
    pairs = _policy_pairs(n, policy)

    src, dst = [], []
    for k, sq in enumerate(squares):
        for x, y in pairs:
            for cycle in row_cycles(sq, x, y):
                if 1 in cycle.columns:
                    continue
                target = index[_exchange(sq, cycle.rows, cycle.columns).grid]
                if target > k:
                    src.append(k)
                    dst.append(target)
    logger.info(f'switching graph n={n} policy={policy.value}: {len(squares)} vertices, {len(src)} edges')

    size = len(squares)
    adjacency = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(size, size))
    count, labels = connected_components(adjacency, directed=False)

    members: Dict[int, List[int]] = {}
    for k, label in enumerate(labels):
        members.setdefault(int(label), []).append(k)
    components = []
    for label in range(count):
        parities = {squares[k].parity_triple().row for k in members[label]}
        if len(parities) != 1:
            # switching never changes row parity
            raise RuntimeError(f'component {label} mixes row parities {parities}')
        components.append(ComponentSummary(len(members[label]), parities.pop()))
    components.sort(key=lambda c: (-c.size, c.row_parity))
    return GraphSummary(n, policy.value, size, len(src), components)
