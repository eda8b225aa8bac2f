"""
Exhaustive enumeration of small Latin-square classes and parity censuses

Squares come out in lexicographic row-major order. The bitmask enumerator
and the plain reference enumerator must agree square for square.
"""
import enum
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from services.cycles import (
    extended_domain_pair,
    extended_involution,
    find_switchable_odd,
    involution,
    row_cycles,
)
from services.latin_square import (
    ALL_TRIPLES,
    PARITY_PROPERTIES,
    LatinSquare,
    ParityTriple,
    Property,
    allowed_reduced_triples,
    invert_rows,
    reduce,
    triple_has,
)

logger = logging.getLogger(__name__)


class LatinClass(str, enum.Enum):
    ALL = 'all'
    REDUCED = 'reduced'
    NORMALISED_UNIPOTENT = 'normalised_unipotent'


MAX_ORDER = {
    LatinClass.ALL: 5,
    LatinClass.REDUCED: 7,
    LatinClass.NORMALISED_UNIPOTENT: 7,
}
MAX_IDENTITY_ORDER = 6


def check_size(n: int, klass) -> LatinClass:
    """Normalise klass and enforce the size guards."""
    klass = LatinClass(klass)
    if n < 1:
        raise ValueError(f'order must be positive, got {n}')
    limit = MAX_ORDER[klass]
    if n > limit:
        raise ValueError(f'size guard: enumerating class {klass.value} is limited to n <= {limit}, got {n}')
    return klass


def _fixed_cells(n: int, klass: LatinClass) -> Dict[int, int]:
    """Cell index (row-major, 0-based) -> symbol forced by the class."""
    fixed = {}
    if klass in (LatinClass.REDUCED, LatinClass.NORMALISED_UNIPOTENT):
        for j in range(n):
            fixed[j] = j + 1
    if klass is LatinClass.REDUCED:
        for i in range(n):
            fixed[i * n] = i + 1
    if klass is LatinClass.NORMALISED_UNIPOTENT:
        for i in range(n):
            fixed[i * n + i] = 1
    return fixed


def _backtrack(n: int, fixed: Dict[int, int], limit: int) -> Iterator[Tuple[int, ...]]:
    """Fill cells 0..limit-1 around the fixed ones, smallest symbol first.

    Yields flat grids; cells at or past limit are 0 unless fixed.
    """
    full = (1 << n) - 1
    grid = [0] * (n * n)
    row_used = [0] * n
    col_used = [0] * n
    for k, s in fixed.items():
        r, c = divmod(k, n)
        bit = 1 << (s - 1)
        if row_used[r] & bit or col_used[c] & bit:
            return
        grid[k] = s
        row_used[r] |= bit
        col_used[c] |= bit

    cells = [k for k in range(limit) if k not in fixed]
    if not cells:
        yield tuple(grid)
        return

    depth_max = len(cells) - 1
    avail = [0] * len(cells)
    r, c = divmod(cells[0], n)
    avail[0] = full & ~(row_used[r] | col_used[c])
    depth = 0
    while depth >= 0:
        k = cells[depth]
        r, c = divmod(k, n)
        if grid[k]:
            bit = 1 << (grid[k] - 1)
            row_used[r] ^= bit
            col_used[c] ^= bit
            grid[k] = 0
        options = avail[depth]
        if not options:
            depth -= 1
            continue
        bit = options & -options
        avail[depth] = options ^ bit
        grid[k] = bit.bit_length()
        row_used[r] |= bit
        col_used[c] |= bit
        if depth == depth_max:
            yield tuple(grid)
            continue
        depth += 1
        r2, c2 = divmod(cells[depth], n)
        avail[depth] = full & ~(row_used[r2] | col_used[c2])


def _to_square(n: int, flat: Sequence[int]) -> LatinSquare:
    return LatinSquare(n, tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n)))


def _prefix_rows(n: int) -> int:
    return min(2, n)


def prefixes(n: int, klass) -> List[Tuple[Tuple[int, ...], ...]]:
    """Shard keys: every way to fill the first two rows within the class."""
    klass = check_size(n, klass)
    fixed = _fixed_cells(n, klass)
    rows = _prefix_rows(n)
    out = []
    for flat in _backtrack(n, fixed, rows * n):
        out.append(tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(rows)))
    return out


def enumerate_shard(n: int, klass, prefix: Sequence[Sequence[int]]) -> Iterator[LatinSquare]:
    klass = check_size(n, klass)
    fixed = _fixed_cells(n, klass)
    for i, row in enumerate(prefix):
        for j, s in enumerate(row):
            k = i * n + j
            if fixed.get(k, s) != s:
                return
            fixed[k] = s
    for flat in _backtrack(n, fixed, n * n):
        yield _to_square(n, flat)


def enumerate_squares(n: int, klass) -> Iterator[LatinSquare]:
    """Every member of the class exactly once, lexicographically."""
    klass = check_size(n, klass)
    for flat in _backtrack(n, _fixed_cells(n, klass), n * n):
        yield _to_square(n, flat)


def reference_enumerate(n: int, klass) -> Iterator[LatinSquare]:
    """Plain backtracking over sets; the oracle for enumerate_squares."""
    klass = check_size(n, klass)
    fixed = _fixed_cells(n, klass)
    grid = [[0] * n for _ in range(n)]

    def fits(i, j, s):
        if any(grid[i][c] == s for c in range(j)):
            return False
        if any(grid[r][j] == s for r in range(i)):
            return False
        return True

    def fill(k):
        if k == n * n:
            yield LatinSquare(n, tuple(tuple(row) for row in grid))
            return
        i, j = divmod(k, n)
        choices = [fixed[k]] if k in fixed else range(1, n + 1)
        for s in choices:
            if fits(i, j, s):
                grid[i][j] = s
                yield from fill(k + 1)
                grid[i][j] = 0

    yield from fill(0)


@dataclass
class ParityTally:
    n: int
    klass: str
    counts: Dict[str, int] = field(default_factory=lambda: {t: 0 for t in ALL_TRIPLES})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, triple) -> int:
        return self.counts[str(triple)]

    def property_count(self, prop) -> int:
        prop = Property(prop)
        return sum(v for t, v in self.counts.items() if triple_has(ParityTriple.parse(t), prop))

    def add(self, triple: ParityTriple, times: int = 1):
        self.counts[str(triple)] += times

    def merge(self, counts: Dict[str, int]):
        for t, v in counts.items():
            self.counts[t] += v

    def outside_allowed(self) -> Dict[str, int]:
        """Nonzero counts a reduced square could never have."""
        if self.klass != LatinClass.REDUCED.value:
            return {}
        allowed = allowed_reduced_triples(self.n)
        return {t: v for t, v in self.counts.items() if v and t not in allowed}

    def to_dict(self) -> Dict:
        return {'n': self.n, 'class': self.klass, 'counts': dict(self.counts), 'total': self.total}


def shard_counts(args) -> Tuple[Tuple[Tuple[int, ...], ...], Dict[str, int]]:
    """Pool worker: parity counts of one shard."""
    n, klass, prefix = args
    counts = Counter(str(sq.parity_triple()) for sq in enumerate_shard(n, klass, prefix))
    return prefix, {t: counts.get(t, 0) for t in ALL_TRIPLES}


def iter_shard_counts(n: int, klass, workers: int = 1, skip=()) -> Iterator[Tuple[tuple, Dict[str, int]]]:
    """Counts per shard, in prefix order; shards listed in skip are not computed."""
    klass = check_size(n, klass)
    skip = set(skip)
    jobs = [(n, klass.value, p) for p in prefixes(n, klass) if p not in skip]
    logger.info(f'enumerating n={n} class={klass.value}: {len(jobs)} shards, {workers} worker(s)')
    if workers > 1 and len(jobs) > 1:
        with Pool(processes=workers) as pool:
            yield from pool.imap(shard_counts, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
    else:
        for job in jobs:
            yield shard_counts(job)


def tally(n: int, klass, workers: int = 1) -> ParityTally:
    """Parity-triple counts over the class; independent of workers."""
    klass = check_size(n, klass)
    result = ParityTally(n, klass.value)
    for _, counts in iter_shard_counts(n, klass, workers):
        result.merge(counts)
    return result


def alon_tarsi(n: int, klass, workers: int = 1) -> int:
    """#even - #odd squares in the class (ELS minus OLS)."""
    t = tally(n, klass, workers)
    return t.property_count(Property.ELS) - t.property_count(Property.OLS)


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------

_TERM = re.compile(r'^(?:(\d+)\*)?([LRU])\^([01]{3}|[A-Z]+)$')


def evaluate(expr: str, tallies: Dict[str, ParityTally]) -> int:
    """Value of an expression such as 'R^000+R^110', '144*R^ELS' or '0'."""
    total = 0
    for term in expr.replace(' ', '').split('+'):
        if term.isdigit():
            total += int(term)
            continue
        match = _TERM.match(term)
        if not match:
            raise ValueError(f'cannot evaluate term {term!r}')
        factor, letter, what = match.groups()
        t = tallies[letter]
        value = t.count(what) if what[0] in '01' else t.property_count(what)
        total += int(factor or 1) * value
    return total


@dataclass
class IdentityCheck:
    lhs_expr: str
    rhs_expr: str
    lhs: Optional[int] = None
    rhs: Optional[int] = None
    status: str = 'SKIP'

    def line(self) -> str:
        lv = '-' if self.lhs is None else self.lhs
        rv = '-' if self.rhs is None else self.rhs
        return f'IDENTITY {self.lhs_expr} = {self.rhs_expr} : {lv} {rv} {self.status}'


@dataclass
class IdentityReport:
    n: int
    title: str
    checks: List[IdentityCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != 'FAIL' for c in self.checks)

    @property
    def failures(self) -> List[IdentityCheck]:
        return [c for c in self.checks if c.status == 'FAIL']

    def lines(self) -> List[str]:
        return [c.line() for c in self.checks]

    def check(self, lhs: str, rhs: str, tallies: Dict[str, ParityTally]):
        a, b = evaluate(lhs, tallies), evaluate(rhs, tallies)
        self.checks.append(IdentityCheck(lhs, rhs, a, b, 'PASS' if a == b else 'FAIL'))

    def skip(self, lhs: str, rhs: str):
        self.checks.append(IdentityCheck(lhs, rhs))


def _chain(*exprs: str) -> List[Tuple[str, str]]:
    return [(exprs[k], exprs[k + 1]) for k in range(len(exprs) - 1)]


TABLE_IDENTITIES = {
    # n ≡ 0, 1 (mod 4)
    0: (
        _chain('R^ELS', 'R^SELS', 'R^000+R^110')
        + _chain('R^OLS', 'R^SOLS', 'R^011+R^101')
        + _chain('U^ELS', 'R^CELS', 'R^000+R^101')
        + _chain('U^OLS', 'R^COLS', 'R^011+R^110')
        + _chain('R^RELS', 'R^000+R^011', 'U^ELS')
        + _chain('R^ROLS', 'R^101+R^110', 'U^OLS')
        + [('R^111', '0'), ('R^100', '0'), ('R^010', '0'), ('R^001', '0')]
        + [('R^011', 'R^101')]
    ),
    # n ≡ 2, 3 (mod 4)
    2: (
        _chain('R^ELS', 'R^SOLS', 'R^111+R^001')
        + _chain('R^OLS', 'R^SELS', 'R^100+R^010')
        + _chain('U^ELS', 'R^COLS', 'R^111+R^010')
        + _chain('U^OLS', 'R^CELS', 'R^100+R^001')
        + _chain('R^ROLS', 'R^111+R^100', 'U^ELS')
        + _chain('R^RELS', 'R^010+R^001', 'U^OLS')
        + [('R^000', '0'), ('R^011', '0'), ('R^101', '0'), ('R^110', '0')]
        + [('R^100', 'R^010')]
    ),
}
EVEN_ORDER_IDENTITIES = {
    0: [('R^101', 'R^110')],
    2: [('R^010', 'R^001')],
}


def verify_identities(n: int, tallies: Optional[Dict[str, ParityTally]] = None,
                      workers: int = 1) -> IdentityReport:
    """Check the table of identities for reduced and normalised unipotent squares.

    tallies maps 'R' and 'U' to ready-made tallies; missing ones are enumerated.
    """
    if n > MAX_IDENTITY_ORDER:
        raise ValueError(f'size guard: verify is limited to n <= {MAX_IDENTITY_ORDER}, got {n}')
    tallies = dict(tallies or {})
    if 'R' not in tallies:
        tallies['R'] = tally(n, LatinClass.REDUCED, workers)
    if 'U' not in tallies:
        tallies['U'] = tally(n, LatinClass.NORMALISED_UNIPOTENT, workers)

    column = 0 if n % 4 in (0, 1) else 2
    report = IdentityReport(n, f'table of identities, n = {n} (n mod 4 = {n % 4})')
    for lhs, rhs in TABLE_IDENTITIES[column]:
        report.check(lhs, rhs, tallies)
    for lhs, rhs in EVEN_ORDER_IDENTITIES[column]:
        if n % 2 == 0:
            report.check(lhs, rhs, tallies)
        else:
            report.skip(lhs, rhs)
    logger.info(f'identities n={n}: {len(report.failures)} failure(s)')
    return report


def _swap_col_sym(triple: str) -> str:
    return triple[0] + triple[2] + triple[1]


def class_relations(n: int, workers: int = 1) -> IdentityReport:
    """Counting relations between L, R and U.

    Even n: L^P = n!(n-1)! R^P = n!(n-1)! U^P. Odd n >= 3: the L counts agree
    within each parity quadruple. All n: R^abc = U^acb. The L relations are
    skipped beyond the size guard for the class of all squares.
    """
    check_size(n, LatinClass.REDUCED)
    tallies = {
        'R': tally(n, LatinClass.REDUCED, workers),
        'U': tally(n, LatinClass.NORMALISED_UNIPOTENT, workers),
    }
    with_l = n <= MAX_ORDER[LatinClass.ALL]
    if with_l:
        tallies['L'] = tally(n, LatinClass.ALL, workers)

    report = IdentityReport(n, f'class relations, n = {n}')
    keys = [p.value for p in PARITY_PROPERTIES] + list(ALL_TRIPLES)
    if n % 2 == 0:
        factor = math.factorial(n) * math.factorial(n - 1)
        for key in keys:
            for rhs in (f'{factor}*R^{key}', f'{factor}*U^{key}'):
                if with_l:
                    report.check(f'L^{key}', rhs, tallies)
                else:
                    report.skip(f'L^{key}', rhs)
    elif n >= 3:
        for quad in (('000', '011', '101', '110'), ('111', '100', '010', '001')):
            for a, b in zip(quad, quad[1:]):
                if with_l:
                    report.check(f'L^{a}', f'L^{b}', tallies)
                else:
                    report.skip(f'L^{a}', f'L^{b}')
    for t in ALL_TRIPLES:
        report.check(f'R^{t}', f'U^{_swap_col_sym(t)}', tallies)
    return report


# ---------------------------------------------------------------------------
# Exhaustive checks of the reduction map and the involutions
# ---------------------------------------------------------------------------

@dataclass
class FiberReport:
    n: int
    squares: int
    fibers: Dict[Tuple, int]
    expected_fiber: int
    switchable_mismatches: int

    @property
    def uniform(self) -> bool:
        return all(v == self.expected_fiber for v in self.fibers.values())

    @property
    def passed(self) -> bool:
        return self.uniform and self.switchable_mismatches == 0


def reduction_fibers(n: int) -> FiberReport:
    """How often reduce hits each reduced square, over all squares of order n."""
    check_size(n, LatinClass.ALL)
    fibers = Counter()
    mismatches = 0
    total = 0
    for sq in enumerate_squares(n, LatinClass.ALL):
        image = reduce(sq)
        fibers[image.grid] += 1
        total += 1
        if n >= 2:
            before = find_switchable_odd(sq, n - 1, n) is not None
            after = find_switchable_odd(image, n - 1, n) is not None
            mismatches += before != after
    expected = math.factorial(n) * math.factorial(n - 1)
    return FiberReport(n, total, dict(fibers), expected, mismatches)


@dataclass
class DomainCensus:
    n: int
    reduced: int = 0
    involution_domain: int = 0
    extended_domain: int = 0
    not_involutive: int = 0
    parity_violations: int = 0
    not_reduced_images: int = 0

    @property
    def passed(self) -> bool:
        return not (self.not_involutive or self.parity_violations or self.not_reduced_images)


def domain_census(n: int) -> DomainCensus:
    """Apply both involutions to every reduced square of order n (3 <= n <= 7)."""
    check_size(n, LatinClass.REDUCED)
    if n < 3:
        raise ValueError(f'the involutions need order n > 2, got {n}')
    census = DomainCensus(n)
    for sq in enumerate_squares(n, LatinClass.REDUCED):
        census.reduced += 1
        triple = sq.parity_triple()
        for fn, attr in ((involution, 'involution_domain'), (extended_involution, 'extended_domain')):
            image = fn(sq)
            if image is None:
                continue
            setattr(census, attr, getattr(census, attr) + 1)
            if not image.is_reduced():
                census.not_reduced_images += 1
            if fn(image) != sq:
                census.not_involutive += 1
            after = image.parity_triple()
            if (after.row, after.col, after.sym) != (triple.row, 1 - triple.col, 1 - triple.sym):
                census.parity_violations += 1
    return census


def invert_rows_bijection(n: int) -> bool:
    """invert_rows maps the reduced stream onto the normalised unipotent class,
    swapping column and symbol parity."""
    reduced = list(enumerate_squares(n, LatinClass.REDUCED))
    unipotent = {sq.grid for sq in enumerate_squares(n, LatinClass.NORMALISED_UNIPOTENT)}
    images = set()
    for sq in reduced:
        image = invert_rows(sq)
        a, b = sq.parity_triple(), image.parity_triple()
        if (b.row, b.col, b.sym) != (a.row, a.sym, a.col):
            return False
        images.add(image.grid)
    return images == unipotent and len(images) == len(reduced)


EVENT_NAMES = ('long_cycle', 'few_cycles', 'odd_cycle', 'switchable_odd_cycle', 'extended_domain')


def square_events(square: LatinSquare, log_base: float = math.e) -> Tuple[bool, ...]:
    """The five last-two-rows events for one square (see sampler)."""
    n = square.n
    cycles = row_cycles(square, n - 1, n)
    threshold = n - math.log(n, log_base)
    long_cycle = any(c.length >= threshold for c in cycles)
    few_cycles = len(cycles) < 9 * math.sqrt(n)
    odd_cycle = any(c.is_odd for c in cycles)
    switchable = any(c.is_odd and 1 not in c.columns for c in cycles)
    extended = extended_domain_pair(reduce(square)) is not None
    return long_cycle, few_cycles, odd_cycle, switchable, extended


def exact_event_fractions(n: int, log_base: float = math.e) -> Dict[str, Tuple[int, int]]:
    """Exact (occurrences, total) of each event over the reduced squares.

    Reduction keeps the last-two-rows cycle lengths and hits every reduced
    square equally often, so these are also the fractions over all squares.
    """
    check_size(n, LatinClass.REDUCED)
    if n < 3:
        raise ValueError(f'last-two-rows events need n >= 3, got {n}')
    hits = [0] * len(EVENT_NAMES)
    total = 0
    for sq in enumerate_squares(n, LatinClass.REDUCED):
        total += 1
        for k, flag in enumerate(square_events(sq, log_base)):
            hits[k] += flag
    return {name: (hits[k], total) for k, name in enumerate(EVENT_NAMES)}
