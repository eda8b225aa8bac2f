"""
Latin squares and their three parities

Rows, columns and symbols are 1-based everywhere in the public API.
"""
import enum
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Sequence, Tuple

logger = logging.getLogger(__name__)


def _sign(images: Sequence[int]) -> int:
    """(n - number of cycles) mod 2 for a 1-based image sequence."""
    n = len(images)
    seen = [False] * (n + 1)
    cycles = 0
    for start in range(1, n + 1):
        if seen[start]:
            continue
        cycles += 1
        k = start
        while not seen[k]:
            seen[k] = True
            k = images[k - 1]
    return (n - cycles) & 1


@dataclass(frozen=True)
class Permutation:
    """A permutation of 1..n; position i holds the image of i."""
    images: Tuple[int, ...]

    def __post_init__(self):
        images = tuple(self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f'not a permutation of 1..{len(images)}: {images}')
        object.__setattr__(self, 'images', images)

    @classmethod
    def identity(cls, n: int) -> 'Permutation':
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __len__(self) -> int:
        return len(self.images)

    def compose(self, other: 'Permutation') -> 'Permutation':
        """self ∘ other, i.e. i ↦ self(other(i))."""
        if other.n != self.n:
            raise ValueError(f'cannot compose permutations of sizes {self.n} and {other.n}')
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> 'Permutation':
        inv = [0] * self.n
        for i, image in enumerate(self.images, start=1):
            inv[image - 1] = i
        return Permutation(tuple(inv))

    def cycles(self) -> List[Tuple[int, ...]]:
        """Cycles in order of their smallest element, each starting there."""
        seen = set()
        out = []
        for start in range(1, self.n + 1):
            if start in seen:
                continue
            cycle = []
            k = start
            while k not in seen:
                seen.add(k)
                cycle.append(k)
                k = self.images[k - 1]
            out.append(tuple(cycle))
        return out

    def cycle_type(self) -> Tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def sign(self) -> int:
        return _sign(self.images)


def sign(p: Permutation) -> int:
    """0 for even permutations, 1 for odd ones."""
    return p.sign()


@dataclass(frozen=True)
class ParityTriple:
    row: int
    col: int
    sym: int

    def __post_init__(self):
        for name in ('row', 'col', 'sym'):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f'{name} parity must be 0 or 1, got {getattr(self, name)}')

    @classmethod
    def parse(cls, text: str) -> 'ParityTriple':
        if len(text) != 3 or any(ch not in '01' for ch in text):
            raise ValueError(f'parity triple must look like 011, got {text!r}')
        return cls(int(text[0]), int(text[1]), int(text[2]))

    def __str__(self) -> str:
        return f'{self.row}{self.col}{self.sym}'

    @property
    def total(self) -> int:
        return (self.row + self.col + self.sym) & 1

    @property
    def is_even(self) -> bool:
        return (self.row + self.col) % 2 == 0


ALL_TRIPLES: Tuple[str, ...] = tuple(f'{a}{b}{c}' for a in (0, 1) for b in (0, 1) for c in (0, 1))


def allowed_reduced_triples(n: int) -> FrozenSet[str]:
    """Triples a reduced square of order n can carry."""
    if n % 4 in (0, 1):
        return frozenset({'000', '011', '101', '110'})
    return frozenset({'111', '100', '010', '001'})


class Property(str, enum.Enum):
    ELS = 'ELS'
    OLS = 'OLS'
    RELS = 'RELS'
    ROLS = 'ROLS'
    CELS = 'CELS'
    COLS = 'COLS'
    SELS = 'SELS'
    SOLS = 'SOLS'
    REDUCED = 'reduced'
    NORMALISED = 'normalised'
    UNIPOTENT = 'unipotent'
    NORMALISED_UNIPOTENT = 'normalised_unipotent'


PARITY_PROPERTIES: Tuple[Property, ...] = (
    Property.ELS, Property.OLS, Property.RELS, Property.ROLS,
    Property.CELS, Property.COLS, Property.SELS, Property.SOLS,
)


def triple_has(triple: ParityTriple, prop: Property) -> bool:
    """Whether a square with this parity triple has the parity property."""
    if prop is Property.ELS:
        return triple.is_even
    if prop is Property.OLS:
        return not triple.is_even
    if prop is Property.RELS:
        return triple.row == 0
    if prop is Property.ROLS:
        return triple.row == 1
    if prop is Property.CELS:
        return triple.col == 0
    if prop is Property.COLS:
        return triple.col == 1
    if prop is Property.SELS:
        return triple.sym == 0
    if prop is Property.SOLS:
        return triple.sym == 1
    raise ValueError(f'{prop.value} is not a parity property')


@dataclass(frozen=True)
class LatinSquare:
    """An n×n Latin square over 1..n.

    Build one through validate() unless the grid is known to be Latin.
    """
    n: int
    grid: Tuple[Tuple[int, ...], ...]

    @classmethod
    def cyclic(cls, n: int) -> 'LatinSquare':
        return cls(n, tuple(tuple((i + j) % n + 1 for j in range(n)) for i in range(n)))

    def __str__(self) -> str:
        return format_square(self)

    def cell(self, i: int, j: int) -> int:
        return self.grid[i - 1][j - 1]

    def _check_index(self, index: int, what: str):
        if not 1 <= index <= self.n:
            raise ValueError(f'{what} index {index} out of range 1..{self.n}')

    def row_perm(self, i: int) -> Permutation:
        self._check_index(i, 'row')
        return Permutation(self.grid[i - 1])

    def col_perm(self, j: int) -> Permutation:
        self._check_index(j, 'column')
        return Permutation(tuple(row[j - 1] for row in self.grid))

    def sym_perm(self, symbol: int) -> Permutation:
        self._check_index(symbol, 'symbol')
        return Permutation(tuple(row.index(symbol) + 1 for row in self.grid))

    def parity_triple(self) -> ParityTriple:
        n = self.n
        grid = self.grid
        row = sum(_sign(r) for r in grid) & 1
        col = sum(_sign([grid[i][j] for i in range(n)]) for j in range(n)) & 1
        # positions[s-1][i] = column of symbol s in row i
        positions = [[0] * n for _ in range(n)]
        for i, r in enumerate(grid):
            for j, s in enumerate(r):
                positions[s - 1][i] = j + 1
        sym = sum(_sign(p) for p in positions) & 1
        return ParityTriple(row, col, sym)

    def is_normalised(self) -> bool:
        return self.grid[0] == tuple(range(1, self.n + 1))

    def is_reduced(self) -> bool:
        return self.is_normalised() and all(self.grid[i][0] == i + 1 for i in range(self.n))

    def is_unipotent(self) -> bool:
        return len({self.grid[i][i] for i in range(self.n)}) == 1

    def is_normalised_unipotent(self) -> bool:
        return self.is_normalised() and self.is_unipotent()


def row_perm(square: LatinSquare, i: int) -> Permutation:
    return square.row_perm(i)


def col_perm(square: LatinSquare, j: int) -> Permutation:
    return square.col_perm(j)


def sym_perm(square: LatinSquare, symbol: int) -> Permutation:
    return square.sym_perm(symbol)


def parity_triple(square: LatinSquare) -> ParityTriple:
    return square.parity_triple()


def total_parity_consistent(square: LatinSquare) -> bool:
    """π_row + π_col + π_sym ≡ C(n, 2) (mod 2); observed, not relied upon."""
    n = square.n
    return square.parity_triple().total == (n * (n - 1) // 2) % 2


def classify(square: LatinSquare) -> FrozenSet[Property]:
    """Parity properties of the square plus its structural flags."""
    triple = square.parity_triple()
    flags = {prop for prop in PARITY_PROPERTIES if triple_has(triple, prop)}
    if square.is_reduced():
        flags.add(Property.REDUCED)
    if square.is_normalised():
        flags.add(Property.NORMALISED)
    if square.is_unipotent():
        flags.add(Property.UNIPOTENT)
    if square.is_normalised_unipotent():
        flags.add(Property.NORMALISED_UNIPOTENT)
    return frozenset(flags)


def reduce(square: LatinSquare) -> LatinSquare:
    """Relabel symbols so column 1 reads 1..n, then order the columns by row 1.

    Column 1 stays in place, so the row cycles of any two rows keep their
    lengths and whether they meet column 1.
    """
    n = square.n
    relabel = {square.grid[i][0]: i + 1 for i in range(n)}
    grid = [[relabel[s] for s in row] for row in square.grid]
    order = sorted(range(n), key=lambda j: grid[0][j])
    return LatinSquare(n, tuple(tuple(row[j] for j in order) for row in grid))


def invert_rows(square: LatinSquare) -> LatinSquare:
    """Replace every row by its inverse permutation.

    Swaps reduced and normalised unipotent squares, and maps the parity
    triple (a, b, c) to (a, c, b).
    """
    n = square.n
    rows = []
    for row in square.grid:
        inv = [0] * n
        for j, s in enumerate(row, start=1):
            inv[s - 1] = j
        rows.append(tuple(inv))
    return LatinSquare(n, tuple(rows))


def validate(grid: Iterable[Iterable[int]]) -> LatinSquare:
    """Check a grid and return it as a LatinSquare.

    Cells are scanned in row-major order and the first problem found is
    reported.

    Raises:
        ValueError: non-square grid, symbol out of 1..n, or a duplicate in a
            row or column.
    """
    try:
        rows = [tuple(int(v) for v in row) for row in grid]
    except TypeError:
        raise ValueError('grid must be a list of rows of integers')
    n = len(rows)
    if n == 0:
        raise ValueError('grid is empty')
    for i, row in enumerate(rows, start=1):
        if len(row) != n:
            raise ValueError(f'grid is not square: row {i} has {len(row)} entries, expected {n}')

    row_seen = [set() for _ in range(n)]
    col_seen = [set() for _ in range(n)]
    for i, row in enumerate(rows):
        for j, s in enumerate(row):
            if not 1 <= s <= n:
                raise ValueError(f'symbol out of range: {s} at row {i + 1}, column {j + 1} (expected 1..{n})')
            if s in row_seen[i]:
                raise ValueError(f'row {i + 1} duplicate: symbol {s} repeated at column {j + 1}')
            if s in col_seen[j]:
                raise ValueError(f'column {j + 1} duplicate: symbol {s} repeated at row {i + 1}')
            row_seen[i].add(s)
            col_seen[j].add(s)
    return LatinSquare(n, tuple(rows))


def format_square(square: LatinSquare) -> str:
    lines = [str(square.n)]
    lines.extend(' '.join(str(s) for s in row) for row in square.grid)
    return '\n'.join(lines) + '\n'


def parse_square(text: str) -> LatinSquare:
    """Read the text format: a line with n, then n lines of n symbols.

    Blank lines and lines starting with '#' are ignored.
    """
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith('#')]
    if not lines:
        raise ValueError('square file is empty')
    try:
        n = int(lines[0])
        rows = [[int(tok) for tok in line.split()] for line in lines[1:]]
    except ValueError as e:
        raise ValueError(f'square file is not made of integers: {e}')
    if len(rows) != n:
        raise ValueError(f'square file declares order {n} but has {len(rows)} rows')
    return validate(rows)
