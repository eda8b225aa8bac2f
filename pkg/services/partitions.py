"""
Exact counting formulas for derangements, cycle types and odd splits

Every formula has a brute-force oracle over S_m next to it. Probabilities
are Fractions; only the logarithm in split_bound is floating point (mpmath,
96-bit working precision).
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from multiprocessing import Pool
from typing import Dict, Iterator, List, Optional, Tuple

from mpmath import mp, mpf, workprec

from config import parse_log_base

logger = logging.getLogger(__name__)

MAX_CENSUS_ORDER = 9
SPLIT_PRECISION = 96
SPLIT_SLACK = mpf('1e-12')


@dataclass(frozen=True)
class Partition:
    """Cycle type of a permutation of m, stored as (part, multiplicity) pairs."""
    m: int
    multiplicities: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        mult = tuple(sorted((int(p), int(k)) for p, k in self.multiplicities if k))
        if any(p < 1 or k < 0 for p, k in mult):
            raise ValueError(f'bad partition multiplicities {mult}')
        if len({p for p, _ in mult}) != len(mult):
            raise ValueError(f'repeated part size in {mult}')
        if sum(p * k for p, k in mult) != self.m:
            raise ValueError(f'parts {mult} do not sum to {self.m}')
        object.__setattr__(self, 'multiplicities', mult)

    @classmethod
    def from_parts(cls, parts) -> 'Partition':
        parts = list(parts)
        return cls(sum(parts), tuple(Counter(parts).items()))

    @classmethod
    def parse(cls, text: str) -> 'Partition':
        """Read '2^a 3^b ...' (any order; a bare '5' means 5^1)."""
        counts = Counter()
        for token in text.replace(',', ' ').split():
            part, _, exp = token.partition('^')
            try:
                counts[int(part)] += int(exp) if exp else 1
            except ValueError:
                raise ValueError(f'cannot read partition token {token!r}')
        return cls(sum(p * k for p, k in counts.items()), tuple(counts.items()))

    def __str__(self) -> str:
        return ' '.join(f'{p}^{k}' for p, k in self.multiplicities)

    @property
    def parts(self) -> Tuple[int, ...]:
        """Parts, largest first."""
        out = []
        for p, k in reversed(self.multiplicities):
            out.extend([p] * k)
        return tuple(out)

    def multiplicity(self, part: int) -> int:
        return dict(self.multiplicities).get(part, 0)

    @property
    def is_derangement_type(self) -> bool:
        return self.multiplicity(1) == 0

    def odd_part_count(self) -> int:
        return sum(k for p, k in self.multiplicities if p % 2)


def partitions_P(m: int) -> Iterator[Partition]:
    """Partitions of m into parts >= 2: largest part descending, then lexicographic."""
    if m < 0:
        raise ValueError(f'm must be non-negative, got {m}')

    def build(rest: int, cap: int) -> Iterator[Tuple[int, ...]]:
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, cap), 1, -1):
            for tail in build(rest - first, first):
                yield (first,) + tail

    for parts in build(m, m):
        yield Partition.from_parts(parts)


@lru_cache(maxsize=None)
def partition_count(m: int) -> int:
    """p(m), the number of all partitions of m."""
    table = [1] + [0] * m
    for part in range(1, m + 1):
        for k in range(part, m + 1):
            table[k] += table[k - part]
    return table[m]


def partition_count_P(m: int) -> int:
    """|P(m)| = p(m) - p(m-1): dropping one part 1 is a bijection onto the rest."""
    if m == 0:
        return 1
    return partition_count(m) - partition_count(m - 1)


def gamma(lam: Partition) -> int:
    """Number of derangements of m with cycle type lam."""
    if not lam.is_derangement_type:
        raise ValueError(f'{lam} has a part of size 1 and is not a derangement type')
    denom = 1
    for p, k in lam.multiplicities:
        denom *= math.factorial(k) * p ** k
    return math.factorial(lam.m) // denom


@lru_cache(maxsize=None)
def derangement_count(m: int) -> int:
    """D_m = (m-1)(D_{m-1} + D_{m-2})."""
    if m == 0:
        return 1
    if m == 1:
        return 0
    return (m - 1) * (derangement_count(m - 1) + derangement_count(m - 2))


def _cycle_lengths(perm: Tuple[int, ...]) -> Tuple[int, ...]:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def _census_shard(args) -> Counter:
    m, first = args
    rest = [v for v in range(m) if v != first]
    counts = Counter()
    for tail in permutations(rest):
        counts[_cycle_lengths((first,) + tail)] += 1
    return counts


def cycle_type_census(m: int, workers: int = 1) -> Dict[Tuple[int, ...], int]:
    """Brute force over all m! permutations: cycle type -> count."""
    if not 0 <= m <= MAX_CENSUS_ORDER:
        raise ValueError(f'size guard: brute-force censuses need 0 <= m <= {MAX_CENSUS_ORDER}, got {m}')
    return dict(_cached_census(m, workers))


@lru_cache(maxsize=None)
def _cached_census(m: int, workers: int) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    if m == 0:
        return (((), 1),)
    jobs = [(m, first) for first in range(m)]
    if workers > 1:
        with Pool(processes=workers) as pool:
            shards = pool.map(_census_shard, jobs)
    else:
        shards = [_census_shard(job) for job in jobs]
    total = Counter()
    for shard in shards:
        total.update(shard)
    return tuple(sorted(total.items()))


def derangement_census(m: int, workers: int = 1) -> Dict[Partition, int]:
    """Derangements of m binned by cycle type."""
    return {
        Partition.from_parts(lengths): count
        for lengths, count in cycle_type_census(m, workers).items()
        if 1 not in lengths
    }


def _log(n: int, base: float) -> float:
    if base == 2:
        return math.log2(n)
    if base == 10:
        return math.log10(n)
    return math.log(n, base)


def _threshold(n: int, log_base) -> int:
    return math.ceil(n - _log(n, parse_log_base(log_base)))


def long_cycle_prob(n: int, log_base=math.e) -> Fraction:
    """Probability that a random permutation of n has a cycle of length >= n - log n.

    Raises:
        ValueError: unless ⌈n - log n⌉ > n/2, where at most one such cycle fits
            and the sum of 1/i is a probability rather than an expectation.
    """
    if n < 1:
        raise ValueError(f'n must be positive, got {n}')
    t = _threshold(n, log_base)
    if 2 * t <= n:
        raise ValueError(f'⌈n - log n⌉ = {t} is not above n/2 = {n / 2}; more than one long cycle could occur')
    return sum((Fraction(1, i) for i in range(max(t, 1), n + 1)), Fraction(0))


def long_cycle_census(n: int, log_base=math.e) -> Fraction:
    """Brute-force version of long_cycle_prob."""
    t = _threshold(n, log_base)
    census = cycle_type_census(n)
    hits = sum(count for lengths, count in census.items() if lengths and lengths[0] >= t)
    return Fraction(hits, math.factorial(n))


def wilf_no_odd(n: int) -> Fraction:
    """Proportion of permutations of n with no odd cycle: 2^-n n! / (n/2)!²."""
    if n % 2:
        logger.info(f'wilf_no_odd({n}): odd order forces an odd cycle, proportion is 0')
        return Fraction(0)
    return Fraction(math.comb(n, n // 2), 2 ** n)


def no_odd_census(n: int) -> Fraction:
    census = cycle_type_census(n)
    hits = sum(count for lengths, count in census.items() if all(p % 2 == 0 for p in lengths))
    return Fraction(hits, math.factorial(n))


@dataclass
class OddCycleCensus:
    m: int
    derangements_only: bool
    histogram: Dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.histogram.values())

    @property
    def at_most_one_fraction(self) -> Fraction:
        if not self.total:
            return Fraction(0)
        return Fraction(self.histogram.get(0, 0) + self.histogram.get(1, 0), self.total)

    @property
    def bound_shape(self) -> float:
        """m^(-1/2) log m, for eyeballing against at_most_one_fraction."""
        return math.log(self.m) / math.sqrt(self.m) if self.m > 1 else 0.0


def odd_cycle_census(m: int, derangements_only: bool = True, workers: int = 1) -> OddCycleCensus:
    """Histogram of the number of odd cycles over S_m (or its derangements)."""
    histogram = Counter()
    for lengths, count in cycle_type_census(m, workers).items():
        if derangements_only and 1 in lengths:
            continue
        histogram[sum(1 for p in lengths if p % 2)] += count
    return OddCycleCensus(m, derangements_only, dict(sorted(histogram.items())))


# ---------------------------------------------------------------------------
# Splitting an even part into two odd parts
# ---------------------------------------------------------------------------

@dataclass
class Split:
    a: int
    b: int
    mu: Partition


@dataclass
class SplitSet:
    lam: Partition
    z: int
    splits: List[Split] = field(default_factory=list)
    excluded: List[Tuple[int, int, str]] = field(default_factory=list)

    @property
    def w(self) -> int:
        return (self.z - 3) // 4

    def __len__(self) -> int:
        return len(self.splits)

    def __iter__(self):
        return iter((s.a, s.b, s.mu) for s in self.splits)


def _split_partition(lam: Partition, z: int, a: int) -> Partition:
    counts = Counter(dict(lam.multiplicities))
    counts[z] -= 1
    counts[a] += 1
    counts[z - a] += 1
    return Partition(lam.m, tuple(counts.items()))


def _check_split_input(lam: Partition, z: int):
    if z % 2:
        raise ValueError(f'z must be even, got {z}')
    odd = [p for p in lam.parts if p % 2]
    if odd:
        raise ValueError(f'{lam} has odd parts {odd}; only all-even partitions are split')
    if not lam.is_derangement_type:
        raise ValueError(f'{lam} is not in P(m)')
    if lam.multiplicity(z) == 0:
        raise ValueError(f'{lam} has no part of size {z}')


def split_set(lam: Partition, z: int) -> SplitSet:
    """All μ in P(m) from splitting one part z into odd parts a < z - a.

    a = 1 would leave P(m) and a = z - a is outside the strict range, so both
    are listed in excluded instead. len(result) == ⌊(z - 3)/4⌋.
    """
    _check_split_input(lam, z)
    result = SplitSet(lam, z)
    result.excluded.append((1, z - 1, 'part of size 1 leaves P(m)'))
    for a in range(3, z // 2 + 1, 2):
        if a < z - a:
            result.splits.append(Split(a, z - a, _split_partition(lam, z, a)))
        else:
            result.excluded.append((a, z - a, 'equal split'))
    return result


def gamma_ratio(lam: Partition, z: int, a: int, allow_equal: bool = False) -> Fraction:
    """γ(μ)/γ(λ) for μ = λ with one part z split into (a, z - a).

    Equals zλ_z / (a(z - a)). With allow_equal the split a = z - a is accepted,
    where μ_a = 2 and the ratio halves.
    """
    _check_split_input(lam, z)
    if a % 2 == 0 or a < 3 or a > z - a:
        raise ValueError(f'a must be odd with 3 <= a <= z - a, got a={a}, z={z}')
    if a == z - a and not allow_equal:
        raise ValueError(f'equal split a = z - a = {a} is outside the strict range')
    if lam.multiplicity(a) or lam.multiplicity(z - a):
        raise ValueError(f'{lam} already has a part {a} or {z - a}')
    ratio = Fraction(z * lam.multiplicity(z), a * (z - a))
    if a == z - a:
        ratio /= 2
    return ratio


def split_sum_exact(z: int) -> Fraction:
    """Σ_{a=1}^{w} 1/((2a+1)(z-2a-1)) with w = ⌊(z-3)/4⌋."""
    w = (z - 3) // 4
    return sum((Fraction(1, (2 * a + 1) * (z - 2 * a - 1)) for a in range(1, w + 1)), Fraction(0))


class _OddReciprocals:
    """Prefix sums of 1/k over odd k, grown on demand."""

    def __init__(self):
        self.sums = [mpf(0)]  # sums[i] = Σ_{j < i} 1/(2j+1)

    def upto(self, k: int):
        """Σ 1/j over odd j <= k."""
        count = (k + 1) // 2 if k > 0 else 0
        while len(self.sums) <= count:
            j = len(self.sums) - 1
            self.sums.append(self.sums[-1] + mpf(1) / (2 * j + 1))
        return self.sums[count]


_odd_reciprocals = _OddReciprocals()


@dataclass
class SplitBound:
    z: int
    w: int
    sum: object
    bound: object

    @property
    def holds(self) -> bool:
        return self.sum >= self.bound - SPLIT_SLACK

    def __str__(self) -> str:
        return (f'z={self.z} w={self.w} sum={mp.nstr(self.sum, 15)} '
                f'bound={mp.nstr(self.bound, 15)} {"PASS" if self.holds else "FAIL"}')


def split_bound(z: int) -> SplitBound:
    """The split sum against its integral lower bound (1/2z) log((2w+1)(z-3)/(3(z-2w-1))).

    Uses 1/((2a+1)(z-2a-1)) = (1/z)(1/(2a+1) + 1/(z-2a-1)), so the sum is a
    difference of odd-reciprocal prefix sums.
    """
    if z % 2 or z < 10:
        raise ValueError(f'split_bound needs an even z >= 10, got {z}')
    w = (z - 3) // 4
    with workprec(SPLIT_PRECISION):
        odd = _odd_reciprocals
        small = odd.upto(2 * w + 1) - odd.upto(1)
        large = odd.upto(z - 3) - odd.upto(z - 2 * w - 3)
        total = (small + large) / z
        bound = mp.log(mpf((2 * w + 1) * (z - 3)) / (3 * (z - 2 * w - 1))) / (2 * z)
    return SplitBound(z, w, total, bound)


def split_bound_sweep(z_max: int = 10_000, z_min: int = 10) -> List[int]:
    """Even z in [z_min, z_max] where the bound fails (expected: none)."""
    failures = [z for z in range(z_min + z_min % 2, z_max + 1, 2) if not split_bound(z).holds]
    if failures:
        logger.warning(f'split bound fails at {len(failures)} values, first {failures[:5]}')
    return failures
