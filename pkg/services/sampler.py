"""
Uniform random Latin squares and Monte-Carlo estimates on the last two rows

Squares come from a lazy Jacobson-Matthews chain started at the cyclic
square. Sample k of a run with master seed s uses its own generator derived
from (s, k), so results do not depend on the number of workers.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sp_stats

from services.cycles import find_switchable_odd, scanned_pairs
from services.enumeration import EVENT_NAMES, LatinClass, enumerate_squares, square_events, tally
from services.latin_square import LatinSquare, reduce

logger = logging.getLogger(__name__)


def default_steps(n: int) -> int:
    """⌈n³ ln n⌉ proper-state visits per sample."""
    return max(1, math.ceil(n ** 3 * math.log(n)))


def sample_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


class ChainState:
    """Incidence cube of a (possibly improper) Latin square.

    cells[r, c, s] is 1 when cell (r, c) holds symbol s. Every line of the
    cube sums to 1; an improper state has exactly one entry equal to -1.
    """

    def __init__(self, cells: np.ndarray, improper: Optional[Tuple[int, int, int]] = None):
        self.cells = cells
        self.n = cells.shape[0]
        self.improper = improper

    @classmethod
    def from_square(cls, square: LatinSquare) -> 'ChainState':
        n = square.n
        cells = np.zeros((n, n, n), dtype=np.int8)
        for i, row in enumerate(square.grid):
            for j, s in enumerate(row):
                cells[i, j, s - 1] = 1
        return cls(cells)

    @classmethod
    def cyclic(cls, n: int) -> 'ChainState':
        return cls.from_square(LatinSquare.cyclic(n))

    @property
    def proper(self) -> bool:
        return self.improper is None

    def line_sums_ok(self) -> bool:
        cube = self.cells
        if not all(np.all(cube.sum(axis=axis) == 1) for axis in range(3)):
            return False
        negatives = np.argwhere(cube < 0)
        if self.improper is None:
            return len(negatives) == 0 and bool(np.all(cube >= 0))
        return len(negatives) == 1 and tuple(int(v) for v in negatives[0]) == self.improper

    def step(self, rng: np.random.Generator):
        """One lazy move: hold with probability 1/2, otherwise move."""
        if rng.random() < 0.5:
            return
        cube = self.cells
        n = self.n
        if self.improper is None:
            while True:
                r, c, s = (int(v) for v in rng.integers(n, size=3))
                if cube[r, c, s] == 0:
                    break
            r2 = int(np.flatnonzero(cube[:, c, s] == 1)[0])
            c2 = int(np.flatnonzero(cube[r, :, s] == 1)[0])
            s2 = int(np.flatnonzero(cube[r, c, :] == 1)[0])
        else:
            r, c, s = self.improper
            r2 = int(rng.choice(np.flatnonzero(cube[:, c, s] == 1)))
            c2 = int(rng.choice(np.flatnonzero(cube[r, :, s] == 1)))
            s2 = int(rng.choice(np.flatnonzero(cube[r, c, :] == 1)))

        cube[r, c, s] += 1
        cube[r, c2, s] -= 1
        cube[r2, c, s] -= 1
        cube[r, c, s2] -= 1
        cube[r2, c2, s] += 1
        cube[r2, c, s2] += 1
        cube[r, c2, s2] += 1
        cube[r2, c2, s2] -= 1
        self.improper = (r2, c2, s2) if cube[r2, c2, s2] < 0 else None

    def run(self, steps: int, rng: np.random.Generator):
        """Move until the chain has been seen in a proper state `steps` times.

        Moves that end improper do not count, so the result is the chain
        watched on proper states only, whose stationary law is uniform.
        """
        visits = 0
        while visits < steps:
            self.step(rng)
            if self.improper is None:
                visits += 1

    def to_square(self) -> LatinSquare:
        if self.improper is not None:
            raise ValueError('improper chain state has no Latin square')
        symbols = self.cells.argmax(axis=2) + 1
        return LatinSquare(self.n, tuple(tuple(int(s) for s in row) for row in symbols))


def sample(n: int, seed: int, steps: Optional[int] = None, index: int = 0) -> LatinSquare:
    """A random Latin square of order n; fixed by (n, seed, steps, index)."""
    if n < 2:
        raise ValueError(f'sampling needs n >= 2, got {n}')
    state = ChainState.cyclic(n)
    state.run(default_steps(n) if steps is None else steps, sample_rng(seed, index))
    return state.to_square()


def _map_samples(fn, jobs: List[tuple], workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with Pool(processes=workers) as pool:
            return pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
    return [fn(job) for job in jobs]


def _sample_grid(args) -> Tuple[Tuple[int, ...], ...]:
    n, seed, steps, index = args
    return sample(n, seed, steps, index).grid


def sample_grids(n: int, samples: int, seed: int, steps: Optional[int] = None,
                 workers: int = 1) -> List[Tuple[Tuple[int, ...], ...]]:
    """Grids of samples 0..samples-1 of one run, in index order."""
    jobs = [(n, seed, steps, k) for k in range(samples)]
    return _map_samples(_sample_grid, jobs, workers)


def _sample_events(args) -> Tuple[bool, ...]:
    n, seed, steps, index, log_base = args
    return square_events(sample(n, seed, steps, index), log_base)


# ---------------------------------------------------------------------------
# Uniformity
# ---------------------------------------------------------------------------

@dataclass
class UniformityReport:
    n: int
    samples: int
    seed: int
    pooled: bool
    bins: int
    dof: int
    statistic: float
    p_value: float

    def passed(self, threshold: float = 1e-3) -> bool:
        return self.p_value > threshold

    def to_dict(self) -> Dict:
        return {
            'n': self.n, 'samples': self.samples, 'seed': self.seed, 'pooled': self.pooled,
            'bins': self.bins, 'dof': self.dof, 'statistic': self.statistic, 'p_value': self.p_value,
        }


@lru_cache(maxsize=None)
def _parity_law(n: int) -> Dict[str, float]:
    t = tally(n, LatinClass.ALL)
    return {k: v / t.total for k, v in t.counts.items() if v}


def uniformity_test(n: int, samples: int, seed: int, steps: Optional[int] = None,
                    workers: int = 1) -> UniformityReport:
    """Chi-square test of sampled squares against the uniform law.

    n = 4 uses one bin per square; n = 5 pools squares by parity triple.
    """
    if n not in (4, 5):
        raise ValueError(f'size guard: uniformity_test needs n = 4 or 5, got {n}')
    grids = sample_grids(n, samples, seed, steps, workers)

    if n == 4:
        universe = [sq.grid for sq in enumerate_squares(n, LatinClass.ALL)]
        counts = Counter(grids)
        observed = np.array([counts.get(g, 0) for g in universe], dtype=float)
        statistic, p_value = sp_stats.chisquare(observed)
        pooled = False
    else:
        law = _parity_law(n)
        counts = Counter(str(LatinSquare(n, g).parity_triple()) for g in grids)
        keys = sorted(law)
        observed = np.array([counts.get(k, 0) for k in keys], dtype=float)
        expected = np.array([law[k] * samples for k in keys])
        statistic, p_value = sp_stats.chisquare(observed, expected)
        if sum(counts.values()) != observed.sum():
            # a triple the enumeration never produced was sampled
            statistic, p_value = math.inf, 0.0
        pooled = True
    report = UniformityReport(n, samples, seed, pooled, len(observed), len(observed) - 1,
                              float(statistic), float(p_value))
    logger.info(f'uniformity n={n}: chi2={report.statistic:.3f} dof={report.dof} p={report.p_value:.4g}')
    return report


# ---------------------------------------------------------------------------
# Last-two-rows events
# ---------------------------------------------------------------------------

@dataclass
class EventStat:
    occurrences: int
    samples: int

    @property
    def estimate(self) -> float:
        return self.occurrences / self.samples if self.samples else 0.0

    @property
    def stderr(self) -> float:
        if not self.samples:
            return 0.0
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.samples)


@dataclass
class SampleStats:
    n: int
    samples: int
    seed: int
    events: Dict[str, EventStat] = field(default_factory=dict)

    def rows(self) -> List[Tuple]:
        """CSV rows: n, samples, seed, event, occurrences, estimate, stderr."""
        return [
            (self.n, self.samples, self.seed, name, ev.occurrences, f'{ev.estimate:.6f}', f'{ev.stderr:.6f}')
            for name, ev in self.events.items()
        ]


def last_two_rows_stats(n: int, samples: int, seed: int, steps: Optional[int] = None,
                        workers: int = 1, log_base: float = math.e) -> SampleStats:
    """Estimate the five last-two-rows events over random squares of order n.

    Events, all on rows (n-1, n):
        long_cycle            a cycle of length >= n - log n
        few_cycles            fewer than 9√n cycles
        odd_cycle             some cycle of odd length
        switchable_odd_cycle  an odd cycle avoiding column 1
        extended_domain       the reduced square is in extended_involution's domain
    """
    if n < 3:
        raise ValueError(f'last-two-rows statistics need n >= 3, got {n}')
    jobs = [(n, seed, steps, k, log_base) for k in range(samples)]
    flags = _map_samples(_sample_events, jobs, workers)
    result = SampleStats(n, samples, seed)
    for k, name in enumerate(EVENT_NAMES):
        result.events[name] = EventStat(sum(1 for f in flags if f[k]), samples)
    logger.info(f'stats n={n} samples={samples} seed={seed}: '
                + ', '.join(f'{k}={v.estimate:.4f}' for k, v in result.events.items()))
    return result


@dataclass
class TrendCheck:
    run: int
    violations: List[str] = field(default_factory=list)


@dataclass
class TrendReport:
    ns: Tuple[int, ...]
    samples: int
    seed: int
    stats: List[List[SampleStats]] = field(default_factory=list)
    checks: List[TrendCheck] = field(default_factory=list)

    @property
    def status(self) -> str:
        """PASS, FLAGGED (isolated violations) or FAIL (3 violating runs in a row)."""
        streak = 0
        flagged = False
        for check in self.checks:
            if check.violations:
                flagged = True
                streak += 1
                if streak >= 3:
                    return 'FAIL'
            else:
                streak = 0
        return 'FLAGGED' if flagged else 'PASS'


def _pooled(a: EventStat, b: EventStat) -> float:
    return math.sqrt(a.stderr ** 2 + b.stderr ** 2)


def trend_report(ns: Sequence[int] = (10, 20, 40), samples: int = 1000, seed: int = 0, runs: int = 1,
                 steps: Optional[int] = None, workers: int = 1, log_base: float = math.e) -> TrendReport:
    """Soft monotonicity checks across orders.

    long_cycle should not increase and switchable_odd_cycle should not
    decrease with n, each up to 2 pooled standard errors; few_cycles should
    stay at or above 0.99. Run r uses seed + r.
    """
    ns = tuple(sorted(ns))
    report = TrendReport(ns, samples, seed)
    for run in range(runs):
        per_n = [last_two_rows_stats(n, samples, seed + run, steps, workers, log_base) for n in ns]
        check = TrendCheck(run)
        for lo, hi in zip(per_n, per_n[1:]):
            a, b = lo.events['long_cycle'], hi.events['long_cycle']
            if b.estimate > a.estimate + 2 * _pooled(a, b):
                check.violations.append(f'long_cycle rises from n={lo.n} to n={hi.n}')
            a, b = lo.events['switchable_odd_cycle'], hi.events['switchable_odd_cycle']
            if b.estimate < a.estimate - 2 * _pooled(a, b):
                check.violations.append(f'switchable_odd_cycle falls from n={lo.n} to n={hi.n}')
        for st in per_n:
            if st.events['few_cycles'].estimate < 0.99:
                check.violations.append(f'few_cycles below 0.99 at n={st.n}')
        if check.violations:
            logger.warning(f'trend run {run}: ' + '; '.join(check.violations))
        report.stats.append(per_n)
        report.checks.append(check)
    return report


def _pair_flags(args) -> Tuple[bool, ...]:
    n, seed, steps, index = args
    square = reduce(sample(n, seed, steps, index))
    return tuple(find_switchable_odd(square, x, y) is not None for x, y in scanned_pairs(n))


def pair_correlation(n: int, samples: int, seed: int, steps: Optional[int] = None,
                     workers: int = 1) -> Dict:
    """Switchability of each scanned row pair and the correlations between pairs.

    Reported only; near-independence is not asserted anywhere.
    """
    if n < 5:
        raise ValueError(f'pair correlations need at least two scanned pairs (n >= 5), got {n}')
    jobs = [(n, seed, steps, k) for k in range(samples)]
    flags = np.array(_map_samples(_pair_flags, jobs, workers), dtype=float)
    pairs = scanned_pairs(n)
    with np.errstate(invalid='ignore', divide='ignore'):
        corr = np.corrcoef(flags, rowvar=False) if len(pairs) > 1 else np.ones((1, 1))
    return {
        'n': n,
        'samples': samples,
        'seed': seed,
        'pairs': [list(p) for p in pairs],
        'frequencies': [float(v) for v in flags.mean(axis=0)],
        'correlation': [[None if np.isnan(v) else float(v) for v in row] for row in np.atleast_2d(corr)],
    }
