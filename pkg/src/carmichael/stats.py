"""Statistics over an enumerated, sorted list of Carmichael numbers.

Every function here is a pure fold over the input list.  Counts at a cutoff X
include N <= X (X itself is never Carmichael for the decades used).
"""

from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .korselt import CarmichaelNumber, profile
from .search import SearchResult

PRIMES_TO_97 = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def _numbers(results) -> list[CarmichaelNumber]:
    if isinstance(results, SearchResult):
        return results.numbers
    return sorted(results)


def _upto(nums: Sequence[CarmichaelNumber], cutoff: int) -> Sequence[CarmichaelNumber]:
    return nums[: bisect.bisect_right(nums, cutoff, key=lambda c: c.value)]


def k_of(x: int, count: int) -> float:
    """k(X) solving C(X) = X exp(-k log X logloglog X / loglog X)."""
    if x < 16:
        raise ValueError("k(X) needs X >= 16 so that logloglog X > 0")
    if count < 1:
        raise ValueError("k(X) needs a positive count")
    lx = math.log(x)
    llx = math.log(lx)
    return (lx - math.log(count)) * llx / (lx * math.log(llx))


def swift_ratio(count_n: int, count_prev: int) -> float:
    if count_prev == 0:
        raise ZeroDivisionError("previous count is zero")
    return count_n / count_prev


def power_exponent(x: int, count: int) -> float:
    """log C(X) / log X."""
    if count < 1 or x < 10:
        raise ValueError("need count >= 1 and x >= 10")
    return math.log(count) / math.log(x)


def sd_ratio(d: int, s_d: int) -> float:
    """log S_d compared with 2 log 2 (d-1) log(d-1)."""
    return math.log(s_d) / (2 * math.log(2) * (d - 1) * math.log(d - 1))


@dataclass
class StatsReport:
    decade_counts: dict[int, int]
    d_counts: dict[tuple[int, int], int]
    k_values: dict[int, float]
    swift_ratios: dict[int, float]
    power_exponents: dict[int, float]


def count_upto(results, cutoffs: Iterable[int]) -> dict[int, int]:
    vals = [c.value for c in _numbers(results)]
    return {x: bisect.bisect_right(vals, x) for x in cutoffs}


def d_counts(results, cutoffs: Iterable[int]) -> dict[tuple[int, int], int]:
    nums = _numbers(results)
    out = {}
    for x in cutoffs:
        for d, n in Counter(c.d for c in _upto(nums, x)).items():
            out[d, x] = n
    return out


def report(results, max_n: int, min_n: int = 3) -> StatsReport:
    """Decade statistics for X = 10**n, min_n <= n <= max_n."""
    ns = range(min_n, max_n + 1)
    counts = count_upto(results, [10**n for n in ns])
    decade = {n: counts[10**n] for n in ns}
    dc = {(d, n): v for n in ns for (d, _), v in d_counts(results, [10**n]).items()}
    k = {n: k_of(10**n, c) for n, c in decade.items() if c > 0}
    swift = {n: swift_ratio(decade[n], decade[n - 1]) for n in ns if n - 1 in decade and decade[n - 1] > 0}
    power = {n: power_exponent(10**n, c) for n, c in decade.items() if c > 0}
    return StatsReport(decade, dc, k, swift, power)


@dataclass
class ResidueTable:
    modulus: int
    cutoffs: list[int]
    counts: dict[tuple[int, int], int] = field(default_factory=dict)

    def rows(self):
        for c in range(self.modulus):
            yield c, [self.counts.get((c, x), 0) for x in self.cutoffs]


def residue_table(results, m: int, cutoffs: Sequence[int]) -> ResidueTable:
    if m < 2:
        raise ValueError("modulus must be >= 2")
    nums = _numbers(results)
    table = ResidueTable(m, list(cutoffs))
    for x in cutoffs:
        for c, n in Counter(c.value % m for c in _upto(nums, x)).items():
            table.counts[c, x] = n
    return table


@dataclass
class OccurrenceTable:
    primes: list[int]
    mode: str
    cutoffs: list[int]
    counts: dict[tuple[int, int], int] = field(default_factory=dict)

    def rows(self):
        for p in self.primes:
            yield p, [self.counts.get((p, x), 0) for x in self.cutoffs]


def occurrence_table(results, mode: str, cutoffs: Sequence[int], primes: Sequence[int] = PRIMES_TO_97) -> OccurrenceTable:
    """Per-prime counts: any factor (``"any"``) or the least factor (``"least"``)."""
    if mode not in ("any", "least"):
        raise ValueError(f"mode must be 'any' or 'least', not {mode!r}")
    nums = _numbers(results)
    wanted = set(primes)
    table = OccurrenceTable(list(primes), mode, list(cutoffs))
    for x in cutoffs:
        tally = Counter()
        for c in _upto(nums, x):
            if mode == "least":
                tally[c.factors[0]] += 1
            else:
                tally.update(p for p in c.factors if p in wanted)
        for p in primes:
            table.counts[p, x] = tally.get(p, 0)
    return table


def index_filter(results, max_index: int) -> list[tuple[int, CarmichaelNumber]]:
    """(i(N), N) for every N with index below max_index, by index then N."""
    out = []
    for c in _numbers(results):
        i = profile(c).index
        if i < max_index:
            out.append((i, c))
    out.sort()
    return out


def lehmer_filter(results, threshold: Fraction | int) -> list[tuple[Fraction, CarmichaelNumber]]:
    """(l(N), N) with l(N) = (N-1)/phi(N) >= threshold, ascending in l."""
    threshold = Fraction(threshold)
    out = []
    for c in _numbers(results):
        lam = profile(c).lehmer
        if lam >= threshold:
            out.append((lam, c))
    out.sort()
    return out


@dataclass
class RecordSet:
    largest_prime_factor: tuple[int, int] | None
    largest_least_prime_factor: tuple[int, int] | None
    smallest_by_d: dict[int, int]
    sd_ratios: dict[int, float]


def records(results) -> RecordSet:
    nums = _numbers(results)
    if not nums:
        return RecordSet(None, None, {}, {})
    big = max(nums, key=lambda c: (c.factors[-1], -c.value))
    least = max(nums, key=lambda c: (c.factors[0], -c.value))
    smallest: dict[int, int] = {}
    for c in nums:
        smallest.setdefault(c.d, c.value)
    return RecordSet(
        (big.factors[-1], big.value),
        (least.factors[0], least.value),
        dict(sorted(smallest.items())),
        {d: sd_ratio(d, s) for d, s in sorted(smallest.items())},
    )
