"""Enumeration of Carmichael numbers up to a bound.

The search is split three ways by the largest prime factor p_d:

* principal search (p_d <= large_prime_floor): depth-first over increasing
  prime prefixes p_1 < ... < p_r.  A prefix with product P and
  L = lcm(p_i - 1) can only be completed by a cofactor Q = P**-1 mod L.  When
  few such Q remain below bound/P they are tested directly; otherwise the
  last prime is read off the divisors of P - 1 or the prefix is extended.
  Three-factor numbers are produced by the pair completion, which solves for
  (q, r) given p_1 alone.
* large-prime scan (large_prime_floor < p_d <= large_prime_ceiling): for each
  prime p, cofactors M = 1 mod (p - 1) with M <= bound/p are factored.

Candidate numbers are screened with a base-2 Fermat test before factoring.
Carmichael numbers always pass it, so the screen never loses a solution; every
emitted number is verified by its factorization and Korselt's criterion.
"""

from __future__ import annotations

import bisect
import functools
import logging
import math
import multiprocessing
from collections import Counter
from dataclasses import dataclass, field
from math import gcd, isqrt

from .arith import (
    NAT_LIMIT,
    divisors_from,
    factorize,
    is_prime,
    primes_up_to,
    squarefree_factors,
)
from .checkpoint import Checkpoint
from .korselt import CarmichaelNumber, is_carmichael, korselt_holds

log = logging.getLogger(__name__)

DEFAULT_FLOOR = 10_000
DEFAULT_EARLY_TERM = 10
# above this many progression steps the last prime is found from divisors of P-1
_PROGRESSION_MAX = 64
_LP_CHUNK = 256

LAST_LEVEL = "last-level"
CONGRUENCE = "congruence"
PAIR_D3 = "pair-d3"
LARGE_PRIME = "large-prime"
STRATEGIES = (LAST_LEVEL, CONGRUENCE, PAIR_D3, LARGE_PRIME)


class SearchInterrupted(Exception):
    """Run stopped before all work units finished; the checkpoint is valid."""


@dataclass(frozen=True)
class SearchConfig:
    """Search parameters.

    ``large_prime_floor`` (B1) and ``large_prime_ceiling`` (B2) default to
    ``min(10**4, isqrt(bound))`` and ``max(isqrt(bound), B1)``.  The largest
    prime factor of a Carmichael number N is below sqrt(N), so B2 must reach
    isqrt(bound) whenever B1 does not.
    """

    bound: int
    d_min: int = 3
    d_max: int = 11
    large_prime_floor: int | None = None
    large_prime_ceiling: int | None = None
    early_term_ratio: int = DEFAULT_EARLY_TERM
    use_pair_d3: bool = False

    def __post_init__(self):
        if not 1 <= self.bound < NAT_LIMIT:
            raise ValueError(f"bound {self.bound} outside [1, 2**64)")
        if not 3 <= self.d_min <= self.d_max:
            raise ValueError(f"need 3 <= d_min <= d_max, got {self.d_min}..{self.d_max}")
        if self.early_term_ratio < 1:
            raise ValueError("early_term_ratio must be >= 1")
        root = isqrt(self.bound)
        b1 = self.large_prime_floor
        if b1 is None:
            b1 = min(DEFAULT_FLOOR, root)
        b2 = self.large_prime_ceiling
        if b2 is None:
            b2 = max(root, b1)
        if not 1 <= b1 <= b2 <= max(self.bound, 1):
            raise ValueError(f"need 1 <= B1 <= B2 <= bound, got B1={b1} B2={b2}")
        if b2 < root:
            raise ValueError(
                f"large_prime_ceiling {b2} below isqrt(bound)={root}: "
                "Carmichael numbers with a larger prime factor would be missed"
            )
        object.__setattr__(self, "large_prime_floor", b1)
        object.__setattr__(self, "large_prime_ceiling", b2)

    def describe(self) -> dict:
        return {
            "bound": self.bound,
            "d_min": self.d_min,
            "d_max": self.d_max,
            "large_prime_floor": self.large_prime_floor,
            "large_prime_ceiling": self.large_prime_ceiling,
            "early_term_ratio": self.early_term_ratio,
            "use_pair_d3": self.use_pair_d3,
        }


@dataclass(frozen=True)
class SearchPrefix:
    primes: tuple[int, ...]
    P: int
    L: int

    @classmethod
    def of(cls, *primes: int) -> SearchPrefix:
        L = 1
        for p in primes:
            L = L * (p - 1) // gcd(L, p - 1)
        return cls(tuple(primes), math.prod(primes), L)

    @property
    def last(self) -> int:
        return self.primes[-1] if self.primes else 2


@dataclass
class SearchResult:
    numbers: list[CarmichaelNumber]
    strategy: dict[int, str] = field(default_factory=dict)
    stats: Counter = field(default_factory=Counter)

    def values(self) -> list[int]:
        return [c.value for c in self.numbers]

    def attribution(self) -> dict[str, int]:
        counts = Counter(self.strategy.values())
        return {s: counts.get(s, 0) for s in STRATEGIES}


def _first_in_class(q0: int, L: int, lo: int) -> int:
    """Least q >= lo with q = q0 mod L."""
    return q0 + (lo - q0 + L - 1) // L * L if lo > q0 else q0


def _next_prime(p: int) -> int:
    p += 1 + (p & 1) if p > 2 else 1
    while not is_prime(p):
        p += 2
    return p


# --------------------------------------------------------------------------
# public single-step operations


def extend_prefix(prefix: SearchPrefix, p: int, cfg: SearchConfig) -> SearchPrefix | None:
    """Append p to the prefix, or None if no Carmichael number <= bound can result."""
    P, L = prefix.P, prefix.L
    if p <= prefix.last or p == 2 or P % p == 0:
        return None
    # p | L or gcd(p - 1, P) > 1 would put p_i | N and p_i | N - 1 together
    if L % p == 0 or gcd(p - 1, P) != 1:
        return None
    Pp = P * p
    if Pp * _next_prime(p) > cfg.bound:
        return None
    Lp = L * (p - 1) // gcd(L, p - 1)
    q = _first_in_class(pow(Pp, -1, Lp), Lp, p + 1)
    if Pp * q > cfg.bound:
        return None
    return SearchPrefix(prefix.primes + (p,), Pp, Lp)


def complete_last(
    prefix: SearchPrefix, cfg: SearchConfig, limit: int | None = None
) -> list[CarmichaelNumber]:
    """Numbers P * p with p - 1 a divisor of P - 1.

    ``limit`` caps p (the principal search passes B1).
    """
    if len(prefix.primes) < 2:
        raise ValueError("last-level completion needs at least two primes")
    P, L, last = prefix.P, prefix.L, prefix.last
    hi = cfg.bound // P
    if limit is not None:
        hi = min(hi, limit)
    out = []
    for f in divisors_from(factorize(P - 1)):
        p = f + 1
        if p <= last:
            continue
        if p > hi:
            break
        if (P * p - 1) % L == 0 and is_prime(p):
            out.append(CarmichaelNumber(P * p, prefix.primes + (p,)))
    return out


def complete_tail_by_congruence(prefix: SearchPrefix, cfg: SearchConfig) -> list[CarmichaelNumber]:
    """All completions P * Q <= bound, found by factoring each Q = P**-1 mod L."""
    if gcd(prefix.P, prefix.L) != 1:
        return []
    found = _congruence(prefix.primes, prefix.P, prefix.L, cfg.bound, cfg.d_min, cfg.d_max, None, False)
    return [c for c, _ in found]


def _congruence(primes, P, L, X, d_min, d_max, limit, skip_d3, stats=None):
    last = primes[-1]
    r = len(primes)
    R = X // P
    q = _first_in_class(pow(P, -1, L), L, last + 1)
    out = []
    tested = 0
    while q <= R:
        N = P * q
        tested += 1
        if pow(2, N - 1, N) == 1:
            fs = squarefree_factors(q)
            if fs and fs[0] > last and (limit is None or fs[-1] <= limit):
                d = r + len(fs)
                if d_min <= d <= d_max and not (skip_d3 and d == 3) and korselt_holds(N, fs) \
                        and korselt_holds(N, primes):
                    out.append((CarmichaelNumber(N, tuple(primes) + tuple(fs)), CONGRUENCE))
        q += L
    if stats is not None:
        stats["congruence_candidates"] += tested
    return out


def complete_pair_d3(p1: int, cfg: SearchConfig) -> list[CarmichaelNumber]:
    """All Carmichael numbers p1 * q * r <= bound with p1 < q < r.

    Write p1*q - 1 = a*(r - 1).  Since r > q, 2 <= a < p1, and reducing
    q - 1 | p1*r - 1 modulo q - 1 gives q - 1 | (p1 + a)(p1 - 1).  So for each
    a the candidates q come from divisors of (p1 + a)(p1 - 1) and r follows.
    """
    p, X = p1, cfg.bound
    if p < 3 or p * p * p > X or not is_prime(p):
        return []
    qcap = isqrt(X // p)
    base = dict(factorize(p - 1))
    out = []
    for a in range(2, p):
        # r - 1 ~ p*q/a and p*q*r <= X bound q above
        qmax = min(qcap, isqrt(a * X) // p + 1)
        if qmax <= p:
            continue
        fac = dict(base)
        for s, e in factorize(p + a):
            fac[s] = fac.get(s, 0) + e
        cap = qmax - 1
        divs = [1]
        for s, e in fac.items():
            pows = [s**k for k in range(1, e + 1)]
            divs += [f * t for f in divs for t in pows if f * t <= cap]
        # p*q = 1 mod a with q = f + 1
        want = (1 - p) * pow(p, -1, a) % a
        for f in divs:
            if f < p or f % a != want:
                continue
            q = f + 1
            r = (p * q - 1) // a + 1
            N = p * q * r
            if r <= q or N > X or (N - 1) % f or (N - 1) % (p - 1):
                continue
            if is_prime(q) and is_prime(r):
                out.append(CarmichaelNumber(N, (p, q, r)))
    out.sort()
    return out


def large_prime_scan(
    cfg: SearchConfig, lo: int | None = None, hi: int | None = None, stats: Counter | None = None
) -> list[CarmichaelNumber]:
    """Numbers M * p with p prime in (B1, B2] and M = 1 mod (p - 1).

    ``lo``/``hi`` narrow the prime range further (work-unit slicing).
    """
    return sorted(c for c, _ in _large_range(cfg, lo, hi, stats))


_primes_cached = functools.lru_cache(maxsize=4)(primes_up_to)


def _min_product(count: int, after: int = 2) -> int:
    prod, p = 1, after
    for _ in range(count):
        p = _next_prime(p)
        prod *= p
    return prod


def _large_range(cfg, lo=None, hi=None, stats=None):
    X = cfg.bound
    b1 = cfg.large_prime_floor if lo is None else max(lo, cfg.large_prime_floor)
    b2 = min(cfg.large_prime_ceiling, isqrt(X)) if hi is None else min(hi, cfg.large_prime_ceiling, isqrt(X))
    if b2 <= b1:
        return []
    m_min = max(15, _min_product(cfg.d_min - 1))
    out = []
    tested = 0
    ps = _primes_cached(isqrt(X))
    for p in ps[bisect.bisect_right(ps, b1) : bisect.bisect_right(ps, b2)]:
        step = p - 1
        lim = X // p
        k0 = max(1, (m_min - 1 + step - 1) // step)
        for M in range(1 + k0 * step, lim + 1, step):
            N = M * p
            tested += 1
            if pow(2, N - 1, N) != 1:
                continue
            fs = squarefree_factors(M)
            if not fs or fs[-1] >= p or not cfg.d_min <= len(fs) + 1 <= cfg.d_max:
                continue
            if korselt_holds(N, fs):
                out.append((CarmichaelNumber(N, tuple(fs) + (p,)), LARGE_PRIME))
    if stats is not None:
        stats["large_prime_candidates"] += tested
    return out


# --------------------------------------------------------------------------
# principal search


class _Principal:
    def __init__(self, cfg: SearchConfig):
        self.cfg = cfg
        self.X = cfg.bound
        self.limit = cfg.large_prime_floor
        self.ps = [p for p in primes_up_to(min(self.limit, isqrt(self.X))) if p > 2]
        self.pos = {p: i for i, p in enumerate(self.ps)}
        self.stats = Counter()

    def _room(self, P: int, k: int, need: int) -> bool:
        """P * ps[k] * (the next ``need`` primes) <= X."""
        ps = self.ps
        if k + need >= len(ps):
            return False
        prod = P
        for i in range(k, k + need + 1):
            prod *= ps[i]
        return prod <= self.X

    def roots(self) -> list[int]:
        need = self.cfg.d_min - 1
        out = []
        for k, p in enumerate(self.ps):
            if not self._room(1, k, need):
                break
            out.append(p)
        return out

    def _terminal(self, P: int, L: int) -> bool:
        return self.X // P // L < self.cfg.early_term_ratio

    def children(self, primes: tuple[int, ...], P: int, L: int) -> list[tuple[int, int, int]]:
        """Admissible extensions (p, P*p, lcm) of a non-terminal prefix."""
        cfg = self.cfg
        r = len(primes)
        if r + 1 >= cfg.d_max:
            return []
        if cfg.use_pair_d3 and cfg.d_max == 3:
            return []
        ps = self.ps
        need = max(1, cfg.d_min - r - 1)
        out = []
        for k in range(self.pos[primes[-1]] + 1, len(ps)):
            if not self._room(P, k, need):
                break
            p = ps[k]
            if L % p == 0 or gcd(p - 1, P) != 1:
                continue
            out.append((p, P * p, L * (p - 1) // gcd(L, p - 1)))
        return out

    def root_work(self, p1: int) -> list[tuple[CarmichaelNumber, str]]:
        cfg = self.cfg
        out = []
        if cfg.use_pair_d3 and cfg.d_min == 3:
            out += [(c, PAIR_D3) for c in complete_pair_d3(p1, cfg) if c.factors[-1] <= self.limit]
        if self._terminal(p1, p1 - 1):
            out += _congruence((p1,), p1, p1 - 1, self.X, cfg.d_min, cfg.d_max, self.limit,
                               cfg.use_pair_d3, self.stats)
        return out

    def subtree(self, primes: tuple[int, ...], P: int, L: int, out: list) -> None:
        self.stats["nodes"] += 1
        cfg = self.cfg
        if self._terminal(P, L):
            out += _congruence(primes, P, L, self.X, cfg.d_min, cfg.d_max, self.limit,
                               cfg.use_pair_d3, self.stats)
            return
        d = len(primes) + 1
        if cfg.d_min <= d <= cfg.d_max and not (cfg.use_pair_d3 and d == 3):
            out += self._last(primes, P, L)
        for p, Pp, Lp in self.children(primes, P, L):
            self.subtree(primes + (p,), Pp, Lp, out)

    def _last(self, primes, P, L):
        last = primes[-1]
        hi = min(self.limit, self.X // P)
        if hi <= last:
            return []
        self.stats["last_level"] += 1
        if (hi - last) // L > _PROGRESSION_MAX:
            prefix = SearchPrefix(primes, P, L)
            return [(c, LAST_LEVEL) for c in complete_last(prefix, self.cfg, self.limit)]
        out = []
        q = _first_in_class(pow(P, -1, L), L, last + 1)
        while q <= hi:
            if (P - 1) % (q - 1) == 0 and is_prime(q):
                out.append((CarmichaelNumber(P * q, primes + (q,)), LAST_LEVEL))
            q += L
        return out


# --------------------------------------------------------------------------
# work units, parallel execution, merge


def work_units(cfg: SearchConfig) -> list[tuple]:
    """Independent pieces of the search, in a fixed order.

    ("P", p1, 0) is the depth-1 work for p1, ("P", p1, p2) the whole subtree
    below the prefix (p1, p2), and ("L", lo, hi) the large-prime scan over
    primes in (lo, hi].
    """
    eng = _Principal(cfg)
    units = []
    for p1 in eng.roots():
        units.append(("P", p1, 0))
        if not eng._terminal(p1, p1 - 1):
            units += [("P", p1, p2) for p2, _, _ in eng.children((p1,), p1, p1 - 1)]
    lo = cfg.large_prime_floor
    hi = min(cfg.large_prime_ceiling, isqrt(cfg.bound))
    if hi > lo:
        ps = _primes_cached(isqrt(cfg.bound))
        ps = ps[bisect.bisect_right(ps, lo) : bisect.bisect_right(ps, hi)]
        edges = [lo] + ps[_LP_CHUNK - 1 :: _LP_CHUNK]
        if edges[-1] != hi:
            edges.append(hi)
        units += [("L", a, b) for a, b in zip(edges, edges[1:])]
    return units


_worker: _Principal | None = None


def _init_worker(cfg: SearchConfig) -> None:
    global _worker
    _worker = _Principal(cfg)


def _run_unit(unit: tuple):
    eng = _worker
    eng.stats = Counter()
    kind, a, b = unit
    if kind == "L":
        found = _large_range(eng.cfg, a, b, eng.stats)
    elif b == 0:
        found = eng.root_work(a)
    else:
        found = []
        L = (a - 1) * (b - 1) // gcd(a - 1, b - 1)
        eng.subtree((a, b), a * b, L, found)
    return unit, [(c.value, c.factors, s) for c, s in found], dict(eng.stats)


def enumerate_carmichael(
    cfg: SearchConfig,
    jobs: int = 1,
    checkpoint: str | None = None,
    stop_after: int | None = None,
) -> SearchResult:
    """Every Carmichael number N <= cfg.bound with d_min <= omega(N) <= d_max.

    With ``checkpoint`` each finished work unit is appended to that file and a
    rerun skips it.  ``stop_after`` aborts after that many fresh units
    (raising :class:`SearchInterrupted`), as a Ctrl-C would.
    """
    units = work_units(cfg)
    found: dict[str, list] = {}
    stats = Counter()
    ckpt = Checkpoint(checkpoint, cfg.describe()) if checkpoint else None
    if ckpt:
        for key, recs in ckpt.done.items():
            found[key] = [(c, s) for c, s in ((is_carmichael(n), s) for n, s in recs)]
        stats["resumed_units"] = sum(1 for u in units if Checkpoint.key(u) in ckpt.done)
        todo = [u for u in units if Checkpoint.key(u) not in ckpt.done]
    else:
        todo = units
    log.info("bound=%d: %d work units (%d to run)", cfg.bound, len(units), len(todo))

    pool = None
    try:
        if jobs > 1 and len(todo) > 1:
            pool = multiprocessing.get_context("fork").Pool(jobs, _init_worker, (cfg,))
            results = pool.imap_unordered(_run_unit, todo, chunksize=max(1, len(todo) // (jobs * 64)))
        else:
            _init_worker(cfg)
            results = map(_run_unit, todo)
        for n_done, (unit, recs, st) in enumerate(results, 1):
            key = Checkpoint.key(unit)
            found[key] = [(CarmichaelNumber(v, fs), s) for v, fs, s in recs]
            stats.update(st)
            if ckpt:
                ckpt.record(unit, [(v, s) for v, _, s in recs])
            if stop_after is not None and n_done >= stop_after and n_done < len(todo):
                raise SearchInterrupted(f"stopped after {n_done} units")
    except KeyboardInterrupt as exc:
        raise SearchInterrupted("interrupted") from exc
    finally:
        if pool is not None:
            pool.terminate()
            pool.join()
        if ckpt:
            ckpt.close()

    strategy: dict[int, str] = {}
    numbers = []
    for key in sorted(found):
        for c, s in found[key]:
            if c.value in strategy:
                raise RuntimeError(f"{c.value} produced twice ({strategy[c.value]}, {s})")
            strategy[c.value] = s
            numbers.append(c)
    numbers.sort()
    stats["units"] = len(units)
    return SearchResult(numbers, strategy, stats)


def smallest_with_d(d: int, cap: int, **overrides) -> int | None:
    """Least Carmichael number with exactly d prime factors, if one is <= cap."""
    if d < 3:
        raise ValueError("d must be >= 3")
    x = max(561, _min_product(d))
    while True:
        bound = min(x, cap)
        if bound < 561:
            return None
        cfg = SearchConfig(bound=bound, d_min=d, d_max=d, **overrides)
        res = enumerate_carmichael(cfg)
        if res.numbers:
            return res.numbers[0].value
        if bound >= cap:
            return None
        x *= 4
