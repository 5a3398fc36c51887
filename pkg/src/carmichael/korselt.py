"""Carmichael predicates and per-number invariants (lambda, phi, index, Lehmer index)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .arith import DomainError, factorize, is_prime


@dataclass(frozen=True, order=True)
class CarmichaelNumber:
    value: int
    factors: tuple[int, ...]

    def __post_init__(self):
        fs = self.factors
        if len(fs) < 3 or any(a >= b for a, b in zip(fs, fs[1:])):
            raise ValueError(f"bad factor list {fs}")
        if math.prod(fs) != self.value or not korselt_holds(self.value, fs):
            raise ValueError(f"{self.value} = {fs} fails Korselt")

    @property
    def d(self) -> int:
        return len(self.factors)

    def __str__(self) -> str:
        return f"{self.value} = " + " * ".join(map(str, self.factors))


@dataclass(frozen=True)
class NumberProfile:
    lambda_: int
    phi: int
    index: int
    lehmer_num: int
    lehmer_den: int

    @property
    def lehmer(self) -> Fraction:
        return Fraction(self.lehmer_num, self.lehmer_den)

    def lehmer_str(self, places: int = 5) -> str:
        return format_fraction(self.lehmer, places)


def format_fraction(q: Fraction, places: int) -> str:
    """Round half up to a fixed number of decimals without passing through float."""
    scale = 10**places
    n = (q.numerator * scale * 2 + q.denominator) // (2 * q.denominator)
    whole, frac = divmod(n, scale)
    return f"{whole}.{frac:0{places}d}" if places else str(whole)


def korselt_holds(n: int, primes: Iterable[int]) -> bool:
    """p - 1 | n - 1 for each listed prime (factorization supplied by caller)."""
    m = n - 1
    return all(m % (p - 1) == 0 for p in primes)


def from_factors(n: int, primes: Iterable[int]) -> CarmichaelNumber | None:
    """Korselt check for an already-known distinct prime factorization of n."""
    fs = tuple(primes)
    if len(fs) < 3 or not korselt_holds(n, fs):
        return None
    return CarmichaelNumber(n, fs)


def is_carmichael(n: int) -> CarmichaelNumber | None:
    """The verified Carmichael number n, or None.

    A base-2 Fermat test runs first: every odd Carmichael number passes it,
    so failing numbers are rejected without factoring.
    """
    return classify(n)[0]


def classify(n: int) -> tuple[CarmichaelNumber | None, str]:
    """Like :func:`is_carmichael` but also returns the rejection reason."""
    if n < 2:
        return None, "too-small"
    if n % 2 == 0:
        return None, "even"
    if pow(2, n - 1, n) != 1:
        return None, "fermat-base-2"
    if is_prime(n):
        return None, "prime"
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return None, "not-square-free"
    primes = [p for p, _ in fac]
    if len(primes) < 3:
        return None, "too-few-factors"
    for p in primes:
        if (n - 1) % (p - 1):
            return None, f"korselt-fails-at-{p}"
    return CarmichaelNumber(n, tuple(primes)), "ok"


def fermat_check(n: int, b: int) -> bool:
    """b**(n-1) == 1 mod n; cross-validation oracle only."""
    if math.gcd(b, n) != 1:
        raise DomainError(f"base {b} not prime to {n}")
    return pow(b, n - 1, n) == 1


def profile(c: CarmichaelNumber) -> NumberProfile:
    lam = 1
    phi = 1
    for p in c.factors:
        lam = lam * (p - 1) // math.gcd(lam, p - 1)
        phi *= p - 1
    index, rem = divmod(c.value - 1, lam)
    assert rem == 0
    g = math.gcd(c.value - 1, phi)
    return NumberProfile(lam, phi, index, (c.value - 1) // g, phi // g)


def residue_class(c: CarmichaelNumber, m: int) -> int:
    if m < 2:
        raise DomainError("modulus must be >= 2")
    return c.value % m
