"""Exact unsigned integer kernel.

Every value handled here is a natural number below 2**64.  Python integers
never wrap, so products of two such values (up to 128 bits) are exact; the
range checks below exist to keep callers inside the 64-bit domain the rest of
the package assumes.
"""

from __future__ import annotations

import math
from itertools import compress

NAT_LIMIT = 1 << 64

Factorization = list[tuple[int, int]]


class DomainError(ValueError):
    """Argument outside the domain of an arithmetic operation."""


def _nat(x: int, name: str = "value") -> int:
    if not 0 <= x < NAT_LIMIT:
        raise DomainError(f"{name}={x} outside [0, 2**64)")
    return x


def primes_up_to(n: int) -> list[int]:
    """All primes <= n by the sieve of Eratosthenes."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(range(i * i, n + 1, i)))
    return list(compress(range(n + 1), sieve))


TRIAL_LIMIT = 10_000
_TRIAL_PRIMES = primes_up_to(TRIAL_LIMIT)
_TABLE_LIMIT = 1 << 17
_PRIME_TABLE = bytearray(_TABLE_LIMIT)
for _p in primes_up_to(_TABLE_LIMIT - 1):
    _PRIME_TABLE[_p] = 1
_PRIMORIAL = math.prod(_TRIAL_PRIMES[:60])

# Deterministic Miller-Rabin witness sets; the last covers all n < 2**64.
_WITNESSES = (
    (2_047, (2,)),
    (1_373_653, (2, 3)),
    (25_326_001, (2, 3, 5)),
    (3_215_031_751, (2, 3, 5, 7)),
    (2_152_302_898_747, (2, 3, 5, 7, 11)),
    (3_474_749_660_383, (2, 3, 5, 7, 11, 13)),
    (341_550_071_728_321, (2, 3, 5, 7, 11, 13, 17)),
    (NAT_LIMIT, (2, 325, 9375, 28178, 450775, 9780504, 1795265022)),
)


def modmul(a: int, b: int, m: int) -> int:
    _nat(a, "a")
    _nat(b, "b")
    if not 1 <= m < NAT_LIMIT:
        raise DomainError(f"modulus {m} outside [1, 2**64)")
    return (a * b) % m


def powmod(b: int, e: int, m: int) -> int:
    """b**e mod m by left-to-right square-and-multiply over :func:`modmul`."""
    if not 1 <= m < NAT_LIMIT:
        raise DomainError(f"modulus {m} outside [1, 2**64)")
    _nat(e, "e")
    b = _nat(b, "b") % m
    result = 1 % m
    for bit in bin(e)[2:]:
        result = modmul(result, result, m)
        if bit == "1":
            result = modmul(result, b, m)
    return result


def gcd(a: int, b: int) -> int:
    return math.gcd(_nat(a, "a"), _nat(b, "b"))


def lcm(a: int, b: int) -> int:
    """Least common multiple; raises OverflowError rather than leaving 64 bits."""
    _nat(a, "a")
    _nat(b, "b")
    if a == 0 or b == 0:
        return 0
    r = a // math.gcd(a, b) * b
    if r >= NAT_LIMIT:
        raise OverflowError(f"lcm({a}, {b}) = {r} does not fit in 64 bits")
    return r


def _is_sprp(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Deterministic primality for every n < 2**64."""
    if n < _TABLE_LIMIT:
        if n < 0:
            raise DomainError(f"value={n} outside [0, 2**64)")
        return bool(_PRIME_TABLE[n])
    _nat(n)
    if math.gcd(n, _PRIMORIAL) != 1:
        return False
    d, s = n - 1, 0
    while not d & 1:
        d >>= 1
        s += 1
    for limit, witnesses in _WITNESSES:
        if n < limit:
            break
    for a in witnesses:
        a %= n
        if a and not _is_sprp(n, a, d, s):
            return False
    return True


def _brent(n: int, c: int) -> int:
    """One Brent-cycle Pollard rho attempt; returns a divisor of n, maybe n."""
    y, r, q, g = 2, 1, 1, 1
    m = 128
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r <<= 1
    if g == n:
        # batch overshot; step back one term at a time
        while True:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
            if g > 1:
                break
    return g


def _split(n: int) -> int:
    """A proper divisor of the odd composite n (no factor below TRIAL_LIMIT)."""
    r = math.isqrt(n)
    if r * r == n:
        return r
    c = 1
    while True:
        g = _brent(n, c)
        if g != n:
            return g
        c += 1


def factorize(n: int) -> Factorization:
    """Prime factorization as increasing (prime, exponent) pairs."""
    _nat(n)
    if n < 1:
        raise DomainError("factorize needs n >= 1")
    out: Factorization = []
    for p in _TRIAL_PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n == 1:
        return out
    if n <= TRIAL_LIMIT * TRIAL_LIMIT or is_prime(n):
        out.append((n, 1))
        return out
    counts: dict[int, int] = {}
    stack = [n]
    while stack:
        m = stack.pop()
        if is_prime(m):
            counts[m] = counts.get(m, 0) + 1
        else:
            g = _split(m)
            stack += (g, m // g)
    out.extend(sorted(counts.items()))
    return out


def squarefree_factors(n: int) -> list[int] | None:
    """Increasing prime factors of n, or None when n is not square-free."""
    fs = factorize(n)
    if any(e > 1 for _, e in fs):
        return None
    return [p for p, _ in fs]


def divisors(n: int) -> list[int]:
    if n < 1:
        raise DomainError("divisors needs n >= 1")
    return divisors_from(factorize(n))


def divisors_from(fac: Factorization) -> list[int]:
    divs = [1]
    for p, e in fac:
        step = []
        pk = 1
        for _ in range(e):
            pk *= p
            step += [d * pk for d in divs]
        divs += step
    divs.sort()
    return divs
