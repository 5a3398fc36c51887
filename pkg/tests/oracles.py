"""Independent reference computations used only by the tests."""

import numpy as np


def prime_mask(n: int) -> np.ndarray:
    """Boolean array, True at the primes in [0, n]."""
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


def smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, int(n**0.5) + 1):
        if spf[p] == 0:
            seg = spf[p * p :: p]
            seg[seg == 0] = p
    idx = np.arange(n + 1)
    spf[spf == 0] = idx[spf == 0]
    return spf


def brute_carmichael(n: int) -> list[int]:
    """Korselt's criterion applied to every odd composite <= n."""
    spf = smallest_prime_factor(n)
    m = np.arange(3, n + 1, 2, dtype=np.int64)
    m = m[spf[m] != m]
    rem = m.copy()
    ok = np.ones(len(m), dtype=bool)
    nfac = np.zeros(len(m), dtype=np.int64)
    while True:
        live = np.flatnonzero(rem > 1)
        if len(live) == 0:
            break
        p = spf[rem[live]]
        ok[live] &= (m[live] - 1) % (p - 1) == 0
        rem[live] //= p
        ok[live] &= rem[live] % p != 0
        nfac[live] += 1
    return m[ok & (nfac >= 3)].tolist()
