"""Result files: ``#``-prefixed manifest lines followed by one number per line.

    # bound: 10000
    # d_min: 3
    ...
    561 = 3 * 11 * 17
"""

from __future__ import annotations

import math
import re
from typing import IO, Iterable

from .arith import is_prime
from .korselt import CarmichaelNumber

_SCI = re.compile(r"(\d+)(?:\.(\d+))?[eE]\+?(\d+)")
_POW = re.compile(r"(\d+)(?:\^|\*\*)(\d+)")


def parse_nat(text: str) -> int:
    """Exact integer from ``12345``, ``1e12``, ``2.5e10``, ``25e9`` or ``10^12``."""
    t = text.strip().replace("_", "")
    if t.isdigit():
        return int(t)
    m = _SCI.fullmatch(t)
    if m:
        frac = m.group(2) or ""
        value, scale = int(m.group(1) + frac) * 10 ** int(m.group(3)), 10 ** len(frac)
        if value % scale:
            raise ValueError(f"{text!r} is not an integer")
        return value // scale
    m = _POW.fullmatch(t)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    raise ValueError(f"cannot parse {text!r} as a natural number")


def format_line(c: CarmichaelNumber) -> str:
    return str(c)


def write_results(fh: IO[str], numbers: Iterable[CarmichaelNumber], manifest: dict) -> int:
    for k, v in manifest.items():
        fh.write(f"# {k}: {v}\n")
    n = 0
    for c in numbers:
        fh.write(format_line(c) + "\n")
        n += 1
    return n


def parse_line(line: str) -> CarmichaelNumber:
    left, _, right = line.partition("=")
    n = int(left)
    fs = tuple(int(t) for t in right.split("*"))
    if math.prod(fs) != n or not all(is_prime(p) for p in fs):
        raise ValueError(f"bad factorization: {line!r}")
    return CarmichaelNumber(n, fs)


def read_results(path: str) -> tuple[dict[str, str], list[CarmichaelNumber]]:
    manifest: dict[str, str] = {}
    numbers = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, val = line[1:].partition(":")
                if sep:
                    manifest[key.strip()] = val.strip()
                continue
            numbers.append(parse_line(line))
    numbers.sort()
    return manifest, numbers


def max_possible_d(bound: int) -> int:
    """Most prime factors any Carmichael number <= bound can have."""
    d, prod, p = 0, 1, 2
    while True:
        p += 1
        while not is_prime(p):
            p += 1
        if prod * p > bound:
            return d
        prod *= p
        d += 1


def complete_bound(manifest: dict[str, str]) -> int:
    """Largest X such that the file lists every Carmichael number <= X (0 if unknown)."""
    try:
        bound = int(manifest["bound"])
        d_min = int(manifest.get("d_min", 3))
        d_max = int(manifest.get("d_max", 11))
    except (KeyError, ValueError):
        return 0
    if d_min > 3 or d_max < max_possible_d(bound):
        return 0
    return bound
