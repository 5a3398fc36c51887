"""Command-line front end.

    carmichael enumerate --bound 1e10 --out c10.txt
    carmichael verify 561 1105
    carmichael tables --in c10.txt --table k
    carmichael smallest --d 5

Exit codes: 0 success, 1 verify found a non-Carmichael input, 2 usage or
domain error, 130 interrupted (the checkpoint, if any, is valid).
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import random
import sys
from datetime import datetime, timezone
from fractions import Fraction

from . import __version__
from . import stats
from .arith import NAT_LIMIT
from .checkpoint import CheckpointMismatch
from .korselt import CarmichaelNumber, classify, fermat_check, format_fraction, profile
from .resultfile import complete_bound, parse_nat, read_results, write_results
from .search import SearchConfig, SearchInterrupted, enumerate_carmichael, smallest_with_d

log = logging.getLogger("carmichael")

DEFAULT_SEED = 20240517
TABLES = ("counts", "dcounts", "k", "swift", "power", "residue", "occurrence", "index", "lehmer", "records")


class UsageError(Exception):
    pass


def _nat_arg(text: str) -> int:
    try:
        n = parse_nat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if n >= NAT_LIMIT:
        raise argparse.ArgumentTypeError(f"{text} does not fit in 64 bits")
    return n


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def self_check(numbers, seed: int, bases: int = 20) -> list[int]:
    """Numbers failing a Fermat test to a random coprime base (should be none)."""
    rng = random.Random(seed)
    bad = []
    for c in numbers:
        for _ in range(bases):
            b = rng.randrange(2, c.value - 1)
            while math.gcd(b, c.value) != 1:
                b = rng.randrange(2, c.value - 1)
            if not fermat_check(c.value, b):
                bad.append(c.value)
                break
    return bad


# --------------------------------------------------------------------------


def cmd_enumerate(args) -> int:
    if args.bound < 1:
        raise UsageError("bound must be >= 1")
    try:
        cfg = SearchConfig(
            bound=args.bound,
            d_min=args.d_min,
            d_max=args.d_max,
            large_prime_floor=args.large_prime_floor,
            large_prime_ceiling=args.large_prime_ceiling,
            early_term_ratio=args.early_term_ratio,
            use_pair_d3=args.pair_d3,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    started = _now()
    try:
        res = enumerate_carmichael(cfg, jobs=args.jobs, checkpoint=args.checkpoint, stop_after=args.stop_after)
    except CheckpointMismatch as exc:
        raise UsageError(str(exc)) from None
    except SearchInterrupted as exc:
        print(f"carmichael: {exc}; rerun with the same flags to resume", file=sys.stderr)
        return 130
    if args.self_check:
        bad = self_check(res.numbers, args.seed)
        if bad:
            print(f"carmichael: Fermat self-check failed for {bad}", file=sys.stderr)
            return 1
    manifest = {"tool": "carmichael", "version": __version__, "started": started, "finished": _now()}
    manifest.update(cfg.describe())
    manifest["count"] = len(res.numbers)
    for s, n in res.attribution().items():
        manifest[f"strategy.{s}"] = n
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_results(fh, res.numbers, manifest)
    else:
        write_results(sys.stdout, res.numbers, manifest)
    return 0


def _verify_line(n: int) -> tuple[bool, str]:
    c, reason = classify(n)
    if c is None:
        return False, f"NOT-CARMICHAEL {n} {reason}"
    prof = profile(c)
    return True, f"CARMICHAEL {n} {'*'.join(map(str, c.factors))} index={prof.index} lehmer={prof.lehmer_str()}"


def cmd_verify(args) -> int:
    tokens = list(args.numbers)
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    tokens.append(line.split("=", 1)[0].strip())
    if not tokens:
        raise UsageError("nothing to verify")
    values = []
    for t in tokens:
        try:
            n = parse_nat(t)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if n >= NAT_LIMIT:
            raise UsageError(f"{t} does not fit in 64 bits")
        values.append(n)
    ok_all = True
    found = []
    for n in values:
        ok, line = _verify_line(n)
        print(line)
        ok_all &= ok
        if ok:
            found.append(classify(n)[0])
    if self_check(found, args.seed):
        print("carmichael: Fermat self-check disagrees with Korselt", file=sys.stderr)
        return 1
    return 0 if ok_all else 1


# --------------------------------------------------------------------------


def _decade_cutoffs(bound: int) -> list[int]:
    return [10**n for n in range(3, 20) if 10**n <= bound]


def _fmt(x: float, places: int) -> str:
    return f"{x:.{places}f}"


def _label(x: int, decades: bool) -> str:
    return str(round(math.log10(x))) if decades else str(x)


def _table_rows(name: str, args, nums: list[CarmichaelNumber], limit: int):
    cut_given = args.cutoffs is not None
    cutoffs = args.cutoffs if cut_given else _decade_cutoffs(limit)
    col = "X" if cut_given else "n"
    if name in ("counts", "k", "swift", "power"):
        counts = stats.count_upto(nums, cutoffs)
        head = {"counts": [col, "C"], "k": [col, "C", "k"], "swift": [col, "C", "ratio"], "power": [col, "C", "exponent"]}
        yield head[name]
        prev = None
        for x in cutoffs:
            c = counts[x]
            row = [_label(x, not cut_given), c]
            if name == "k":
                row.append(_fmt(stats.k_of(x, c), 5) if c and x >= 16 else "")
            elif name == "swift":
                row.append(_fmt(stats.swift_ratio(c, prev), 3) if prev else "")
            elif name == "power":
                row.append(_fmt(stats.power_exponent(x, c), 5) if c and x >= 10 else "")
            prev = c
            yield row
    elif name == "dcounts":
        dc = stats.d_counts(nums, cutoffs)
        ds = range(3, max([11] + [c.d for c in nums]) + 1)
        yield [col] + [f"d{d}" for d in ds] + ["total"]
        for x in cutoffs:
            row = [dc.get((d, x), 0) for d in ds]
            yield [_label(x, not cut_given)] + row + [sum(row)]
    elif name == "residue":
        if args.modulus is None:
            raise UsageError("--table residue needs --modulus")
        table = stats.residue_table(nums, args.modulus, cutoffs)
        yield ["m", "class"] + [str(x) for x in cutoffs]
        for c, row in table.rows():
            yield [args.modulus, c] + row
    elif name == "occurrence":
        table = stats.occurrence_table(nums, args.mode, cutoffs)
        yield ["p"] + [str(x) for x in cutoffs]
        for p, row in table.rows():
            yield [p] + row
    elif name == "index":
        sel = [c for c in nums if c.value <= limit]
        yield ["index", "N", "factors"]
        for i, c in stats.index_filter(sel, args.max_index):
            yield [i, c.value, "*".join(map(str, c.factors))]
    elif name == "lehmer":
        sel = [c for c in nums if c.value <= limit]
        yield ["lehmer", "N", "factors"]
        for q, c in stats.lehmer_filter(sel, args.threshold):
            yield [format_fraction(q, 5), c.value, "*".join(map(str, c.factors))]
    elif name == "records":
        rec = stats.records([c for c in nums if c.value <= limit])
        yield ["record", "d", "p", "N", "ratio"]
        if rec.largest_prime_factor:
            yield ["largest_prime_factor", "", *rec.largest_prime_factor, ""]
            yield ["largest_least_prime_factor", "", *rec.largest_least_prime_factor, ""]
        for d, s in rec.smallest_by_d.items():
            yield ["smallest_with_d", d, "", s, _fmt(rec.sd_ratios[d], 9)]


def cmd_tables(args) -> int:
    manifest, nums = read_results(args.input)
    complete = complete_bound(manifest)
    need = max(args.cutoffs) if args.cutoffs else 0
    if need > complete:
        raise UsageError(f"{args.input} is complete only up to {complete}, table needs {need}")
    limit = min(args.cutoffs) if args.table in ("index", "lehmer", "records") and args.cutoffs else complete
    writer = csv.writer(sys.stdout, lineterminator="\n")
    for row in _table_rows(args.table, args, nums, limit):
        writer.writerow(row)
    return 0


def cmd_smallest(args) -> int:
    if args.d < 3:
        raise UsageError("--d must be >= 3")
    s = smallest_with_d(args.d, args.cap)
    if s is None:
        print(f"NOT-FOUND-BELOW {args.cap}")
        return 0
    print(f"S_{args.d} = {s} ratio={stats.sd_ratio(args.d, s):.9f}")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carmichael", description="Enumerate Carmichael numbers and tabulate their statistics.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list every Carmichael number up to a bound")
    p.add_argument("--bound", type=_nat_arg, required=True)
    p.add_argument("--d-min", type=int, default=3)
    p.add_argument("--d-max", type=int, default=11)
    p.add_argument("--large-prime-floor", type=_nat_arg, help="largest prime factor above which the large-prime scan takes over")
    p.add_argument("--large-prime-ceiling", type=_nat_arg)
    p.add_argument("--early-term-ratio", type=int, default=SearchConfig.early_term_ratio)
    p.add_argument("--pair-d3", action=argparse.BooleanOptionalAction, default=SearchConfig.use_pair_d3,
                   help="produce three-factor numbers by pair completion")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--checkpoint", help="checkpoint file; an existing one is resumed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--self-check", action="store_true", help="Fermat-test every result against 20 random bases")
    p.add_argument("--stop-after", type=int, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="test numbers with Korselt's criterion")
    p.add_argument("numbers", nargs="*")
    p.add_argument("--file", help="result file or one number per line")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tables", help="CSV statistics from a result file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--table", choices=TABLES, required=True)
    p.add_argument("--modulus", type=int)
    p.add_argument("--cutoffs", type=_nat_arg, nargs="+")
    p.add_argument("--mode", choices=("any", "least"), default="any")
    p.add_argument("--threshold", type=Fraction, default=Fraction(2))
    p.add_argument("--max-index", type=int, default=100)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("smallest", help="smallest Carmichael number with d prime factors")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--cap", type=_nat_arg, default=10**12)
    p.set_defaults(func=cmd_smallest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"carmichael: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130
