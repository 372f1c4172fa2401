"""Command-line interface: ``gapforge <subcommand> [--flags]``.

Exit codes: 0 completed, 1 a verified inequality was violated, 2 usage or
configuration error, 3 too many indeterminate comparisons.
"""

from __future__ import annotations

import argparse
import random
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import bounds, kummer, recurrence, sieve, xi
from .errors import GapforgeError
from .gaps import gap_arrays
from .numeric import DEFAULT_GUARD, FAILS, HOLDS, INDET, format_decimal
from .records import open_writer
from .sequences import AuxSequenceSpec

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INDETERMINATE = 0, 1, 2, 3
DEFAULT_RNG_SEED = 20240601


class UsageError(Exception):
    pass


def int_arg(text: str) -> int:
    """Integer flag value; scientific notation such as ``1e8`` is accepted."""
    try:
        d = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if d != d.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(d)


def number_arg(text: str):
    """Exact rational when the text is one (``3``, ``1/3``, ``0.25``), else float."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", default=None, help="record file ('-' for standard output)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--parallelism", type=int_arg, default=1)
    p.add_argument("--guard-band", type=float, default=DEFAULT_GUARD)
    p.add_argument("--max-indeterminate", type=int_arg, default=0)


def _seq_source(p: argparse.ArgumentParser, flag="--seq"):
    dest = flag.lstrip("-").replace("-", "_")
    p.add_argument(flag, dest=dest, help="builtin name or expression in n")
    p.add_argument(flag + "-file", dest=dest + "_file", help="CSV table n,q_n")


def _series_source(p: argparse.ArgumentParser):
    p.add_argument("--series", choices=("primes", "harmonic", "squares", "geometric"), default=None)
    p.add_argument("--ratio", type=number_arg, default=2)
    p.add_argument("--series-expr", default=None)
    p.add_argument("--series-file", default=None)


def _subparser(sub, name: str) -> argparse.ArgumentParser:
    p = sub.add_parser(name, allow_abbrev=False, add_help=False)
    p.add_argument("--help", action="help", help="show this help and exit")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gapforge", allow_abbrev=False, add_help=False)
    parser.add_argument("--help", action="help", help="show this help and exit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = _subparser(sub, "sieve")
    p.add_argument("--limit", type=int_arg, required=True)
    p.add_argument("--segment-size", type=int_arg, default=sieve.DEFAULT_SEGMENT_SIZE)
    _common(p)

    p = _subparser(sub, "gaps")
    p.add_argument("--from", dest="n_from", type=int_arg, default=1)
    p.add_argument("--to", dest="n_to", type=int_arg, required=True)
    _common(p)

    p = _subparser(sub, "xi")
    _seq_source(p)
    p.add_argument("--from", dest="n_from", type=int_arg, default=1)
    p.add_argument("--to", dest="n_to", type=int_arg, required=True)
    p.add_argument("--density-block", type=int_arg, default=None)
    p.add_argument("--pairs-out", default=None, help="even members of Xi with Q_n <= --q-cap")
    p.add_argument("--q-cap", type=float, default=4.0)
    _common(p)

    p = _subparser(sub, "verify")
    p.add_argument("check", choices=("firoozbakht", "rosser", "two-over-n", "kourbatov", "sharp", "compare-bounds"))
    p.add_argument("--limit", type=int_arg, default=None, help="firoozbakht: check all p_{n+1} < limit")
    p.add_argument("--from", dest="n_from", type=int_arg, default=None)
    p.add_argument("--to", dest="n_to", type=int_arg, default=None)
    p.add_argument("--b", type=float, default=1.0)
    _common(p)

    p = _subparser(sub, "kummer")
    p.add_argument("mode", choices=("scan", "witness", "canonical"))
    _series_source(p)
    _seq_source(p, "--b")
    p.add_argument("--n0", type=int_arg, default=1)
    p.add_argument("--c", type=number_arg, default=1)
    p.add_argument("--from", dest="n_from", type=int_arg, default=1)
    p.add_argument("--to", dest="n_to", type=int_arg, default=None)
    p.add_argument("--M", dest="total", type=number_arg, default=None)
    p.add_argument("--n", dest="n", type=int_arg, default=None)
    p.add_argument("--random-b", type=int_arg, default=0, help="witness: number of random b sequences")
    p.add_argument("--seed-rng", type=int_arg, default=DEFAULT_RNG_SEED)
    _common(p)

    p = _subparser(sub, "liminf")
    p.add_argument("--metric", choices=bounds.METRICS, required=True)
    p.add_argument("--from", dest="n_from", type=int_arg, default=1)
    p.add_argument("--to", dest="n_to", type=int_arg, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--checkpoint-base", type=int_arg, default=2)
    _seq_source(p)
    _common(p)

    p = _subparser(sub, "recurrence")
    p.add_argument("--seed", default=None, help="q_1,q_2 (rationals such as 1,1 or 1/2,3)")
    p.add_argument("--n", dest="n", type=int_arg, required=True)
    p.add_argument("--bit-budget", type=int_arg, default=recurrence.DEFAULT_BIT_BUDGET)
    p.add_argument("--random-seeds", type=int_arg, default=0)
    p.add_argument("--seed-rng", type=int_arg, default=DEFAULT_RNG_SEED)
    _common(p)

    p = _subparser(sub, "classical")
    p.add_argument("--to", dest="n_to", type=int_arg, required=True)
    p.add_argument("--checkpoint-base", type=int_arg, default=2)
    _common(p)
    return parser


def _spec_from(args, name="seq", required=True) -> AuxSequenceSpec | None:
    text = getattr(args, name, None)
    path = getattr(args, name + "_file", None)
    if text is not None and path is not None:
        raise UsageError(f"give only one of --{name} and --{name}-file")
    if path is not None:
        return AuxSequenceSpec.from_csv(path)
    if text is not None:
        return AuxSequenceSpec.resolve(text)
    if required:
        raise UsageError(f"one of --{name} or --{name}-file is required")
    return None


def _series_from(args) -> kummer.SeriesSpec:
    given = [x for x in (args.series, args.series_expr, args.series_file) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --series, --series-expr, --series-file")
    if args.series_expr is not None:
        return kummer.SeriesSpec.expression(args.series_expr)
    if args.series_file is not None:
        return kummer.SeriesSpec.from_csv(args.series_file)
    if args.series == "primes":
        return kummer.SeriesSpec.reciprocal_primes()
    if args.series == "harmonic":
        return kummer.SeriesSpec.harmonic()
    if args.series == "squares":
        return kummer.SeriesSpec.squares()
    return kummer.SeriesSpec.geometric(args.ratio)


class _Out:
    """Summary lines go to stdout unless records do."""

    def __init__(self, args):
        self.stream = sys.stderr if args.out == "-" else sys.stdout

    def __call__(self, *parts):
        print(*parts, file=self.stream)


def _indeterminate_exit(args, count: int, say) -> int:
    if count > args.max_indeterminate:
        say(f"{count} indeterminate comparisons (threshold {args.max_indeterminate})")
        return EXIT_INDETERMINATE
    return EXIT_OK


def cmd_sieve(args, say) -> int:
    cfg = sieve.SieveConfig(args.limit, args.segment_size, args.parallelism)
    count = 0
    with open_writer(args.out, "primes", args.format) as w:
        for seg in sieve.iter_prime_segments(cfg):
            if args.out is not None:
                w.write_many(zip(range(count + 1, count + len(seg) + 1), seg.tolist()))
            count += len(seg)
    say(f"{count} primes <= {args.limit}")
    return EXIT_OK


def cmd_gaps(args, say) -> int:
    n, p, q, g = gap_arrays(args.n_from, args.n_to)
    with open_writer(args.out, "gaps", args.format) as w:
        w.write_many(zip(n.tolist(), p.tolist(), q.tolist(), g.tolist()))
    say(f"{len(n)} gaps for n in [{args.n_from}, {args.n_to}], max gap {int(g.max())}")
    return EXIT_OK


def cmd_xi(args, say) -> int:
    spec = _spec_from(args)
    scan = xi.XiScan(spec, args.n_from, args.n_to, args.guard_band, args.parallelism)
    if scan.clipped:
        say(f"range clipped: q_{scan.requested_start} is not positive, starting at n={scan.start}")
    counts = {HOLDS: 0, FAILS: 0, INDET: 0}
    largest = None
    pairs = []
    block_counts = {}
    with open_writer(args.out, "xi", args.format) as w:
        for b in scan.blocks():
            codes = b.codes["gap"]
            for c in counts:
                counts[c] += int((codes == c).sum())
            held = b.n[codes == HOLDS]
            if len(held):
                largest = int(held[-1])
            if args.out is not None:
                w.write_many(b.rows())
            if args.pairs_out is not None:
                sel = (codes == HOLDS) & (b.n % 2 == 0) & (b.Q <= args.q_cap)
                for i in sel.nonzero()[0].tolist():
                    pairs.append((int(b.n[i]), int(b.p_n[i]), int(b.p_next[i]), int(b.g[i]), float(b.Q[i])))
            if args.density_block:
                for n, c in zip(b.n.tolist(), codes.tolist()):
                    key = (n - 1) // args.density_block
                    block_counts.setdefault(key, [0, 0, 0])[{HOLDS: 0, FAILS: 1, INDET: 2}[c]] += 1
    if args.pairs_out is not None:
        with open_writer(args.pairs_out, "twin", args.format) as w:
            w.write_many(pairs)
        non_twin = sum(1 for r in pairs if r[3] != 2)
        say(f"{len(pairs)} even members with Q <= {args.q_cap}; {non_twin} with gap != 2")
    say(f"sequence {spec}: n in [{scan.start}, {scan.end}]")
    say(f"holds {counts[HOLDS]}, fails {counts[FAILS]}, indeterminate {counts[INDET]}, largest holds index {largest}")
    if args.density_block:
        empty = [k for k, v in block_counts.items() if v[0] == 0]
        say(f"{len(block_counts)} density blocks of {args.density_block}, {len(empty)} without members")
    return _indeterminate_exit(args, counts[INDET], say)


def cmd_verify(args, say) -> int:
    check = args.check
    if check == "firoozbakht":
        if args.limit is None:
            raise UsageError("verify firoozbakht needs --limit")
        n_end = bounds.firoozbakht_range(args.limit)
        report = bounds.FiroozbakhtReport(n_end)
        names = {HOLDS: "holds", FAILS: "fails", INDET: "indet"}
        with open_writer(args.out, "bounds", args.format) as w:
            for b in bounds.firoozbakht_blocks(n_end, args.guard_band, args.parallelism):
                report.add(b)
                if args.out is not None:
                    w.write_many(zip(b.n.tolist(), b.g.tolist(), b.rhs.tolist(), [names[c] for c in b.codes.tolist()]))
        say(f"firoozbakht: n in [1, {n_end}] (p_(n+1) < {args.limit}): {len(report.fails)} violations")
        say(f"exact path used {len(report.exact_resolved)} times; smallest log margin {format_decimal(report.min_margin)} at n={report.min_margin_at}")
        return EXIT_VIOLATION if report.fails else EXIT_OK
    if check == "rosser":
        if args.n_to is None:
            raise UsageError("verify rosser needs --to")
        rep = bounds.classical_checks(args.n_to, checkpoints=[], guard=args.guard_band, parallelism=args.parallelism)
        say(f"rosser: n in [1, {args.n_to}]: {len(rep.rosser_violations)} violations, {rep.interval_resolved} interval-certified")
        if rep.rosser_violations:
            return EXIT_VIOLATION
        return _indeterminate_exit(args, len(rep.rosser_indeterminate), say)
    if check == "compare-bounds":
        lo = args.n_from if args.n_from is not None else 10
        if args.n_to is None:
            raise UsageError("verify compare-bounds needs --to")
        rep = bounds.bound_comparison_scan(lo, args.n_to, args.b, args.guard_band)
        with open_writer(args.out, "compare", args.format) as w:
            w.write_many(rep.rows())
        say(f"compare-bounds b={args.b}: sharp smaller at {int(rep.sharp_smaller.sum())} of {len(rep.n)} indices; last index where not smaller: {rep.last_not_smaller}")
        return EXIT_OK
    kind = check
    lo = args.n_from if args.n_from is not None else (10 if kind == "kourbatov" else 1)
    if args.n_to is None:
        raise UsageError(f"verify {check} needs --to")
    ns, g, rhs, codes = bounds.bound_scan(kind, lo, args.n_to, args.guard_band)
    names = {HOLDS: "holds", FAILS: "fails", INDET: "indet"}
    with open_writer(args.out, "bounds", args.format) as w:
        w.write_many(zip(ns.tolist(), g.tolist(), rhs.tolist(), [names[c] for c in codes.tolist()]))
    held = ns[codes == HOLDS]
    say(f"{check}: n in [{lo}, {args.n_to}]: holds {len(held)}, fails {int((codes == FAILS).sum())}, indeterminate {int((codes == INDET).sum())}, largest holds index {int(held[-1]) if len(held) else None}")
    return _indeterminate_exit(args, int((codes == INDET).sum()), say)


def random_positive_table(rng: random.Random, length: int) -> AuxSequenceSpec:
    """Log-uniform positive decimals in [1e-3, 1e3] with six significant digits."""
    values = {n: Decimal(f"{10 ** rng.uniform(-3, 3):.6g}") for n in range(1, length + 1)}
    return AuxSequenceSpec.tabulated(values, source=f"<random {length}>")


def cmd_kummer(args, say) -> int:
    if args.mode == "canonical":
        series = _series_from(args)
        if args.total is None:
            raise UsageError("kummer canonical needs --M")
        ns = [args.n] if args.n is not None else range(args.n_from, (args.n_to or args.n_from) + 1)
        rows = []
        for n in ns:
            v = kummer.canonical_b(series, args.total, n)
            ident = kummer.canonical_identity(series, args.total, n)
            rows.append((n, v.value, 1, "holds" if ident.value == 1 else "approx"))
            say(f"b_{n} = {v.value}; identity value {ident.value}")
        with open_writer(args.out, "kummer_scan", args.format) as w:
            w.write_many(rows)
        return EXIT_OK
    if args.mode == "scan":
        series = _series_from(args)
        b = _spec_from(args, "b")
        if args.n_to is None:
            raise UsageError("kummer scan needs --to")
        res = kummer.kummer_inequality_scan(series, b, args.n0, args.c, args.n_to, args.guard_band)
        if res.ok:
            say(f"no violation of b_n a_n/a_(n+1) - b_(n+1) >= {args.c} on ({args.n0}, {res.scanned_to}]")
        else:
            say(f"first violation at n={res.first_violation}")
        say(f"smallest margin {format_decimal(res.min_margin)} at n={res.min_margin_at}; indeterminate {res.indeterminate}")
        return _indeterminate_exit(args, res.indeterminate, say)
    series = _series_from(args)
    n_to = args.n_to if args.n_to is not None else 10**6
    if args.random_b:
        rng = random.Random(args.seed_rng)
        rows, missing = [], 0
        for trial in range(1, args.random_b + 1):
            b = random_positive_table(rng, min(n_to, 10**4) + 1)
            w_ = kummer.find_violation_witness(series, b, args.n_from, min(n_to, 10**4))
            if w_:
                rows.append((trial, w_.n_prime, w_.lhs.value, w_.rhs.value, w_.exact))
            else:
                missing += 1
        with open_writer(args.out, "witness", args.format) as w:
            w.write_many(rows)
        say(f"{len(rows)} of {args.random_b} random b sequences have a witness (seed {args.seed_rng}); largest n' {max((r[1] for r in rows), default=None)}")
        return EXIT_OK
    b = _spec_from(args, "b")
    res = kummer.find_violation_witness(series, b, args.n_from, n_to, args.guard_band)
    if res:
        say(f"witness n'={res.n_prime}: lhs {res.lhs.value} < rhs {res.rhs.value} ({'exact' if res.exact else 'guarded'})")
        with open_writer(args.out, "witness", args.format) as w:
            w.write((1, res.n_prime, res.lhs.value, res.rhs.value, res.exact))
    else:
        say(f"no witness found in [{args.n_from}, {n_to}] (not a proof that none exists)")
    return EXIT_OK


def cmd_liminf(args, say) -> int:
    spec = _spec_from(args, required=False)
    checkpoints = bounds.power_checkpoints(args.n_to, args.checkpoint_base) + [args.n_to]
    res = bounds.liminf_track(args.metric, args.n_to, checkpoints, args.eps, spec, args.n_from)
    with open_writer(args.out, "liminf", args.format) as w:
        w.write_many(res.rows)
    t = res.tracker
    label = "running sum" if t.is_sum else "running min"
    say(f"{args.metric}: {label} {format_decimal(t.running_min)} (at n={t.argmin}) over {t.n_processed} values")
    return EXIT_OK


def _parse_seed(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--seed needs two comma-separated values")
    try:
        return tuple(Fraction(s.strip()) for s in parts)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad seed {text!r}") from None


def _run_rows(run: recurrence.RecurrenceRun):
    for k, q in enumerate(run.values, start=1):
        Q = run.Q_trace[k - 1] if k <= len(run.Q_trace) else None
        status = "ok" if q > 0 else "positivity_failed"
        yield k, q, Q, status


def cmd_recurrence(args, say) -> int:
    seeds = []
    if args.seed is not None:
        seeds.append(_parse_seed(args.seed))
    if args.random_seeds:
        rng = random.Random(args.seed_rng)
        for _ in range(args.random_seeds):
            seeds.append(tuple(Fraction(rng.randint(1, 99), rng.randint(1, 99)) for _ in range(2)))
    if not seeds:
        raise UsageError("give --seed and/or --random-seeds")
    broken = 0
    with open_writer(args.out, "recurrence", args.format) as w:
        for seed in seeds:
            run = recurrence.iterate_equality(seed, args.n, args.bit_budget)
            const = all(Q == run.Q_trace[0] for Q in run.Q_trace)
            broken += not const
            if args.out is not None:
                w.write_many(_run_rows(run))
            tail = f", q_{run.stop_n} = {run.values[-1]}" if run.status == "positivity_failed" else ""
            say(f"seed {seed[0]},{seed[1]}: {run.describe()}{tail}; Q constant = {run.Q_trace[0]}: {const}")
    return EXIT_VIOLATION if broken else EXIT_OK


def cmd_classical(args, say) -> int:
    cps = bounds.power_checkpoints(args.n_to, args.checkpoint_base)
    rep = bounds.classical_checks(args.n_to, cps, args.guard_band, args.parallelism)
    with open_writer(args.out, "classical", args.format) as w:
        w.write_many((c.n, c.p_n, c.pnt_ratio, c.root) for c in rep.checkpoints)
    say(f"rosser n ln n < p_n on [1, {args.n_to}]: {len(rep.rosser_violations)} violations")
    for c in rep.checkpoints[-3:]:
        say(f"n={c.n}: p_n/(n ln n) = {c.pnt_ratio:.6f}, p_n^(1/n) = {c.root:.8f}")
    if rep.rosser_violations:
        return EXIT_VIOLATION
    return _indeterminate_exit(args, len(rep.rosser_indeterminate), say)


COMMANDS = {
    "sieve": cmd_sieve,
    "gaps": cmd_gaps,
    "xi": cmd_xi,
    "verify": cmd_verify,
    "kummer": cmd_kummer,
    "liminf": cmd_liminf,
    "recurrence": cmd_recurrence,
    "classical": cmd_classical,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    say = _Out(args)
    try:
        return COMMANDS[args.command](args, say)
    except (UsageError, GapforgeError, OSError) as exc:
        print(f"gapforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())
