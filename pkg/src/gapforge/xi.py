"""
Scanning for the index set Xi({q_n}) = {n : g_n < Q_n}.

Three algebraically equivalent forms are evaluated at each index:

* theorem form:  q_n p_{n+1} - q_{n+1} p_n < p_n
* gap form:      g_n < Q_n = p_n (q_{n+1} - q_n + 1) / q_n
* ratio form:    p_{n+1} q_n < p_n (q_{n+1} + 1)

When q_n and q_{n+1} are rational the comparisons are done on
cross-multiplied integers.  Otherwise they are done in floats with error
bounds; anything inside the guard band is re-tried with interval
arithmetic and only then reported as indeterminate.

Work is split into fixed-size blocks.  Blocks may be computed concurrently
but are always emitted in index order, and the block size does not depend
on the worker count, so output is identical for any ``parallelism``.
"""

from __future__ import annotations

from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmptyRangeError
from .numeric import (
    DEFAULT_GUARD,
    FAILS,
    HOLDS,
    INDET,
    ErrArray,
    EvalValue,
    State,
    Verdict,
    compare_lt_arrays,
    interval_lt,
)
from .sequences import AuxSequenceSpec, check_positive, clip_start, exact_values, interval_q, q_block
from .sieve import prime_at

BLOCK_SIZE = 1 << 15
FORMS = ("theorem", "gap", "ratio")
_CODE = {State.HOLDS: HOLDS, State.FAILS: FAILS, State.INDETERMINATE: INDET}


@dataclass(frozen=True, slots=True)
class XiRecord:
    n: int
    p_n: int
    p_next: int
    g: int
    Q: EvalValue
    verdict: Verdict
    ratio_verdict: Verdict

    @property
    def exact(self) -> bool:
        return self.verdict.exact

    @property
    def in_xi(self) -> bool:
        return self.verdict.holds


@dataclass
class XiBlock:
    """Column-oriented results for a contiguous run of indices."""

    n: np.ndarray
    p_n: np.ndarray
    p_next: np.ndarray
    g: np.ndarray
    Q: np.ndarray
    Q_err: np.ndarray
    exact: np.ndarray
    Q_exact: dict = field(default_factory=dict)  # n -> (num, den) of the exact Q_n
    codes: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.n)

    def record(self, i: int) -> XiRecord:
        n = int(self.n[i])
        ex = bool(self.exact[i])
        Q = EvalValue(Fraction(*self.Q_exact[n])) if ex else EvalValue(float(self.Q[i]), float(self.Q_err[i]))
        return XiRecord(
            n,
            int(self.p_n[i]),
            int(self.p_next[i]),
            int(self.g[i]),
            Q,
            Verdict.from_code(self.codes["gap"][i], self.margins["gap"][i], ex),
            Verdict.from_code(self.codes["ratio"][i], self.margins["ratio"][i], ex),
        )

    def records(self) -> Iterator[XiRecord]:
        for i in range(len(self.n)):
            yield self.record(i)

    def rows(self) -> Iterator[tuple]:
        """Rows in the ``xi`` CSV schema."""
        names = {HOLDS: "holds", FAILS: "fails", INDET: "indet"}
        cols = (
            self.n.tolist(),
            self.p_n.tolist(),
            self.p_next.tolist(),
            self.g.tolist(),
            self.Q.tolist(),
            [names[c] for c in self.codes["gap"].tolist()],
            [names[c] for c in self.codes["ratio"].tolist()],
            self.exact.tolist(),
            self.margins["gap"].tolist(),
        )
        return zip(*cols)


def _forms(qn, qn1, p, pn1):
    return {
        "theorem": (qn * pn1 - qn1 * p, p),
        "gap": (pn1 - p, p * (qn1 - qn + 1) / qn),
        "ratio": (pn1 * qn, p * (qn1 + 1)),
    }


def _exact_forms(qn: Fraction, qn1: Fraction, p: int, pn1: int):
    # q_n = a/b, q_{n+1} = c/d; every side multiplied by b*d > 0
    a, b = qn.numerator, qn.denominator
    c, d = qn1.numerator, qn1.denominator
    bd = b * d
    out = {
        "theorem": (a * d * pn1 - c * b * p, p * bd),
        "gap": ((pn1 - p) * a * d, p * (c * b - a * d + bd)),
        "ratio": (pn1 * a * d, p * (c + d) * b),
    }
    return out, (p * (c * b - a * d + bd), a * d), bd


def scan_block(spec: AuxSequenceSpec, lo: int, hi: int, guard: float = DEFAULT_GUARD) -> XiBlock:
    """Evaluate all three forms for every ``n`` in ``[lo, hi]``."""
    ns = np.arange(lo, hi + 2, dtype=np.int64)
    q, qex = q_block(spec, ns)
    check_positive(spec, ns, q, qex)
    primes = prime_at(ns)
    p, pn1 = primes[:-1], primes[1:]
    qn, qn1 = q[:-1], q[1:]
    exact = qex[:-1] & qex[1:]

    forms = _forms(qn, qn1, p, pn1)
    Q = forms["gap"][1]
    codes, margins = {}, {}
    for name, (lhs, rhs) in forms.items():
        codes[name], margins[name] = compare_lt_arrays(lhs, rhs, guard)
    block = XiBlock(ns[:-1], p, pn1, pn1 - p, Q.val.copy(), np.array(Q.err), exact, {}, codes, margins)

    idx = np.flatnonzero(exact)
    if len(idx):
        fr = exact_values(spec, ns[idx.min() : idx.max() + 2])
        base = idx.min()
        for i in idx.tolist():
            out, (num, den), bd = _exact_forms(fr[i - base], fr[i - base + 1], int(p[i]), int(pn1[i]))
            for name, (l, r) in out.items():
                codes[name][i] = HOLDS if l < r else FAILS
                margins[name][i] = (r - l) / bd  # int true division rounds correctly
            margins["gap"][i] = (num - int(pn1[i] - p[i]) * den) / den
            block.Q_exact[int(ns[i])] = (num, den)
            block.Q[i] = num / den
            block.Q_err[i] = 0.0

    undecided = np.zeros(len(exact), dtype=bool)
    for name in FORMS:
        undecided |= codes[name] == INDET
    for i in np.flatnonzero(undecided & ~exact).tolist():
        _settle_with_intervals(spec, block, i)
    return block


def _settle_with_intervals(spec: AuxSequenceSpec, block: XiBlock, i: int):
    n = int(block.n[i])
    qn, qn1 = interval_q(spec, n), interval_q(spec, n + 1)
    forms = _forms(qn, qn1, int(block.p_n[i]), int(block.p_next[i]))
    for name, (lhs, rhs) in forms.items():
        if block.codes[name][i] == INDET:
            block.codes[name][i] = _CODE[interval_lt(lhs, rhs)]


def iter_blocks(
    spec: AuxSequenceSpec,
    n_start: int,
    n_end: int,
    guard: float = DEFAULT_GUARD,
    parallelism: int = 1,
    block_size: int = BLOCK_SIZE,
) -> Iterator[XiBlock]:
    bounds = [(lo, min(lo + block_size - 1, n_end)) for lo in range(n_start, n_end + 1, block_size)]
    if parallelism <= 1:
        for lo, hi in bounds:
            yield scan_block(spec, lo, hi, guard)
        return
    window = 2 * parallelism
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        for k in range(0, len(bounds), window):
            yield from pool.map(lambda b: scan_block(spec, b[0], b[1], guard), bounds[k : k + window])


class XiScan:
    """Iterable of :class:`XiRecord` over ``[start, end]``.

    ``clipped`` is true when ``n = 1`` was dropped because the sequence is
    not positive there (e.g. ``n*ln(n)``).
    """

    def __init__(self, spec, n_start, n_end, guard=DEFAULT_GUARD, parallelism=1, block_size=BLOCK_SIZE):
        if n_start < 1 or n_start > n_end:
            raise EmptyRangeError(f"invalid index range [{n_start}, {n_end}]")
        self.spec = spec
        self.requested_start = n_start
        self.start = clip_start(spec, n_start)
        self.end = n_end
        self.guard = guard
        self.parallelism = parallelism
        self.block_size = block_size
        if self.start > self.end:
            raise EmptyRangeError(f"range [{n_start}, {n_end}] is empty after clipping")

    @property
    def clipped(self) -> bool:
        return self.start != self.requested_start

    def blocks(self) -> Iterator[XiBlock]:
        return iter_blocks(self.spec, self.start, self.end, self.guard, self.parallelism, self.block_size)

    def __iter__(self) -> Iterator[XiRecord]:
        for block in self.blocks():
            yield from block.records()


def xi_scan(spec: AuxSequenceSpec, n_start: int, n_end: int, guard: float = DEFAULT_GUARD, parallelism: int = 1) -> XiScan:
    """Verdicts on ``g_n < Q_n`` (and the ratio form) for ``n`` in the range."""
    return XiScan(spec, n_start, n_end, guard, parallelism)


def _single(spec, n, form, guard):
    block = scan_block(spec, n, n, guard)
    return Verdict.from_code(block.codes[form][0], block.margins[form][0], bool(block.exact[0]))


def ratio_check(spec: AuxSequenceSpec, n: int, guard: float = DEFAULT_GUARD) -> Verdict:
    """Verdict on ``p_{n+1} q_n < p_n (q_{n+1} + 1)``."""
    return _single(spec, n, "ratio", guard)


def theorem_check(spec: AuxSequenceSpec, n: int, guard: float = DEFAULT_GUARD) -> Verdict:
    """Verdict on ``q_n p_{n+1} - q_{n+1} p_n < p_n``."""
    return _single(spec, n, "theorem", guard)


def gap_check(spec: AuxSequenceSpec, n: int, guard: float = DEFAULT_GUARD) -> Verdict:
    return _single(spec, n, "gap", guard)


@dataclass
class DensityReport:
    blocks: list  # (lo, hi, holds, fails, indeterminate)
    holds: int
    fails: int
    indeterminate: int
    largest_holds: int | None
    start: int

    @property
    def every_block_nonempty(self) -> bool:
        return all(b[2] > 0 for b in self.blocks)


def _count_ranges(spec, ranges, guard, parallelism):
    lo, hi = ranges[0][0], ranges[-1][1]
    scan = XiScan(spec, lo, hi, guard, parallelism)
    codes = np.concatenate([b.codes["gap"] for b in scan.blocks()])
    start = scan.start
    rows = []
    for a, b in ranges:
        a = max(a, start)
        seg = codes[a - start : b - start + 1]
        rows.append((a, b, int((seg == HOLDS).sum()), int((seg == FAILS).sum()), int((seg == INDET).sum())))
    holds_idx = np.flatnonzero(codes == HOLDS)
    largest = int(holds_idx[-1] + start) if len(holds_idx) else None
    return rows, largest, start


def xi_density(spec: AuxSequenceSpec, N: int, block: int, guard: float = DEFAULT_GUARD, parallelism: int = 1) -> DensityReport:
    """Per-block Holds/Fails/Indeterminate counts over ``[1, N]``."""
    if not N >= block >= 1:
        raise EmptyRangeError(f"need N >= block >= 1, got N={N}, block={block}")
    ranges = [(lo, min(lo + block - 1, N)) for lo in range(1, N + 1, block)]
    rows, largest, start = _count_ranges(spec, ranges, guard, parallelism)
    return DensityReport(
        rows,
        sum(r[2] for r in rows),
        sum(r[3] for r in rows),
        sum(r[4] for r in rows),
        largest,
        start,
    )


def dyadic_counts(spec: AuxSequenceSpec, k_lo: int, k_hi: int, guard: float = DEFAULT_GUARD, parallelism: int = 1):
    """Holds counts on ``[2^k, 2^(k+1))`` for ``k`` in ``[k_lo, k_hi]``."""
    ranges = [(1 << k, (1 << (k + 1)) - 1) for k in range(k_lo, k_hi + 1)]
    rows, _, _ = _count_ranges(spec, ranges, guard, parallelism)
    return {k: r[2] for k, r in zip(range(k_lo, k_hi + 1), rows)}


@dataclass
class TwinReport:
    """Even members of Xi for ``twin_piecewise`` with ``Q_n <= 4``."""

    N: int
    pairs: list  # (n, p_n, p_next, g, Q)
    even_members: int
    odd_members: int
    non_twin: list  # pairs among the above whose gap is not 2


def twin_scan(N: int, guard: float = DEFAULT_GUARD, parallelism: int = 1, q_cap: float = 4.0) -> TwinReport:
    spec = AuxSequenceSpec.builtin("twin_piecewise")
    scan = XiScan(spec, 1, N, guard, parallelism)
    pairs, non_twin = [], []
    even_members = odd_members = 0
    for b in scan.blocks():
        holds = b.codes["gap"] == HOLDS
        even = b.n % 2 == 0
        even_members += int((holds & even).sum())
        odd_members += int((holds & ~even).sum())
        for i in np.flatnonzero(holds & even & (b.Q <= q_cap)).tolist():
            row = (int(b.n[i]), int(b.p_n[i]), int(b.p_next[i]), int(b.g[i]), float(b.Q[i]))
            pairs.append(row)
            if row[3] != 2:
                non_twin.append(row)
    return TwinReport(N, pairs, even_members, odd_members, non_twin)
