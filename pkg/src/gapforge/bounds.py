"""
Checks of concrete gap bounds, classical prime estimates and running
minima of normalized gaps.

Inequalities that reduce to integers (the 2/n bound, Firoozbakht) are
decided exactly.  The others involve logarithms and go through guarded
float comparisons, with interval arithmetic as a fallback.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, EmptyRangeError
from .numeric import (
    DEFAULT_GUARD,
    FAILS,
    HOLDS,
    INDET,
    ErrArray,
    EvalValue,
    State,
    Verdict,
    compare_lt,
    compare_lt_arrays,
    interval_lt,
)
from .sieve import first_primes, nth_prime, prime_at, primes_below

try:
    from gmpy2 import mpz as _bigint
except ImportError:  # pragma: no cover - gmpy2 is optional
    _bigint = int

SCAN_BLOCK = 1 << 18


@dataclass(frozen=True)
class BoundReport:
    n: int
    lhs: int
    rhs: EvalValue
    verdict: Verdict


def _gap(n: int) -> tuple[int, int, int]:
    if n < 1:
        raise DomainError(f"index must be >= 1, got {n}")
    p = first_primes(n + 1)
    return int(p[n - 1]), int(p[n]), int(p[n] - p[n - 1])


def _index_arrays(n_start: int, n_end: int):
    if n_start < 1 or n_start > n_end:
        raise EmptyRangeError(f"invalid index range [{n_start}, {n_end}]")
    ns = np.arange(n_start, n_end + 1, dtype=np.int64)
    primes = prime_at(np.arange(n_start, n_end + 2, dtype=np.int64))
    return ns, primes[:-1], primes[1:]


# -- 2/n ------------------------------------------------------------------


def two_over_n_check(n: int) -> Verdict:
    """Exact verdict on ``g_n / p_n < 2 / n``, i.e. ``g_n * n < 2 p_n``.

    ``margin`` is ``2 p_n - n g_n``.
    """
    p, _, g = _gap(n)
    d = 2 * p - g * n
    return Verdict(State.HOLDS if d > 0 else State.FAILS, float(d), True)


def two_over_n_scan(n_start: int, n_end: int) -> np.ndarray:
    """Vectorized :func:`two_over_n_check`; returns HOLDS/FAILS codes."""
    ns, p, q = _index_arrays(n_start, n_end)
    return np.where((q - p) * ns < 2 * p, HOLDS, FAILS).astype(np.int8)


# -- Firoozbakht ----------------------------------------------------------


def firoozbakht_exact(n: int, p: int, q: int, prescreen: bool = True) -> bool:
    """Whether ``q**n < p**(n+1)``, decided on integers.

    With ``prescreen`` the bit lengths are compared first and the powers
    are only formed when the two sides are within 2 bits of each other.
    """
    if prescreen:
        d = n * math.log2(q) - (n + 1) * math.log2(p)
        if d < -2:
            return True
        if d > 2:
            return False
    return _bigint(q) ** n < _bigint(p) ** (n + 1)


def _firoozbakht_sides(ns, p, q):
    lhs = ns * ErrArray.of(q).ln()
    rhs = (ns + 1) * ErrArray.of(p).ln()
    return lhs, rhs


def firoozbakht_check(n: int, guard: float = DEFAULT_GUARD) -> Verdict:
    """Verdict on ``p_{n+1}^(1/(n+1)) < p_n^(1/n)``.

    Decided by comparing ``n ln p_{n+1}`` with ``(n+1) ln p_n``; the exact
    integer comparison takes over inside the guard band.  ``margin`` is
    ``(n+1) ln p_n - n ln p_{n+1}``.
    """
    p, q, _ = _gap(n)
    lhs = n * EvalValue(float(q), 0.0).ln()
    rhs = (n + 1) * EvalValue(float(p), 0.0).ln()
    v = compare_lt(lhs, rhs, guard)
    if v.indeterminate:
        ok = firoozbakht_exact(n, p, q)
        return Verdict(State.HOLDS if ok else State.FAILS, v.margin, True)
    return v


@dataclass
class FiroozbakhtBlock:
    n: np.ndarray
    g: np.ndarray
    rhs: np.ndarray  # gap form: p_n^(1+1/n) - p_n
    codes: np.ndarray
    margin: np.ndarray
    exact_hits: list


def firoozbakht_block(n_start: int, n_end: int, guard: float = DEFAULT_GUARD) -> FiroozbakhtBlock:
    ns, p, q = _index_arrays(n_start, n_end)
    lhs, rhs = _firoozbakht_sides(ns, p, q)
    codes, margin = compare_lt_arrays(lhs, rhs, guard)
    hits = np.flatnonzero(codes == INDET).tolist()
    for i in hits:
        codes[i] = HOLDS if firoozbakht_exact(int(ns[i]), int(p[i]), int(q[i])) else FAILS
    pf = p.astype(np.float64)
    gap_rhs = pf * np.expm1(np.log(pf) / ns)
    return FiroozbakhtBlock(ns, q - p, gap_rhs, codes, margin, [int(ns[i]) for i in hits])


@dataclass
class FiroozbakhtReport:
    n_end: int
    checked: int = 0
    holds: int = 0
    fails: list = field(default_factory=list)
    exact_resolved: list = field(default_factory=list)
    min_margin: float = math.inf
    min_margin_at: int = 0

    def add(self, block: FiroozbakhtBlock):
        self.checked += len(block.n)
        self.holds += int((block.codes == HOLDS).sum())
        self.fails.extend(int(n) for n in block.n[block.codes == FAILS])
        self.exact_resolved.extend(block.exact_hits)
        i = int(np.argmin(block.margin))
        if block.margin[i] < self.min_margin:
            self.min_margin, self.min_margin_at = float(block.margin[i]), int(block.n[i])


def firoozbakht_range(limit: int) -> int:
    """Largest ``n`` with ``p_{n+1} < limit``."""
    if limit < 4:
        raise EmptyRangeError("need limit >= 4 so that p_2 < limit")
    return len(primes_below(limit - 1)) - 1


def iter_range_blocks(fn, n_start: int, n_end: int, parallelism: int = 1, block: int = SCAN_BLOCK):
    """Apply ``fn(lo, hi)`` to fixed blocks of ``[n_start, n_end]``, in order."""
    bounds = [(lo, min(lo + block - 1, n_end)) for lo in range(n_start, n_end + 1, block)]
    if parallelism <= 1:
        for lo, hi in bounds:
            yield fn(lo, hi)
        return
    window = 2 * parallelism
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        for k in range(0, len(bounds), window):
            yield from pool.map(lambda b: fn(*b), bounds[k : k + window])


def firoozbakht_blocks(n_end: int, guard: float = DEFAULT_GUARD, parallelism: int = 1, n_start: int = 1):
    first_primes(n_end + 1)
    return iter_range_blocks(lambda lo, hi: firoozbakht_block(lo, hi, guard), n_start, n_end, parallelism)


def firoozbakht_scan(limit: int, guard: float = DEFAULT_GUARD, parallelism: int = 1) -> FiroozbakhtReport:
    """Check Firoozbakht's inequality for every ``n`` with ``p_{n+1} < limit``."""
    n_end = firoozbakht_range(limit)
    report = FiroozbakhtReport(n_end)
    for block in firoozbakht_blocks(n_end, guard, parallelism):
        report.add(block)
    return report


# -- log-type gap bounds ----------------------------------------------------


def kourbatov_rhs(p, b=1):
    L = EvalValue.of(p).ln() if not isinstance(p, ErrArray) else p.ln()
    return L * L - L - b


def sharp_rhs(n):
    if isinstance(n, ErrArray):
        n1 = n + 1
        return n1 * n1.ln() - n * n.ln() + 1
    n = EvalValue(Fraction(n))
    return (n + 1) * (n + 1).ln() - n * n.ln() + 1


def kourbatov_bound_check(n: int, guard: float = DEFAULT_GUARD) -> BoundReport:
    """Verdict on ``g_n < ln(p_n)^2 - ln(p_n) - 1`` (only for ``n >= 10``)."""
    if n < 10:
        raise DomainError(f"the ln(p)^2 bound is stated for n >= 10, got n={n}")
    p, _, g = _gap(n)
    rhs = kourbatov_rhs(p)
    return BoundReport(n, g, rhs, compare_lt(g, rhs, guard))


def sharp_bound_check(n: int, guard: float = DEFAULT_GUARD) -> BoundReport:
    """Verdict on ``g_n < (n+1) ln(n+1) - n ln(n) + 1``."""
    _, _, g = _gap(n)
    rhs = sharp_rhs(n)
    return BoundReport(n, g, rhs, compare_lt(g, rhs, guard))


def bound_scan(kind: str, n_start: int, n_end: int, guard: float = DEFAULT_GUARD):
    """Vectorized bound check: returns ``(n, g, rhs, codes)`` arrays."""
    if kind == "kourbatov" and n_start < 10:
        raise DomainError("the ln(p)^2 bound is stated for n >= 10")
    ns, p, q = _index_arrays(n_start, n_end)
    g = q - p
    if kind == "kourbatov":
        rhs = kourbatov_rhs(ErrArray.of(p))
    elif kind == "sharp":
        rhs = sharp_rhs(ErrArray.of(ns))
    elif kind == "two-over-n":
        rhs = ErrArray.of(2 * p) / ns
        return ns, g, rhs.val, two_over_n_scan(n_start, n_end)
    else:
        raise DomainError(f"unknown bound {kind!r}")
    codes, _ = compare_lt_arrays(g, rhs, guard)
    for i in np.flatnonzero(codes == INDET).tolist():
        codes[i] = _settle_bound(kind, int(ns[i]), int(p[i]), int(g[i]))
    return ns, g, rhs.val, codes


def _settle_bound(kind, n, p, g):
    from mpmath import iv

    iv.dps = 40
    if kind == "kourbatov":
        L = iv.log(iv.mpf(p))
        rhs = L * L - L - 1
    else:
        rhs = (n + 1) * iv.log(iv.mpf(n + 1)) - n * iv.log(iv.mpf(n)) + 1
    return {State.HOLDS: HOLDS, State.FAILS: FAILS, State.INDETERMINATE: INDET}[interval_lt(g, rhs)]


@dataclass
class ComparisonReport:
    n: np.ndarray
    sharp_rhs: np.ndarray
    kourbatov_rhs: np.ndarray
    sharp_smaller: np.ndarray
    b: float

    @property
    def last_not_smaller(self) -> int | None:
        idx = np.flatnonzero(~self.sharp_smaller)
        return int(self.n[idx[-1]]) if len(idx) else None

    def rows(self):
        for i in range(len(self.n)):
            yield int(self.n[i]), float(self.sharp_rhs[i]), float(self.kourbatov_rhs[i]), bool(self.sharp_smaller[i])


def bound_comparison_scan(n_start: int, n_end: int, b: float = 1.0, guard: float = DEFAULT_GUARD) -> ComparisonReport:
    """Compare the two right-hand sides index by index.

    ``sharp_smaller`` is true only where ``sharp < kourbatov`` is decided;
    indeterminate comparisons count as not smaller.
    """
    if n_start < 10:
        raise DomainError("comparison starts at n >= 10")
    if b < 1:
        raise DomainError("b must be >= 1")
    ns, p, _ = _index_arrays(n_start, n_end)
    s = sharp_rhs(ErrArray.of(ns))
    k = kourbatov_rhs(ErrArray.of(p), b)
    codes, _ = compare_lt_arrays(s, k, guard)
    return ComparisonReport(ns, s.val, k.val, codes == HOLDS, b)


# -- classical estimates ------------------------------------------------------


@dataclass
class Checkpoint:
    n: int
    p_n: int
    pnt_ratio: float  # p_n / (n ln n)
    root: float  # p_n^(1/n)


@dataclass
class ClassicalReport:
    n_end: int
    rosser_violations: list
    rosser_indeterminate: list
    interval_resolved: int
    checkpoints: list


def power_checkpoints(n_end: int, base: int = 2, start: int = 1) -> list[int]:
    out, k = [], start
    while k <= n_end:
        out.append(k)
        k *= base
    return out


def rosser_block(n_start: int, n_end: int, guard: float = DEFAULT_GUARD):
    """Codes for ``n ln n < p_n``, interval-certified inside the guard band."""
    ns, p, _ = _index_arrays(n_start, n_end)
    nf = ErrArray.of(ns)
    codes, _ = compare_lt_arrays(nf * nf.ln(), p, guard)
    hits = np.flatnonzero(codes == INDET).tolist()
    if hits:
        from mpmath import iv

        iv.dps = 40
        for i in hits:
            n = int(ns[i])
            state = interval_lt(iv.mpf(n) * iv.log(iv.mpf(n)), int(p[i]))
            codes[i] = {State.HOLDS: HOLDS, State.FAILS: FAILS}.get(state, INDET)
    return ns, codes, len(hits)


def classical_checks(n_end: int, checkpoints=None, guard: float = DEFAULT_GUARD, parallelism: int = 1) -> ClassicalReport:
    """Rosser's ``n ln n < p_n`` over ``[1, n_end]`` plus PNT checkpoints."""
    if n_end < 3:
        raise DomainError("n_end must be >= 3")
    first_primes(n_end + 1)
    violations, indet, resolved = [], [], 0
    for ns, codes, hits in iter_range_blocks(lambda a, b: rosser_block(a, b, guard), 1, n_end, parallelism):
        violations.extend(int(n) for n in ns[codes == FAILS])
        indet.extend(int(n) for n in ns[codes == INDET])
        resolved += hits
    if checkpoints is None:
        checkpoints = power_checkpoints(n_end)
    rows = []
    for n in checkpoints:
        p = nth_prime(n)
        ratio = p / (n * math.log(n)) if n > 1 else math.inf
        rows.append(Checkpoint(n, p, ratio, math.exp(math.log(p) / n)))
    return ClassicalReport(n_end, violations, indet, resolved, rows)


# -- running minima -------------------------------------------------------------

METRICS = (
    "gap_over_p_scaled",
    "gap_over_log",
    "gap_over_log_eps",
    "gap_over_gpy",
    "firoozbakht_ratio",
    "reciprocal_prime_partial_sum",
    "xi_u_scaled",
    "xi_u_gpy",
)
SUM_METRICS = ("reciprocal_prime_partial_sum",)
XI_METRICS = ("xi_u_scaled", "xi_u_gpy")


@dataclass
class LiminfTracker:
    """Running minimum (running sum for the partial-sum metric) with argmin.

    Ties keep the smaller index.
    """

    metric: str
    running_min: float = math.inf
    argmin: int = 0
    n_processed: int = 0
    last_n: int = 0

    @property
    def is_sum(self) -> bool:
        return self.metric in SUM_METRICS

    def update(self, ns: np.ndarray, values: np.ndarray):
        """Fold in a block; returns per-element running statistic and argmin."""
        if len(ns) == 0:
            return np.zeros(0), np.zeros(0, dtype=np.int64)
        if self.is_sum:
            run = self.running_min if self.n_processed else 0.0
            cum = run + np.cumsum(values)
            self.running_min = float(cum[-1])
            self.argmin = int(ns[-1])
            arg = ns.copy()
        else:
            prev = self.running_min
            cum = np.minimum.accumulate(np.minimum(values, prev))
            before = np.concatenate(([prev], cum[:-1]))
            is_new = values < before
            arg = np.where(is_new, ns, 0)
            arg = np.maximum.accumulate(arg)
            arg = np.where(arg == 0, self.argmin, arg)
            self.running_min = float(cum[-1])
            self.argmin = int(arg[-1])
        self.n_processed += len(ns)
        self.last_n = int(ns[-1])
        return cum, arg

    def merge(self, other: "LiminfTracker") -> "LiminfTracker":
        """Combine trackers over disjoint ranges (``other`` after ``self``)."""
        if self.is_sum:
            return LiminfTracker(
                self.metric,
                self.running_min + other.running_min,
                other.argmin or self.argmin,
                self.n_processed + other.n_processed,
                max(self.last_n, other.last_n),
            )
        if other.running_min < self.running_min or (
            other.running_min == self.running_min and other.argmin and other.argmin < self.argmin
        ):
            best, arg = other.running_min, other.argmin
        else:
            best, arg = self.running_min, self.argmin
        return LiminfTracker(self.metric, best, arg, self.n_processed + other.n_processed, max(self.last_n, other.last_n))


def metric_values(metric: str, n_start: int, n_end: int, eps: float = 0.1, spec=None):
    """``(n, value)`` arrays for ``metric`` over the range.

    The Xi metrics need ``spec`` and return only the members of Xi.
    """
    if metric not in METRICS:
        raise DomainError(f"unknown metric {metric!r}")
    if metric in XI_METRICS:
        return _xi_metric(metric, n_start, n_end, spec)
    ns, p, q = _index_arrays(n_start, n_end)
    g = (q - p).astype(np.float64)
    pf = p.astype(np.float64)
    lp = np.log(pf)
    if metric == "gap_over_p_scaled":
        v = ns * g / (2.0 * pf)
    elif metric == "gap_over_log":
        v = g / lp
    elif metric == "gap_over_log_eps":
        if not eps > 0:
            raise DomainError("eps must be positive")
        v = g / lp ** (1.0 + eps)
    elif metric == "gap_over_gpy":
        v = g / (np.sqrt(lp) * np.log(lp) ** 2)
    elif metric == "firoozbakht_ratio":
        v = np.exp(np.log(q.astype(np.float64)) / (ns + 1) - lp / ns)
    else:
        v = 1.0 / pf
    return ns, v


def _xi_metric(metric, n_start, n_end, spec):
    from .xi import XiScan

    if spec is None:
        raise DomainError(f"metric {metric} needs an auxiliary sequence")
    scan = XiScan(spec, max(n_start, 3), n_end)
    ns_out, vals = [], []
    for b in scan.blocks():
        holds = b.codes["gap"] == HOLDS
        ns = b.n[holds]
        u = b.Q[holds] / b.p_n[holds]
        nf = ns.astype(np.float64)
        if metric == "xi_u_scaled":
            v = nf * u
        else:
            ln = np.log(nf)
            v = nf * np.sqrt(ln) / np.log(ln) ** 2 * u
        ns_out.append(ns)
        vals.append(v)
    if not ns_out:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    return np.concatenate(ns_out), np.concatenate(vals)


@dataclass
class LiminfResult:
    tracker: LiminfTracker
    rows: list  # (n, metric, value, running_min, argmin)


def liminf_track(metric: str, n_end: int, checkpoints=None, eps: float = 0.1, spec=None, n_start: int = 1, block: int = 1 << 20) -> LiminfResult:
    """Running minimum of ``metric`` over ``[n_start, n_end]``.

    ``checkpoints`` defaults to powers of two plus ``n_end``; rows are emitted at every
    checkpoint that was processed (for the Xi metrics, at the last member
    of Xi not beyond the checkpoint).
    """
    if n_end < 1:
        raise DomainError("n_end must be >= 1")
    if checkpoints is None:
        checkpoints = power_checkpoints(n_end) + [n_end]
    checkpoints = sorted(c for c in set(checkpoints) if n_start <= c <= n_end)
    first_primes(n_end + 1)
    tracker = LiminfTracker(metric)
    rows = []
    ci = 0
    for lo in range(n_start, n_end + 1, block):
        hi = min(lo + block - 1, n_end)
        ns, vals = metric_values(metric, lo, hi, eps, spec)
        cum, arg = tracker.update(ns, vals)
        while ci < len(checkpoints) and checkpoints[ci] <= hi:
            c = checkpoints[ci]
            j = int(np.searchsorted(ns, c, side="right")) - 1
            if j >= 0:
                rows.append((int(ns[j]), metric, float(vals[j]), float(cum[j]), int(arg[j])))
            elif rows:
                rows.append((rows[-1][0], metric, rows[-1][2], rows[-1][3], rows[-1][4]))
            ci += 1
    return LiminfResult(tracker, rows)
