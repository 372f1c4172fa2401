"""
Kummer-test engine.

A :class:`SeriesSpec` describes a positive *growth* sequence ``v_n``; the
series under test is ``sum 1/v_n``.  The two inequalities are kept apart:

* :func:`kummer_inequality_scan` works on the summands ``t_n = 1/v_n`` and
  checks ``b_n * t_n / t_{n+1} - b_{n+1} >= c``;
* :func:`find_violation_witness` works on ``v_n`` itself and looks for
  ``b_n * v_{n+1} - b_{n+1} * v_n < v_n``.

With ``v_n = p_n`` the second one is exactly the gap inequality
``q_n p_{n+1} - q_{n+1} p_n < p_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import expr as ex
from .errors import DomainError, PositivityError
from .numeric import DEFAULT_GUARD, EvalValue, Verdict, compare_lt, fraction_to_interval, interval_lt
from .sequences import AuxSequenceSpec, eval_q, interval_q, read_table
from .sieve import nth_prime

SERIES_KINDS = ("reciprocal_primes", "harmonic", "squares", "geometric", "expression", "tabulated")


@dataclass(frozen=True)
class SeriesSpec:
    kind: str
    ratio: Fraction | None = None
    expr: ex.Node | None = None
    table: dict | None = field(default=None, compare=False, repr=False)
    source: str = ""
    _sums: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in SERIES_KINDS:
            raise DomainError(f"unknown series kind {self.kind!r}")
        if self.kind == "geometric" and (self.ratio is None or self.ratio <= 1):
            raise DomainError("geometric series needs ratio r > 1")

    @classmethod
    def reciprocal_primes(cls):
        return cls("reciprocal_primes", source="p_n")

    @classmethod
    def harmonic(cls):
        return cls("harmonic", source="n")

    @classmethod
    def squares(cls):
        return cls("squares", source="n^2")

    @classmethod
    def geometric(cls, r):
        r = Fraction(r)
        return cls("geometric", ratio=r, source=f"{r}^n")

    @classmethod
    def expression(cls, text: str):
        return cls("expression", expr=ex.parse_sequence_expr(text), source=text)

    @classmethod
    def tabulated(cls, values, source="<table>"):
        return cls("tabulated", table={int(k): Fraction(v) for k, v in values.items()}, source=source)

    @classmethod
    def from_csv(cls, path):
        return cls.tabulated(read_table(path), source=str(path))

    def value(self, n: int) -> EvalValue:
        """The growth term ``v_n`` (summand is ``1/v_n``)."""
        if n < 1:
            raise DomainError(f"index must be >= 1, got {n}")
        k = self.kind
        if k == "reciprocal_primes":
            v = EvalValue(Fraction(nth_prime(n)))
        elif k == "harmonic":
            v = EvalValue(Fraction(n))
        elif k == "squares":
            v = EvalValue(Fraction(n * n))
        elif k == "geometric":
            v = EvalValue(self.ratio**n)
        elif k == "expression":
            v = ex.evaluate(self.expr, n)
        else:
            try:
                v = EvalValue(self.table[n])
            except KeyError:
                raise DomainError(f"series table has no entry for n={n}") from None
        if v.value <= 0:
            raise PositivityError(n, v.value, what="a")
        return v

    def term(self, n: int) -> EvalValue:
        """The summand ``1/v_n``."""
        return 1 / self.value(n)

    def interval(self, n: int):
        from mpmath import iv

        if self.kind == "expression":
            from .sequences import _interval_eval

            return _interval_eval(self.expr, n)
        v = self.value(n)
        return iv.mpf(v.value.numerator) / iv.mpf(v.value.denominator)

    def partial_sum(self, n: int) -> EvalValue:
        """``sum_{j<=n} 1/v_j``, memoized."""
        sums = self._sums
        if n in sums:
            return sums[n]
        start = max((k for k in sums if k < n), default=0)
        total = sums.get(start, EvalValue(Fraction(0)))
        for j in range(start + 1, n + 1):
            total = total + self.term(j)
        sums[n] = total
        return total

    def __str__(self):
        return self.source or self.kind


@dataclass(frozen=True)
class KummerCheck:
    n0: int
    c: Any
    scanned_to: int
    first_violation: int | None = None
    indeterminate: int = 0
    min_margin: float = math.inf
    min_margin_at: int | None = None

    @property
    def ok(self) -> bool:
        return self.first_violation is None


@dataclass(frozen=True)
class KummerWitness:
    n_prime: int
    lhs: EvalValue
    rhs: EvalValue
    verdict: Verdict

    @property
    def exact(self) -> bool:
        return self.verdict.exact


@dataclass(frozen=True)
class NotFoundUpTo:
    """No witness in ``[n_start, N]``.  Says nothing about larger indices."""

    n_start: int
    N: int
    indeterminate: int = 0

    def __bool__(self):
        return False


def _settle(verdict: Verdict, lhs_iv, rhs_iv) -> Verdict:
    if not verdict.indeterminate:
        return verdict
    state = interval_lt(lhs_iv(), rhs_iv())
    return Verdict(state, verdict.margin, False)


def _as_value(c) -> EvalValue:
    if isinstance(c, EvalValue):
        return c
    if isinstance(c, float):
        return EvalValue(c, 0.0)
    return EvalValue(Fraction(c))


def kummer_inequality_scan(
    a: SeriesSpec,
    b: AuxSequenceSpec,
    n0: int,
    c,
    N: int,
    guard: float = DEFAULT_GUARD,
) -> KummerCheck:
    """Check ``b_n t_n/t_{n+1} - b_{n+1} >= c`` for every ``n`` in ``(n0, N]``.

    Stops at the first index where the inequality definitely fails.
    """
    if not n0 < N:
        raise DomainError(f"need n0 < N, got n0={n0}, N={N}")
    cv = _as_value(c)
    if not cv.value > 0:
        raise DomainError("c must be positive")
    indet = 0
    min_margin, min_at = math.inf, None
    v_n, b_n = a.value(n0 + 1), eval_q(b, n0 + 1)
    for n in range(n0 + 1, N + 1):
        v_next, b_next = a.value(n + 1), eval_q(b, n + 1)
        quantity = b_n * v_next / v_n - b_next
        verdict = compare_lt(quantity, cv, guard)
        if verdict.indeterminate:
            verdict = _settle(
                verdict,
                lambda: interval_q(b, n) * a.interval(n + 1) / a.interval(n) - interval_q(b, n + 1),
                lambda: fraction_to_interval(cv.value) if cv.exact else cv.value,
            )
        # verdict is about quantity < c, so margin here is c - quantity
        if 0.0 - verdict.margin < min_margin:
            min_margin, min_at = 0.0 - verdict.margin, n
        if verdict.holds:
            return KummerCheck(n0, c, n, n, indet, min_margin, min_at)
        if verdict.indeterminate:
            indet += 1
        v_n, b_n = v_next, b_next
    return KummerCheck(n0, c, N, None, indet, min_margin, min_at)


def witness_sides(a: SeriesSpec, b: AuxSequenceSpec, n: int) -> tuple[EvalValue, EvalValue]:
    """``(b_n v_{n+1} - b_{n+1} v_n,  v_n)``."""
    v_n, v_next = a.value(n), a.value(n + 1)
    lhs = eval_q(b, n) * v_next - eval_q(b, n + 1) * v_n
    return lhs, v_n


def find_violation_witness(
    a: SeriesSpec,
    b: AuxSequenceSpec,
    n_start: int,
    N: int,
    guard: float = DEFAULT_GUARD,
) -> KummerWitness | NotFoundUpTo:
    """Smallest ``n'`` in ``[n_start, N]`` with ``b_n' v_{n'+1} - b_{n'+1} v_n' < v_n'``.

    >>> find_violation_witness(SeriesSpec.reciprocal_primes(),
    ...                        AuxSequenceSpec.builtin("identity_n"), 2, 100).n_prime
    2
    """
    if n_start < 1:
        raise DomainError(f"n_start must be >= 1, got {n_start}")
    indet = 0
    for n in range(n_start, N + 1):
        lhs, rhs = witness_sides(a, b, n)
        verdict = compare_lt(lhs, rhs, guard)
        if verdict.indeterminate:
            verdict = _settle(
                verdict,
                lambda: interval_q(b, n) * a.interval(n + 1) - interval_q(b, n + 1) * a.interval(n),
                lambda: a.interval(n),
            )
        if verdict.holds:
            return KummerWitness(n, lhs, rhs, verdict)
        if verdict.indeterminate:
            indet += 1
    return NotFoundUpTo(n_start, N, indet)


def canonical_b(a: SeriesSpec, M, n: int) -> EvalValue:
    """The multiplier ``(M - sum_{j<=n} t_j) / t_n`` for a series summing to ``M``.

    Exact whenever ``M`` and the summands are rational.

    >>> canonical_b(SeriesSpec.geometric(2), 1, 5)
    EvalValue(1)
    """
    if n < 1:
        raise DomainError(f"index must be >= 1, got {n}")
    total = _as_value(M)
    rest = total - a.partial_sum(n)
    if not rest.value > 0:
        raise DomainError(f"M={M} does not exceed the partial sum at n={n}")
    return rest * a.value(n)


def canonical_identity(a: SeriesSpec, M, n: int) -> EvalValue:
    """``b_n t_n/t_{n+1} - b_{n+1}`` for the canonical ``b``; equals 1."""
    b_n = canonical_b(a, M, n)
    b_next = canonical_b(a, M, n + 1)
    return b_n * a.value(n + 1) / a.value(n) - b_next


def canonical_sequence(a: SeriesSpec, M) -> AuxSequenceSpec:
    """The canonical multipliers packaged as an auxiliary sequence."""
    return AuxSequenceSpec.builtin("kummer_canonical", a, M)
