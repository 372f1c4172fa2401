"""
The second-order recurrence that keeps Q_n constant.

Taking equality in

    q_{n+2} <= [ (p_n / p_{n+1}) (q_{n+1} - q_n + 1) / q_n + 1 ] q_{n+1} - 1

gives Q_{n+1} = Q_n at every step, so an all-positive solution would make
{Q_n} nonincreasing.  Rational seeds are iterated in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import BitBudgetExceeded, DomainError
from .numeric import DEFAULT_GUARD, EvalValue, compare_lt
from .sequences import AuxSequenceSpec, eval_q
from .sieve import first_primes

DEFAULT_BIT_BUDGET = 10**6


@dataclass
class RecurrenceRun:
    """Outcome of :func:`iterate_equality`.

    ``status`` is ``"completed"``, ``"positivity_failed"`` or
    ``"bit_budget"``; ``stop_n`` is the index where iteration ended (the
    first non-positive term for a positivity failure).  ``values[k]`` is
    ``q_{k+1}``, including the failing term.
    """

    seed: tuple
    values: list = field(default_factory=list)
    status: str = "running"
    stop_n: int | None = None
    Q_trace: list = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values)

    def q(self, n: int):
        return self.values[n - 1]

    @property
    def positive_prefix(self) -> int:
        """Number of leading positive terms."""
        k = 0
        for v in self.values:
            if v <= 0:
                break
            k += 1
        return k

    def describe(self) -> str:
        if self.status == "positivity_failed":
            return f"PositivityFailed({self.stop_n})"
        if self.status == "completed":
            return f"Completed({self.stop_n})"
        if self.status == "bit_budget":
            return f"BitBudgetExceeded({self.stop_n})"
        return "Running"


def _coerce(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    return Fraction(str(x))


def _bits(x) -> int:
    if isinstance(x, Fraction):
        return x.numerator.bit_length() + x.denominator.bit_length()
    return 0


def iterate_equality(seed, N: int, bit_budget: int = DEFAULT_BIT_BUDGET, strict_budget: bool = False) -> RecurrenceRun:
    """Iterate the equality recurrence from ``(q_1, q_2)`` up to ``q_N``.

    Stops early at the first ``q_n <= 0``.  With ``strict_budget`` an
    oversize term raises :class:`BitBudgetExceeded`; otherwise the run stops
    with status ``"bit_budget"``.
    """
    q1, q2 = (_coerce(s) for s in seed)
    if not (q1 > 0 and q2 > 0):
        raise DomainError(f"seeds must be positive, got {seed}")
    if N < 2:
        raise DomainError("N must be >= 2")
    primes = first_primes(N).tolist()
    run = RecurrenceRun((q1, q2), [q1, q2])
    run.Q_trace.append(primes[0] * (q2 - q1 + 1) / q1)
    for n in range(1, N - 1):
        qn, qn1 = run.values[n - 1], run.values[n]
        p, pn1 = primes[n - 1], primes[n]
        if isinstance(qn, Fraction) and isinstance(qn1, Fraction):
            nxt = (Fraction(p, pn1) * (qn1 - qn + 1) / qn + 1) * qn1 - 1
        else:
            nxt = (p / pn1 * (qn1 - qn + 1) / qn + 1) * qn1 - 1
        run.values.append(nxt)
        if nxt <= 0:
            run.status, run.stop_n = "positivity_failed", n + 2
            return run
        run.Q_trace.append(pn1 * (nxt - qn1 + 1) / qn1)
        if _bits(nxt) > bit_budget:
            if strict_budget:
                raise BitBudgetExceeded(f"q_{n + 2} needs {_bits(nxt)} bits (budget {bit_budget})")
            run.status, run.stop_n = "bit_budget", n + 2
            return run
    run.status, run.stop_n = "completed", N
    return run


@dataclass
class MonotoneAudit:
    N: int
    violation: tuple | None = None  # (n, Q_n, Q_{n+1})
    checked_to: int = 0
    indeterminate: int = 0

    @property
    def nonincreasing(self) -> bool:
        return self.violation is None


def q_monotone_audit(
    source: Union[AuxSequenceSpec, RecurrenceRun], N: int, guard: float = DEFAULT_GUARD
) -> MonotoneAudit:
    """First ``n`` with ``Q_{n+1} > Q_n``, checking ``n`` up to ``N - 1``.

    For a recurrence run only its positive prefix is audited.
    """
    if isinstance(source, RecurrenceRun):
        trace = source.Q_trace[:N]
        Q = lambda n: EvalValue.of(trace[n - 1])  # noqa: E731
        last = len(trace)
    else:
        primes = first_primes(N + 1)

        def Q(n):
            qn, qn1 = eval_q(source, n), eval_q(source, n + 1)
            return int(primes[n - 1]) * ((qn1 - qn + 1) / qn)

        last = N
    audit = MonotoneAudit(N)
    if last < 1:
        return audit
    prev = Q(1)
    for n in range(1, last):
        cur = Q(n + 1)
        v = compare_lt(prev, cur, guard)
        audit.checked_to = n + 1
        if v.holds:
            audit.violation = (n, prev.value, cur.value)
            return audit
        if v.indeterminate:
            audit.indeterminate += 1
        prev = cur
    return audit
