"""
Auxiliary sequences q_n and the derived quantities

    u_n = (q_{n+1} - q_n + 1) / q_n,        Q_n = p_n * u_n.

A sequence is a builtin, a parsed expression or a table read from a
``n,q_n`` CSV file.  Builtins are stored as expressions so that every
sequence goes through the same evaluators.
"""

from __future__ import annotations

import csv
import types
from collections.abc import Mapping
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import expr as ex
from .errors import DomainError, PositivityError
from .numeric import ErrArray, EvalValue, fraction_to_interval
from .sieve import PrimeStream, nth_prime

BUILTIN_EXPRESSIONS = {
    "identity_n": "n",
    "n_log_n": "n*ln(n)",
    "firoozbakht_weight": "p(n)^(1-1/n)*ln(n)",
    "twin_piecewise": "if_even(n*ln(n),(n-1)*ln(n))",
}
BUILTIN_NAMES = tuple(BUILTIN_EXPRESSIONS) + ("kummer_canonical",)


@dataclass(frozen=True)
class AuxSequenceSpec:
    """Declarative description of an auxiliary sequence.

    ``kind`` is ``"builtin"``, ``"expression"`` or ``"tabulated"``.
    ``kummer_canonical`` takes ``params=(series, M)`` and is evaluated by
    :func:`gapforge.kummer.canonical_b`.
    """

    kind: str
    name: str = ""
    expr: ex.Node | None = None
    table: Mapping[int, Fraction] | None = field(default=None, compare=False, repr=False)
    params: tuple = ()
    source: str = ""

    @classmethod
    def builtin(cls, name: str, *params) -> "AuxSequenceSpec":
        if name == "kummer_canonical":
            if len(params) != 2:
                raise DomainError("kummer_canonical needs (series, M)")
            return cls("builtin", name, params=tuple(params), source=name)
        if name not in BUILTIN_EXPRESSIONS:
            raise DomainError(f"unknown builtin sequence {name!r}")
        text = BUILTIN_EXPRESSIONS[name]
        return cls("builtin", name, ex.parse_sequence_expr(text), source=name)

    @classmethod
    def expression(cls, text: str) -> "AuxSequenceSpec":
        return cls("expression", expr=ex.parse_sequence_expr(text), source=text)

    @classmethod
    def tabulated(cls, values: Mapping[int, Any], source: str = "<table>") -> "AuxSequenceSpec":
        table = {int(k): _to_fraction(v) for k, v in values.items()}
        return cls("tabulated", table=types.MappingProxyType(table), source=source)

    @classmethod
    def from_csv(cls, path) -> "AuxSequenceSpec":
        return cls.tabulated(read_table(path), source=str(path))

    @classmethod
    def resolve(cls, text: str) -> "AuxSequenceSpec":
        """Builtin name if ``text`` is one, otherwise an expression."""
        if text in BUILTIN_EXPRESSIONS:
            return cls.builtin(text)
        return cls.expression(text)

    @property
    def uses_ln(self) -> bool:
        return self.expr is not None and ex.uses_ln(self.expr)

    def __str__(self) -> str:
        return self.source or self.name


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    try:
        return Fraction(Decimal(str(v).strip()))
    except (InvalidOperation, ValueError):
        return Fraction(str(v).strip())


def read_table(path) -> dict[int, Fraction]:
    """Read a ``n,q_n`` CSV (header optional) into exact rationals."""
    table = {}
    with Path(path).open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            if row[0].strip() == "n":
                continue
            try:
                table[int(row[0])] = Fraction(Decimal(row[1].strip()))
            except (InvalidOperation, ValueError, IndexError) as exc:
                raise DomainError(f"bad table row {row!r} in {path}") from exc
    return table


def write_table(path, values: Mapping[int, Any]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "q_n"])
        for k in sorted(values):
            w.writerow([k, values[k]])


def _table_value(spec: AuxSequenceSpec, n: int) -> Fraction:
    try:
        return spec.table[n]
    except KeyError:
        raise DomainError(f"table {spec.source} has no entry for n={n}") from None


def _prime_source(primes) -> Callable[[int], int]:
    if primes is None:
        return nth_prime
    if isinstance(primes, PrimeStream):
        return primes.__getitem__
    return primes


def eval_raw(spec: AuxSequenceSpec, n: int, primes=None) -> EvalValue:
    """``q_n`` without the positivity check."""
    if n < 1:
        raise DomainError(f"index must be >= 1, got {n}")
    if spec.kind == "tabulated":
        return EvalValue(_table_value(spec, n))
    if spec.name == "kummer_canonical":
        from .kummer import canonical_b

        series, total = spec.params
        return canonical_b(series, total, n)
    return ex.evaluate(spec.expr, n, _prime_source(primes))


def eval_q(spec: AuxSequenceSpec, n: int, primes=None) -> EvalValue:
    """``q_n``, exact when the sequence allows it.

    >>> eval_q(AuxSequenceSpec.builtin("identity_n"), 7)
    EvalValue(7)
    """
    q = eval_raw(spec, n, primes)
    if q.value <= 0:
        raise PositivityError(n, q.value)
    return q


def eval_u(spec: AuxSequenceSpec, n: int, primes=None) -> EvalValue:
    qn = eval_q(spec, n, primes)
    qn1 = eval_q(spec, n + 1, primes)
    return (qn1 - qn + 1) / qn


def eval_Q(spec: AuxSequenceSpec, n: int, primes=None) -> EvalValue:
    p = _prime_source(primes)(n)
    return p * eval_u(spec, n, primes)


def q_block(spec: AuxSequenceSpec, ns: np.ndarray) -> tuple[ErrArray, np.ndarray]:
    """Vectorized ``q`` over ``ns``: float values with error bounds and exact mask."""
    ns = np.asarray(ns, dtype=np.int64)
    if len(ns) and ns.min() < 1:
        raise DomainError("index must be >= 1")
    if spec.kind == "tabulated" or spec.name == "kummer_canonical":
        vals = [eval_raw(spec, int(n)) for n in ns]
        exact = np.array([v.exact for v in vals], dtype=bool)
        return ErrArray([float(v) for v in vals], [v.rel_err for v in vals]), exact
    return ex.evaluate_block(spec.expr, ns)


def exact_values(spec: AuxSequenceSpec, ns) -> list[Fraction]:
    return [eval_raw(spec, int(n)).value for n in ns]


def check_positive(spec: AuxSequenceSpec, ns: np.ndarray, q: ErrArray, exact: np.ndarray):
    """Raise :class:`PositivityError` at the first index with ``q_n <= 0``."""
    bad = ~(q.val > 0)
    # exact elements are judged on their exact value, not the rounded float
    for i in np.flatnonzero(bad | exact & (q.val < 1e-300)):
        n = int(ns[i])
        if exact[i]:
            v = eval_raw(spec, n).value
            if v <= 0:
                raise PositivityError(n, v)
        else:
            raise PositivityError(n, float(q.val[i]))


def clip_start(spec: AuxSequenceSpec, n_start: int) -> int:
    """First usable index ``>= n_start``.

    Only ``n = 1`` is ever skipped, and only for sequences involving ``ln``
    whose first term is zero or undefined (``ln(1) = 0``).
    """
    if n_start != 1 or not spec.uses_ln:
        return n_start
    try:
        q1 = eval_raw(spec, 1)
    except DomainError:
        return 2
    return 2 if q1.value <= 0 else 1


def interval_q(spec: AuxSequenceSpec, n: int, dps: int = 40):
    """Rigorous mpmath interval enclosing ``q_n`` (used to settle close calls)."""
    from mpmath import iv

    iv.dps = dps
    if spec.kind == "tabulated":
        return fraction_to_interval(_table_value(spec, n))
    if spec.name == "kummer_canonical":
        v = eval_raw(spec, n)
        if v.exact:
            return fraction_to_interval(v.value)
        w = abs(v.value) * v.rel_err
        return iv.mpf([v.value - w, v.value + w])
    return _interval_eval(spec.expr, n)


def _interval_eval(node: ex.Node, n: int):
    from mpmath import iv

    if isinstance(node, ex.Num):
        return fraction_to_interval(node.value)
    if isinstance(node, ex.Var):
        return iv.mpf(n)
    if isinstance(node, ex.Prime):
        return iv.mpf(nth_prime(ex._prime_index(ex.evaluate(node.arg, n))))
    if isinstance(node, ex.Ln):
        return iv.log(_interval_eval(node.arg, n))
    if isinstance(node, ex.IfEven):
        return _interval_eval(node.even if n % 2 == 0 else node.odd, n)
    a = _interval_eval(node.left, n)
    b = _interval_eval(node.right, n)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a**b
