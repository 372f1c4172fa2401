"""
Exact-or-guarded arithmetic and three-state comparisons.

A value is either an exact ``Fraction`` or a float carrying a bound on its
relative error.  Every float operation adds ``ULP`` to the bound on top of
what the operands contribute, so the bound over-estimates the true error.
Comparisons between values return a :class:`Verdict`; a float comparison
whose margin lies inside the guard band is ``INDETERMINATE``.

``ErrArray`` is the vectorized float counterpart used by the range scans.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

ULP = 2.0**-52
DEFAULT_GUARD = 1e-9


class State(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INDETERMINATE = "indet"

    def __str__(self):
        return self.value


# integer codes used in vectorized scans
HOLDS, FAILS, INDET = 1, 0, -1
_STATE_OF_CODE = {HOLDS: State.HOLDS, FAILS: State.FAILS, INDET: State.INDETERMINATE}


@dataclass(frozen=True)
class Verdict:
    """Outcome of ``lhs < rhs``; ``margin`` is ``rhs - lhs``."""

    state: State
    margin: float
    exact: bool

    @property
    def holds(self) -> bool:
        return self.state is State.HOLDS

    @property
    def fails(self) -> bool:
        return self.state is State.FAILS

    @property
    def indeterminate(self) -> bool:
        return self.state is State.INDETERMINATE

    @classmethod
    def from_code(cls, code: int, margin: float, exact: bool) -> "Verdict":
        return cls(_STATE_OF_CODE[int(code)], float(margin), exact)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    raise TypeError(x)


@dataclass(frozen=True)
class EvalValue:
    """A scalar that is either exact or a float with relative error bound."""

    value: Fraction | float
    rel_err: float = 0.0

    @classmethod
    def of(cls, x) -> "EvalValue":
        if isinstance(x, EvalValue):
            return x
        if isinstance(x, (int, np.integer, Fraction)):
            return cls(_as_fraction(x))
        return cls(float(x), ULP)

    @property
    def exact(self) -> bool:
        return isinstance(self.value, Fraction)

    @property
    def abs_err(self) -> float:
        if self.exact:
            return 0.0
        # a zero value with unknown relative error has unbounded absolute error
        return math.inf if self.rel_err == math.inf else abs(self.value) * self.rel_err

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        if self.exact:
            return f"EvalValue({self.value})"
        return f"EvalValue({self.value!r} ±{self.rel_err:.1e}rel)"

    def _float_parts(self) -> tuple[float, float]:
        if self.exact:
            f = float(self.value)
            return f, (0.0 if Fraction(f) == self.value else ULP)
        return self.value, self.rel_err

    def _binop(self, other, op: str) -> "EvalValue":
        other = EvalValue.of(other)
        if self.exact and other.exact:
            a, b = self.value, other.value
            if op == "+":
                return EvalValue(a + b)
            if op == "-":
                return EvalValue(a - b)
            if op == "*":
                return EvalValue(a * b)
            if b == 0:
                raise DomainError("division by zero")
            return EvalValue(a / b)
        a, ea = self._float_parts()
        b, eb = other._float_parts()
        if op in "+-":
            v = a + b if op == "+" else a - b
            err = EvalValue(a, ea).abs_err + EvalValue(b, eb).abs_err
            if v == 0:
                return EvalValue(0.0, 0.0 if err == 0 else math.inf)
            return EvalValue(v, err / abs(v) + ULP)
        if op == "*":
            return EvalValue(a * b, ea + eb + ULP)
        if b == 0:
            raise DomainError("division by zero")
        return EvalValue(a / b, ea + eb + ULP)

    def __add__(self, o):
        return self._binop(o, "+")

    def __radd__(self, o):
        return EvalValue.of(o)._binop(self, "+")

    def __sub__(self, o):
        return self._binop(o, "-")

    def __rsub__(self, o):
        return EvalValue.of(o)._binop(self, "-")

    def __mul__(self, o):
        return self._binop(o, "*")

    def __rmul__(self, o):
        return EvalValue.of(o)._binop(self, "*")

    def __truediv__(self, o):
        return self._binop(o, "/")

    def __rtruediv__(self, o):
        return EvalValue.of(o)._binop(self, "/")

    def __pow__(self, o) -> "EvalValue":
        o = EvalValue.of(o)
        if self.exact and o.exact and o.value.denominator == 1:
            k = o.value.numerator
            if self.value == 0 and k < 0:
                raise DomainError("zero to a negative power")
            return EvalValue(self.value**k)
        a, ea = self._float_parts()
        y, ey = o._float_parts()
        if a < 0 and not float(y).is_integer():
            raise DomainError("negative base with non-integer exponent")
        if a == 0:
            if y < 0 or y == 0 and ey != 0:
                raise DomainError("zero to a non-positive power")
            return EvalValue(1.0 if y == 0 else 0.0, 0.0)
        v = math.pow(a, y)
        return EvalValue(v, abs(y) * ea + abs(math.log(abs(a)) * y) * ey + ULP)

    def ln(self) -> "EvalValue":
        a, ea = self._float_parts()
        if a <= 0:
            raise DomainError(f"ln of non-positive value {a}")
        v = math.log(a)
        abs_err = ea * (1.0 + ea) + abs(v) * ULP
        if v == 0:
            return EvalValue(0.0, 0.0 if abs_err == 0 else math.inf)
        return EvalValue(v, abs_err / abs(v))


class ErrArray:
    """Vectorized float values with per-element relative error bounds."""

    __slots__ = ("val", "err")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, val, err=None):
        self.val = np.asarray(val, dtype=np.float64)
        if err is None:
            err = np.zeros_like(self.val)
        self.err = np.broadcast_to(np.asarray(err, dtype=np.float64), self.val.shape)

    @classmethod
    def of(cls, x) -> "ErrArray":
        if isinstance(x, ErrArray):
            return x
        if isinstance(x, np.ndarray):
            if x.dtype.kind in "iu":
                f = x.astype(np.float64)
                exact = np.abs(x) <= 2**53
                return cls(f, np.where(exact, 0.0, ULP))
            return cls(x, ULP)
        if isinstance(x, (int, np.integer)):
            return cls(float(x), 0.0 if abs(int(x)) <= 2**53 else ULP)
        return cls(float(x), ULP)

    def __len__(self):
        return len(self.val)

    def __getitem__(self, idx) -> "ErrArray":
        return ErrArray(self.val[idx], self.err[idx])

    @property
    def abs_err(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.where(self.err == np.inf, np.inf, np.abs(self.val) * self.err)

    def _addsub(self, other, sign):
        other = ErrArray.of(other)
        v = self.val + sign * other.val
        abs_err = self.abs_err + other.abs_err
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(v == 0, np.where(abs_err == 0, 0.0, np.inf), abs_err / np.abs(v) + ULP)
        return ErrArray(v, rel)

    def __add__(self, o):
        return self._addsub(o, 1.0)

    __radd__ = __add__

    def __sub__(self, o):
        return self._addsub(o, -1.0)

    def __rsub__(self, o):
        return ErrArray.of(o)._addsub(self, -1.0)

    def __mul__(self, o):
        o = ErrArray.of(o)
        return ErrArray(self.val * o.val, self.err + o.err + ULP)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = ErrArray.of(o)
        with np.errstate(divide="ignore", invalid="ignore"):
            return ErrArray(self.val / o.val, self.err + o.err + ULP)

    def __rtruediv__(self, o):
        return ErrArray.of(o).__truediv__(self)

    def ln(self) -> "ErrArray":
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.log(self.val)
            abs_err = self.err * (1.0 + self.err) + np.abs(v) * ULP
            rel = np.where(v == 0, np.where(abs_err == 0, 0.0, np.inf), abs_err / np.abs(v))
        return ErrArray(v, rel)

    def __pow__(self, o) -> "ErrArray":
        o = ErrArray.of(o)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = np.power(self.val, o.val)
            lg = np.log(np.abs(self.val))
            exp_term = np.where(o.err == 0, 0.0, np.abs(lg * o.val) * o.err)
            rel = np.abs(o.val) * self.err + exp_term + ULP
            rel = np.where((o.val == 0) & (o.err == 0), 0.0, rel)  # x^0 is exactly 1
            rel = np.where((self.val == 0) & (self.err == 0), 0.0, rel)  # 0^y is exactly 0
        return ErrArray(v, rel)


def guard_half_width(lhs_val, lhs_abs_err, rhs_val, rhs_abs_err, guard: float = DEFAULT_GUARD):
    """Half-width of the band inside which ``lhs < rhs`` is undecidable.

    Propagated absolute errors of both sides plus ``guard`` times the larger
    magnitude.
    """
    scale = np.maximum(np.abs(lhs_val), np.abs(rhs_val))
    return lhs_abs_err + rhs_abs_err + guard * scale


def compare_lt(lhs, rhs, guard: float = DEFAULT_GUARD) -> Verdict:
    """Three-state verdict on ``lhs < rhs``."""
    lhs, rhs = EvalValue.of(lhs), EvalValue.of(rhs)
    if lhs.exact and rhs.exact:
        d = rhs.value - lhs.value
        return Verdict(State.HOLDS if d > 0 else State.FAILS, float(d), True)
    a, b = float(lhs), float(rhs)
    margin = b - a
    half = guard_half_width(a, lhs.abs_err, b, rhs.abs_err, guard)
    if not math.isfinite(half) or abs(margin) <= half:
        return Verdict(State.INDETERMINATE, margin, False)
    return Verdict(State.HOLDS if margin > 0 else State.FAILS, margin, False)


def compare_lt_arrays(lhs: ErrArray, rhs: ErrArray, guard: float = DEFAULT_GUARD):
    """Vectorized :func:`compare_lt`; returns ``(codes, margins)``."""
    lhs, rhs = ErrArray.of(lhs), ErrArray.of(rhs)
    margin = rhs.val - lhs.val
    half = guard_half_width(lhs.val, lhs.abs_err, rhs.val, rhs.abs_err, guard)
    codes = np.where(margin > 0, HOLDS, FAILS).astype(np.int8)
    undecided = ~np.isfinite(half) | ~np.isfinite(margin) | (np.abs(margin) <= half)
    codes[undecided] = INDET
    return codes, margin


def interval_lt(lhs, rhs) -> State:
    """Decide ``lhs < rhs`` for mpmath intervals (or anything mpmath accepts)."""
    from mpmath import iv

    lhs, rhs = iv.mpf(lhs), iv.mpf(rhs)
    if lhs.b < rhs.a:
        return State.HOLDS
    if lhs.a >= rhs.b:
        return State.FAILS
    return State.INDETERMINATE


def fraction_to_interval(x: Fraction):
    from mpmath import iv

    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def format_decimal(x: float) -> str:
    """17 significant digits; round-trips every float64."""
    return format(float(x), ".17g")


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text)
