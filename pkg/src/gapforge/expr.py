"""
Expression language for auxiliary sequences.

Grammar (ASCII, whitespace allowed between tokens)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?
    base   := number | 'n' | 'p(' expr ')' | 'ln(' expr ')'
            | 'if_even(' expr ',' expr ')' | '(' expr ')'

``^`` is right-associative and there is no unary minus (write ``0-e``).
``p(e)`` is the prime with index ``e``; ``if_even(a, b)`` is ``a`` when
``n`` is even and ``b`` otherwise, and only the selected branch is
evaluated.

Two evaluators are provided: :func:`evaluate` works on one index and stays
exact as long as no ``ln`` or non-integer power is involved;
:func:`evaluate_block` works on a whole array of indices with floats and
reports which elements would have been exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from .errors import DomainError, ParseError
from .numeric import ErrArray, EvalValue
from .sieve import nth_prime, prime_at


@dataclass(frozen=True)
class Num:
    value: Fraction
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Prime:
    arg: "Node"


@dataclass(frozen=True)
class Ln:
    arg: "Node"


@dataclass(frozen=True)
class IfEven:
    even: "Node"
    odd: "Node"


Node = Union[Num, Var, BinOp, Prime, Ln, IfEven]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)
_FUNCTIONS = {"p": 1, "ln": 1, "if_even": 2}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos, self.text)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos, self.text)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        base = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def base(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(Fraction(Decimal(val)), val)
        if kind == "name":
            if val == "n":
                return Var()
            if val not in _FUNCTIONS:
                raise ParseError(f"unknown identifier {val!r}", pos, self.text)
            self.expect("(")
            args = [self.expr()]
            for _ in range(_FUNCTIONS[val] - 1):
                self.expect(",")
                args.append(self.expr())
            self.expect(")")
            if val == "p":
                return Prime(args[0])
            if val == "ln":
                return Ln(args[0])
            return IfEven(args[0], args[1])
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos, self.text)


def parse_sequence_expr(text: str) -> Node:
    """Parse ``text`` into an expression tree.

    >>> parse_sequence_expr("n*ln(n)")
    BinOp(op='*', left=Var(), right=Ln(arg=Var()))
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0, text)
    return _Parser(text).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _num_text(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    d, twos, fives = v.denominator, 0, 0
    while d % 2 == 0:
        d, twos = d // 2, twos + 1
    while d % 5 == 0:
        d, fives = d // 5, fives + 1
    if d != 1 or v < 0:
        return f"({v.numerator}/{v.denominator})"
    digits = max(twos, fives)
    scaled = v.numerator * 10**digits // v.denominator
    whole, frac = divmod(scaled, 10**digits)
    return f"{whole}.{frac:0{digits}d}"


def to_text(node: Node) -> str:
    """Render a tree back to source, parenthesizing only where needed."""
    if isinstance(node, Num):
        return node.text or _num_text(node.value)
    if isinstance(node, Var):
        return "n"
    if isinstance(node, Prime):
        return f"p({to_text(node.arg)})"
    if isinstance(node, Ln):
        return f"ln({to_text(node.arg)})"
    if isinstance(node, IfEven):
        return f"if_even({to_text(node.even)},{to_text(node.odd)})"
    prec = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if isinstance(node.left, BinOp) and (
        _PREC[node.left.op] < prec or (node.op == "^" and node.left.op == "^")
    ):
        left = f"({left})"
    if isinstance(node.right, BinOp) and (
        _PREC[node.right.op] < prec or (_PREC[node.right.op] == prec and node.op != "^")
    ):
        right = f"({right})"
    return f"{left}{node.op}{right}"


def uses_ln(node: Node) -> bool:
    if isinstance(node, Ln):
        return True
    if isinstance(node, (Num, Var)):
        return False
    if isinstance(node, Prime):
        return uses_ln(node.arg)
    if isinstance(node, IfEven):
        return uses_ln(node.even) or uses_ln(node.odd)
    return uses_ln(node.left) or uses_ln(node.right)


def _prime_index(v: EvalValue) -> int:
    if not v.exact or v.value.denominator != 1 or v.value < 1:
        raise DomainError(f"p() argument must be a positive integer, got {v.value}")
    return v.value.numerator


def evaluate(node: Node, n: int, prime: Callable[[int], int] = nth_prime) -> EvalValue:
    """Evaluate at a single index ``n``."""
    if isinstance(node, Num):
        return EvalValue(node.value)
    if isinstance(node, Var):
        return EvalValue(Fraction(n))
    if isinstance(node, Prime):
        return EvalValue(Fraction(prime(_prime_index(evaluate(node.arg, n, prime)))))
    if isinstance(node, Ln):
        return evaluate(node.arg, n, prime).ln()
    if isinstance(node, IfEven):
        return evaluate(node.even if n % 2 == 0 else node.odd, n, prime)
    a = evaluate(node.left, n, prime)
    b = evaluate(node.right, n, prime)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if b.exact and b.value == 0 or not b.exact and b.value == 0.0:
            raise DomainError(f"division by zero at n={n}")
        return a / b
    return a**b


def _first_bad(ns: np.ndarray, bad: np.ndarray) -> int:
    return int(ns[np.flatnonzero(bad)[0]])


def evaluate_block(node: Node, ns: np.ndarray) -> tuple[ErrArray, np.ndarray]:
    """Evaluate at every index in ``ns`` (int64 array).

    Returns the float values with error bounds and a boolean mask marking
    elements whose single-index evaluation would be exact.
    """
    ns = np.asarray(ns, dtype=np.int64)
    if isinstance(node, Num):
        v = ErrArray.of(np.full(len(ns), float(node.value)))
        if Fraction(float(node.value)) == node.value:
            v = ErrArray(v.val, 0.0)
        return v, np.ones(len(ns), dtype=bool)
    if isinstance(node, Var):
        return ErrArray.of(ns), np.ones(len(ns), dtype=bool)
    if isinstance(node, Prime):
        arg, exact = evaluate_block(node.arg, ns)
        bad = ~exact | (arg.val < 1) | (arg.val != np.floor(arg.val))
        if bad.any():
            raise DomainError(f"p() argument must be a positive integer at n={_first_bad(ns, bad)}")
        return ErrArray.of(prime_at(arg.val.astype(np.int64))), np.ones(len(ns), dtype=bool)
    if isinstance(node, Ln):
        arg, _ = evaluate_block(node.arg, ns)
        bad = ~(arg.val > 0)
        if bad.any():
            raise DomainError(f"ln of non-positive value at n={_first_bad(ns, bad)}")
        return arg.ln(), np.zeros(len(ns), dtype=bool)
    if isinstance(node, IfEven):
        even = ns % 2 == 0
        val = np.empty(len(ns))
        err = np.empty(len(ns))
        exact = np.empty(len(ns), dtype=bool)
        for mask, branch in ((even, node.even), (~even, node.odd)):
            if mask.any():
                v, e = evaluate_block(branch, ns[mask])
                val[mask], err[mask], exact[mask] = v.val, v.err, e
        return ErrArray(val, err), exact
    a, ea = evaluate_block(node.left, ns)
    b, eb = evaluate_block(node.right, ns)
    exact = ea & eb
    if node.op == "+":
        return a + b, exact
    if node.op == "-":
        return a - b, exact
    if node.op == "*":
        return a * b, exact
    if node.op == "/":
        bad = b.val == 0
        if bad.any():
            raise DomainError(f"division by zero at n={_first_bad(ns, bad)}")
        return a / b, exact
    int_exp = eb & (b.val == np.floor(b.val))
    bad = ((a.val < 0) & ~int_exp) | ((a.val == 0) & ((b.val < 0) | (b.val == 0) & ~int_exp))
    if bad.any():
        raise DomainError(f"invalid power at n={_first_bad(ns, bad)}")
    return a**b, ea & int_exp
