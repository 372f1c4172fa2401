import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from gapforge import expr as ex
from gapforge.errors import DomainError, ParseError


def test_simple_shapes():
    assert ex.parse_sequence_expr("n") == ex.Var()
    assert ex.parse_sequence_expr("n*ln(n)") == ex.BinOp("*", ex.Var(), ex.Ln(ex.Var()))
    node = ex.parse_sequence_expr("if_even(n*ln(n),(n-1)*ln(n))")
    assert isinstance(node, ex.IfEven)
    assert node.odd == ex.BinOp("*", ex.BinOp("-", ex.Var(), ex.Num(Fraction(1))), ex.Ln(ex.Var()))


def test_precedence_and_associativity():
    v = lambda t, n=1: ex.evaluate(ex.parse_sequence_expr(t), n).value  # noqa: E731
    assert v("2^3^2") == 512
    assert v("0-2^2") == -4
    assert v("1-2-3") == -4
    assert v("12/3/2") == 2
    assert v("2+3*4") == 14
    assert v("(2+3)*4") == 20
    assert v("p(n+1)", 4) == 11


@pytest.mark.parametrize(
    "text,pos",
    [("", 0), ("n*", 2), ("n+)", 2), ("foo(n)", 0), ("n $ 2", 2), ("ln(n", 4), ("p(n", 3), ("2 3", 2), ("-n", 0)],
)
def test_parse_errors_report_position(text, pos):
    with pytest.raises(ParseError) as info:
        ex.parse_sequence_expr(text)
    assert info.value.position == pos
    assert f"position {pos}" in str(info.value)


def test_exact_arithmetic():
    val = ex.evaluate(ex.parse_sequence_expr("(n+1)/n - 1/3"), 6)
    assert val.exact and val.value == Fraction(5, 6)
    assert ex.evaluate(ex.parse_sequence_expr("n^(0-2)"), 4).value == Fraction(1, 16)
    assert ex.evaluate(ex.parse_sequence_expr("0.25*n"), 2).value == Fraction(1, 2)


def test_float_paths_carry_error():
    val = ex.evaluate(ex.parse_sequence_expr("n*ln(n)"), 10)
    assert not val.exact
    assert abs(val.value - 10 * math.log(10)) <= val.abs_err + 1e-15
    assert val.rel_err > 0


def test_lazy_if_even():
    # the untaken branch would take ln of a negative number
    node = ex.parse_sequence_expr("if_even(n, ln(1-n))")
    assert ex.evaluate(node, 4).value == 4
    with pytest.raises(DomainError):
        ex.evaluate(node, 3)
    vals, exact = ex.evaluate_block(ex.parse_sequence_expr("if_even(n, ln(2-n)+5)"), np.array([1, 2, 4]))
    assert exact.tolist() == [False, True, True]
    with pytest.raises(DomainError, match="n=3"):
        ex.evaluate_block(node, np.array([2, 3, 4]))


def test_ln_domain():
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse_sequence_expr("ln(n-1)"), 1)
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse_sequence_expr("1/(n-2)"), 2)


def test_prime_argument_must_be_positive_integer():
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse_sequence_expr("p(n/2)"), 3)
    with pytest.raises(DomainError):
        ex.evaluate(ex.parse_sequence_expr("p(n-1)"), 1)


# random ASTs for round-trip and evaluation properties

leaf = st.one_of(
    st.just(ex.Var()),
    st.builds(lambda k, e: ex.Num(Fraction(k, 10**e)), st.integers(0, 5000), st.integers(0, 3)),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: ex.BinOp(*t)),
        st.tuples(children, st.integers(0, 3)).map(lambda t: ex.BinOp("^", t[0], ex.Num(Fraction(t[1])))),
        children.map(ex.Ln),
        st.tuples(children, children).map(lambda t: ex.IfEven(*t)),
        st.just(ex.Prime(ex.Var())),
    )


trees = st.recursive(leaf, _extend, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(trees)
def test_round_trip(node):
    text = ex.to_text(node)
    again = ex.parse_sequence_expr(text)
    assert again == node
    assert ex.to_text(again) == text


@settings(max_examples=300, deadline=None)
@given(trees, st.integers(min_value=1, max_value=200))
def test_block_float_path_within_bound_of_scalar(node, n):
    """The vectorized float evaluation stays inside its propagated error bound."""
    try:
        scalar = ex.evaluate(node, n)
    except (DomainError, ZeroDivisionError, OverflowError):
        assume(False)
    try:
        vals, exact = ex.evaluate_block(node, np.array([n]))
    except (DomainError, ZeroDivisionError, OverflowError):
        pytest.fail("block evaluation raised where scalar evaluation succeeded")
    v = float(vals.val[0])
    assume(math.isfinite(v) and abs(v) < 1e200)
    if exact[0]:
        assert scalar.exact
    block_err = float(vals.abs_err[0])
    bound = block_err + scalar.abs_err
    assert abs(float(scalar.value) - v) <= bound + 1e-300
