import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gapforge import AuxSequenceSpec, iterate_equality, q_monotone_audit
from gapforge.errors import BitBudgetExceeded, DomainError
from gapforge.sieve import first_primes


def test_seed_one_one():
    run = iterate_equality((1, 1), 100)
    assert run.values[:3] == [1, 1, Fraction(2, 3)]
    assert run.values[3] == Fraction(-1, 15)
    assert run.status == "positivity_failed" and run.stop_n == 4
    assert run.describe() == "PositivityFailed(4)"
    assert run.Q_trace == [2, 2]
    assert run.positive_prefix == 3 and run.exact


def test_nonpositive_seed():
    with pytest.raises(DomainError):
        iterate_equality((1, 0), 10)
    with pytest.raises(DomainError):
        iterate_equality((Fraction(-1, 2), 1), 10)


def _check_invariant(run):
    ps = first_primes(len(run.values) + 1).tolist()
    q = run.values
    # Q_n computed from scratch along the positive prefix
    Qs = [ps[n - 1] * (q[n] - q[n - 1] + 1) / q[n - 1] for n in range(1, run.positive_prefix)]
    assert all(Q == Qs[0] for Q in Qs)
    assert Qs[0] == ps[0] * (q[1] - q[0] + 1) / q[0]
    assert run.Q_trace == Qs


@settings(max_examples=100, deadline=None)
@given(
    st.fractions(min_value=Fraction(1, 100), max_value=100, max_denominator=100),
    st.fractions(min_value=Fraction(1, 100), max_value=100, max_denominator=100),
)
def test_Q_preserved_exactly(q1, q2):
    run = iterate_equality((q1, q2), 40)
    assert run.exact
    _check_invariant(run)


def test_positivity_failure_is_first_nonpositive():
    rng = random.Random(99)
    for _ in range(50):
        seed = (Fraction(rng.randint(1, 50), rng.randint(1, 50)), Fraction(rng.randint(1, 50), rng.randint(1, 50)))
        run = iterate_equality(seed, 60)
        if run.status == "positivity_failed":
            assert run.values[-1] <= 0 and all(v > 0 for v in run.values[:-1])
            assert run.stop_n == len(run.values)
        else:
            assert run.status in ("completed", "bit_budget")


def test_bit_budget():
    run = iterate_equality((Fraction(3, 7), Fraction(11, 5)), 200, bit_budget=64)
    if run.status != "positivity_failed":
        assert run.status == "bit_budget"
        assert run.describe().startswith("BitBudgetExceeded")
    seed = None
    rng = random.Random(5)
    for _ in range(200):
        s = (Fraction(rng.randint(1, 99), rng.randint(1, 99)), Fraction(rng.randint(1, 99), rng.randint(1, 99)))
        if iterate_equality(s, 30).status == "completed":
            seed = s
            break
    assert seed is not None
    with pytest.raises(BitBudgetExceeded):
        iterate_equality(seed, 30, bit_budget=40, strict_budget=True)


def test_float_seeds_run():
    run = iterate_equality((1.5, 2.25), 30)
    assert not run.exact
    for Q in run.Q_trace:
        assert Q == pytest.approx(run.Q_trace[0], rel=1e-9)


def test_audit_examples():
    audit = q_monotone_audit(iterate_equality((1, 1), 100), 100)
    assert audit.nonincreasing
    audit = q_monotone_audit(AuxSequenceSpec.builtin("identity_n"), 100)
    assert audit.violation == (2, 3, Fraction(10, 3))
    audit = q_monotone_audit(AuxSequenceSpec.expression("1"), 100)
    assert audit.violation[0] == 1 and audit.violation[1:] == (2, 3)
