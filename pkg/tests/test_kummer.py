import math
import random
from decimal import Decimal
from fractions import Fraction

import pytest

from gapforge import AuxSequenceSpec, SeriesSpec, canonical_b, canonical_identity, find_violation_witness
from gapforge import kummer
from gapforge.cli import random_positive_table
from gapforge.errors import DomainError, PositivityError
from gapforge.sequences import eval_q

S = AuxSequenceSpec.resolve
primes = SeriesSpec.reciprocal_primes()


def test_scan_squares_certifies_c1():
    res = kummer.kummer_inequality_scan(SeriesSpec.squares(), S("n"), 1, 1, 10**4)
    assert res.ok and res.first_violation is None and res.indeterminate == 0
    # quantity is (n+1)/n, so the margin over c=1 is 1/n
    assert res.min_margin == pytest.approx(1e-4) and res.min_margin_at == 10**4


def test_scan_harmonic_violates_immediately():
    res = kummer.kummer_inequality_scan(SeriesSpec.harmonic(), S("n"), 1, Fraction(1, 2), 10**3)
    assert not res.ok and res.first_violation == 2


def test_scan_geometric_boundary():
    res = kummer.kummer_inequality_scan(SeriesSpec.geometric(2), S("1"), 1, 1, 100)
    assert res.ok and res.min_margin == 0.0


def test_scan_validation():
    with pytest.raises(DomainError):
        kummer.kummer_inequality_scan(SeriesSpec.squares(), S("n"), 5, 1, 5)
    with pytest.raises(DomainError):
        kummer.kummer_inequality_scan(SeriesSpec.squares(), S("n"), 1, 0, 5)


def test_witness_examples():
    w = find_violation_witness(primes, S("n"), 1, 100)
    assert w.n_prime == 1 and w.lhs.value == -1 and w.rhs.value == 2 and w.exact
    w = find_violation_witness(primes, S("n"), 2, 100)
    assert w.n_prime == 2 and w.lhs.value == 1 and w.rhs.value == 3
    w = find_violation_witness(SeriesSpec.harmonic(), S("1"), 1, 100)
    assert w.n_prime == 2


def test_not_found_is_typed_and_falsy():
    res = find_violation_witness(SeriesSpec.squares(), S("n"), 1, 2000)
    assert isinstance(res, kummer.NotFoundUpTo) and not res
    assert res.N == 2000


@pytest.mark.parametrize("name", ["identity_n", "n_log_n", "twin_piecewise", "firoozbakht_weight"])
def test_builtins_have_witness_for_primes(name):
    spec = AuxSequenceSpec.builtin(name)
    w = find_violation_witness(primes, spec, 2, 10**6)
    assert w and w.n_prime <= 10**6


def test_random_tables_have_witness_for_primes():
    rng = random.Random(7)
    for _ in range(20):
        b = random_positive_table(rng, 2000)
        w = find_violation_witness(primes, b, 1, 1999)
        assert w, "no witness"


def test_witness_exact_for_integer_data():
    w = find_violation_witness(primes, S("n^2+1"), 1, 10**4)
    assert w and w.exact
    lhs = (w.n_prime**2 + 1) * int(primes.value(w.n_prime + 1).value) - ((w.n_prime + 1) ** 2 + 1) * int(
        primes.value(w.n_prime).value
    )
    assert lhs == w.lhs.value and lhs < primes.value(w.n_prime).value


def test_scan_and_witness_consistent():
    # with c >= 1 a clean scan on (n0, N] excludes witnesses in the same range
    for a, b in [(SeriesSpec.squares(), S("n")), (SeriesSpec.geometric(3), S("1")), (SeriesSpec.expression("n^3"), S("n"))]:
        res = kummer.kummer_inequality_scan(a, b, 1, 1, 500)
        assert res.ok
        assert not find_violation_witness(a, b, 2, 500)


def test_canonical_b_examples():
    g = SeriesSpec.geometric(2)
    assert canonical_b(g, 1, 5).value == 1
    assert canonical_b(g, 1, 1).value == 1
    v = canonical_b(SeriesSpec.squares(), math.pi**2 / 6, 1)
    assert v.value == pytest.approx(0.644934, abs=1e-6)


def test_canonical_identity_exact():
    for n in range(1, 65):
        v = canonical_identity(SeriesSpec.geometric(2), 1, n)
        assert v.exact and v.value == 1


def test_canonical_identity_other_series():
    # M just above the partial sum up to 40 keeps everything rational
    sq = SeriesSpec.squares()
    M = sq.partial_sum(40).value + Fraction(1, 10**6)
    for n in range(1, 39):
        assert canonical_identity(sq, M, n).value == 1


def test_canonical_requires_M_above_partial_sum():
    with pytest.raises(DomainError):
        canonical_b(SeriesSpec.geometric(2), Fraction(3, 4), 2)


def test_canonical_sequence_spec():
    spec = kummer.canonical_sequence(SeriesSpec.geometric(2), 1)
    assert [eval_q(spec, n).value for n in (1, 2, 10)] == [1, 1, 1]


def test_partial_sum_memo():
    h = SeriesSpec.harmonic()
    assert h.partial_sum(4).value == Fraction(25, 12)
    assert h.partial_sum(2).value == Fraction(3, 2)
    assert h.partial_sum(6).value == Fraction(49, 20)


def test_series_positivity():
    with pytest.raises(PositivityError):
        SeriesSpec.expression("n-3").value(3)
    with pytest.raises(DomainError):
        SeriesSpec.geometric(1)


def test_tabulated_series():
    s = SeriesSpec.tabulated({1: 2, 2: Decimal("4.5"), 3: 9})
    assert s.term(2).value == Fraction(2, 9)
    with pytest.raises(DomainError):
        s.value(4)
