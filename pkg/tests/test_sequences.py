import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapforge import AuxSequenceSpec, eval_q, eval_Q, eval_u, first_primes, nth_prime
from gapforge import sequences as seq
from gapforge.errors import DomainError, PositivityError

identity = AuxSequenceSpec.builtin("identity_n")
nlogn = AuxSequenceSpec.builtin("n_log_n")
twin = AuxSequenceSpec.builtin("twin_piecewise")
fw = AuxSequenceSpec.builtin("firoozbakht_weight")


def test_eval_q_examples():
    assert eval_q(identity, 7).value == 7
    v = eval_q(twin, 10)
    assert not v.exact and v.value == pytest.approx(23.02585, abs=1e-5)
    assert eval_q(fw, 2).value == pytest.approx(math.sqrt(3) * math.log(2), rel=1e-12)
    assert eval_q(fw, 2).value == pytest.approx(1.20056, abs=1e-5)


def test_eval_u_examples():
    assert eval_u(identity, 4).value == Fraction(1, 2)
    # (11 ln 11 - 10 ln 10 + 1) / (10 ln 10), evaluated directly
    expected = (11 * math.log(11) - 10 * math.log(10) + 1) / (10 * math.log(10))
    assert eval_u(nlogn, 10).value == pytest.approx(expected, rel=1e-12)
    assert eval_u(nlogn, 10).value == pytest.approx(0.188961, abs=1e-6)
    assert eval_u(twin, 10).value == pytest.approx(0.084822, abs=1e-6)


def test_eval_Q_examples():
    assert eval_Q(identity, 5).value == Fraction(22, 5)
    assert eval_Q(identity, 1).value == 4
    assert eval_Q(twin, 10).value == pytest.approx(2.4598, abs=1e-4)


def test_positivity_error_carries_index():
    with pytest.raises(PositivityError) as info:
        eval_q(nlogn, 1)
    assert info.value.n == 1
    with pytest.raises(PositivityError) as info:
        eval_q(AuxSequenceSpec.expression("5-n"), 6)
    assert info.value.n == 6


def test_clip_start():
    assert seq.clip_start(nlogn, 1) == 2
    assert seq.clip_start(twin, 1) == 2
    assert seq.clip_start(identity, 1) == 1
    assert seq.clip_start(fw, 1) == 2
    assert seq.clip_start(AuxSequenceSpec.expression("ln(n+1)"), 1) == 1
    assert seq.clip_start(nlogn, 5) == 5


@pytest.mark.parametrize("n", [1, 2, 3, 10, 97, 1000, 12345])
def test_identity_u_is_two_over_n(n):
    u = eval_u(identity, n)
    assert u.exact and u.value == Fraction(2, n)


@pytest.mark.parametrize("n", [2, 10, 101, 5000])
@pytest.mark.parametrize("spec", [identity, nlogn, twin, fw], ids=lambda s: s.source)
def test_Q_is_p_times_u(spec, n):
    Q, u = eval_Q(spec, n), eval_u(spec, n)
    p = nth_prime(n)
    if Q.exact:
        assert Q.value == p * u.value
    else:
        assert abs(Q.value - p * u.value) <= Q.abs_err + p * u.abs_err


def test_twin_Q_tends_to_two_for_even_n():
    ns = np.arange(10_000, 40_001, 2)
    q, _ = seq.q_block(twin, np.concatenate([ns, ns + 1]))
    qn, qn1 = q.val[: len(ns)], q.val[len(ns) :]
    Q = first_primes(40_001)[ns - 1] * (qn1 - qn + 1) / qn
    assert np.all(np.abs(Q - 2) < 0.5)
    for n in (10_000, 20_000, 40_000):
        assert abs(eval_Q(twin, n).value - 2) < 0.5


def test_tabulated_roundtrip(tmp_path):
    table = {1: Fraction(3, 2), 2: Fraction(7, 4), 3: Fraction(1, 8), 4: 2}
    path = tmp_path / "t.csv"
    seq.write_table(path, {k: float(v) for k, v in table.items()})
    spec = AuxSequenceSpec.from_csv(path)
    assert [eval_q(spec, n).value for n in range(1, 5)] == [table[n] for n in range(1, 5)]
    assert all(eval_q(spec, n).exact for n in range(1, 5))
    with pytest.raises(DomainError):
        eval_q(spec, 5)


def test_tabulated_decimal_is_exact(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("n,q_n\n1,0.1\n2,0.3\n")
    spec = AuxSequenceSpec.from_csv(path)
    assert eval_q(spec, 1).value == Fraction(1, 10)
    assert eval_u(spec, 1).value == Fraction(12, 1)


def test_bad_table_row(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("n,q_n\n1,abc\n")
    with pytest.raises(DomainError):
        AuxSequenceSpec.from_csv(path)


def test_resolve():
    assert AuxSequenceSpec.resolve("n_log_n") == nlogn
    assert AuxSequenceSpec.resolve("n^2").kind == "expression"
    with pytest.raises(DomainError):
        AuxSequenceSpec.builtin("nope")


def test_interval_agrees_with_float():
    for spec in (nlogn, twin, fw):
        for n in (2, 3, 50, 999):
            box = seq.interval_q(spec, n)
            v = eval_q(spec, n)
            assert box.delta < 1e-30
            assert float(box.a) - v.abs_err <= v.value <= float(box.b) + v.abs_err


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=30_000))
def test_block_matches_scalar(n):
    for spec in (identity, nlogn, twin, fw):
        if spec.uses_ln and n == 1:
            continue
        block, exact = seq.q_block(spec, np.array([n]))
        scalar = eval_q(spec, n)
        assert bool(exact[0]) == scalar.exact
        assert abs(block.val[0] - float(scalar.value)) <= block.abs_err[0] + scalar.abs_err
