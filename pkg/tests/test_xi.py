from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapforge import AuxSequenceSpec, xi
from gapforge.bounds import two_over_n_scan
from gapforge.errors import EmptyRangeError, PositivityError
from gapforge.numeric import FAILS, HOLDS, INDET
from gapforge.sieve import first_primes

identity = AuxSequenceSpec.builtin("identity_n")
twin = AuxSequenceSpec.builtin("twin_piecewise")


def test_examples():
    recs = {r.n: r for r in xi.xi_scan(identity, 1, 10)}
    assert recs[5].verdict.holds and recs[5].Q.value == Fraction(22, 5) and recs[5].verdict.exact
    assert recs[4].verdict.fails and recs[4].Q.value == Fraction(7, 2)
    assert recs[1].verdict.holds and recs[1].Q.value == 4 and recs[1].g == 1
    assert xi.ratio_check(identity, 5).holds and xi.ratio_check(identity, 5).margin == 12
    assert xi.ratio_check(identity, 4).fails and xi.ratio_check(identity, 4).margin == -2
    assert xi.ratio_check(identity, 1).holds
    assert xi.theorem_check(identity, 5).holds and xi.gap_check(identity, 4).fails


def test_forms_agree_and_match_two_over_n():
    blocks = list(xi.xi_scan(identity, 1, 20_000).blocks())
    codes = {f: np.concatenate([b.codes[f] for b in blocks]) for f in xi.FORMS}
    assert np.array_equal(codes["theorem"], codes["gap"])
    assert np.array_equal(codes["gap"], codes["ratio"])
    assert all(b.exact.all() for b in blocks)
    assert np.array_equal(codes["gap"] == HOLDS, two_over_n_scan(1, 20_000) == HOLDS)


def test_float_path_agrees_with_exact_path():
    # n*ln(3)/ln(3) equals n but goes through the guarded float path
    fl = AuxSequenceSpec.expression("n*ln(3)/ln(3)")
    a = np.concatenate([b.codes["gap"] for b in xi.xi_scan(identity, 1, 5000).blocks()])
    blocks = list(xi.xi_scan(fl, 1, 5000).blocks())
    b = np.concatenate([blk.codes["gap"] for blk in blocks])
    assert not any(blk.exact.any() for blk in blocks)
    decided = b != INDET
    assert np.array_equal(a[decided], b[decided])


@settings(max_examples=20, deadline=None)
@given(
    st.sampled_from(["n*ln(n)", "n^2+ln(n)", "if_even(n*ln(n),(n-1)*ln(n))", "p(n)^(1-1/n)*ln(n)", "n^1.5", "ln(n)^2+1"]),
    st.integers(min_value=2, max_value=50_000),
)
def test_three_forms_agree_on_float_sequences(text, lo):
    spec = AuxSequenceSpec.expression(text)
    block = xi.scan_block(spec, lo, lo + 300)
    t, g, r = (block.codes[f] for f in xi.FORMS)
    sure = (t != INDET) & (g != INDET) & (r != INDET)
    assert np.array_equal(t[sure], g[sure]) and np.array_equal(g[sure], r[sure])


def test_block_size_and_parallelism_do_not_change_records():
    ref = [r for r in xi.XiScan(twin, 1, 5000, block_size=5000)]
    for bs, par in [(17, 1), (1000, 3), (1 << 15, 8)]:
        got = list(xi.XiScan(twin, 1, 5000, parallelism=par, block_size=bs))
        assert got == ref


def test_clipping_reported():
    scan = xi.xi_scan(AuxSequenceSpec.builtin("n_log_n"), 1, 10)
    assert scan.clipped and scan.start == 2
    assert [r.n for r in scan][0] == 2
    assert not xi.xi_scan(identity, 1, 10).clipped


def test_positivity_error():
    with pytest.raises(PositivityError) as info:
        list(xi.xi_scan(AuxSequenceSpec.expression("50-n"), 1, 100))
    assert info.value.n == 50


def test_empty_range():
    with pytest.raises(EmptyRangeError):
        xi.xi_scan(identity, 10, 5)


def test_density_examples():
    rep = xi.xi_density(identity, 100, 100)
    assert rep.holds >= 1 and rep.blocks[0][2] >= 1
    rep = xi.xi_density(identity, 10**4, 10**3)
    assert rep.every_block_nonempty and len(rep.blocks) == 10
    assert rep.holds + rep.fails + rep.indeterminate == 10**4


def test_twin_density_even_members_are_twins():
    rep = xi.twin_scan(10**4)
    assert rep.pairs and not rep.non_twin


def test_dyadic_blocks_nonempty_to_2_20():
    counts = xi.dyadic_counts(identity, 2, 19)
    assert all(counts[k] > 0 for k in range(2, 20))


def test_records_rows_consistent():
    block = xi.scan_block(identity, 1, 50)
    rows = list(block.rows())
    p = first_primes(51)
    for row, rec in zip(rows, block.records()):
        n = row[0]
        assert row[1] == p[n - 1] and row[2] == p[n] and row[3] == p[n] - p[n - 1]
        assert row[4] == float(rec.Q.value)
        assert row[5] == str(rec.verdict.state) and row[7] is True
    assert xi.FORMS == ("theorem", "gap", "ratio")
    assert {FAILS, HOLDS} >= set(block.codes["gap"].tolist())
