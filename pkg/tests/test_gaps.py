import pytest

from gapforge import gap, gap_arrays, gap_stream
from gapforge.errors import DomainError, EmptyRangeError

from oracles import primes_td


def test_examples():
    assert list(gap_stream(1, 3)) == [(1, 2, 3, 1), (2, 3, 5, 2), (3, 5, 7, 2)]
    assert list(gap_stream(4, 4)) == [(4, 7, 11, 4)]
    assert list(gap_stream(1, 1)) == [(1, 2, 3, 1)]
    assert (gap(1), gap(4), gap(100)) == (1, 4, 6)


def test_against_oracle():
    ps = primes_td(20_000)
    n, p, q, g = gap_arrays(1, len(ps) - 1)
    assert g.tolist() == [b - a for a, b in zip(ps, ps[1:])]
    assert p.tolist() == ps[:-1] and q.tolist() == ps[1:]


def test_stream_spans_chunks():
    recs = list(gap_stream(262_140, 262_150))
    assert [r.n for r in recs] == list(range(262_140, 262_151))
    assert all(r.p_next - r.p_n == r.g for r in recs)


def test_errors():
    with pytest.raises(EmptyRangeError):
        list(gap_stream(5, 4))
    with pytest.raises(DomainError):
        gap(0)
