import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapforge import sieve
from gapforge.errors import DomainError, EmptyRangeError
from gapforge.sieve import SieveConfig, nth_prime, prime_at, prime_count, primes_up_to

from oracles import plain_sieve, primes_td

TD_1E5 = primes_td(10**5)


def test_small_limits():
    assert list(primes_up_to(10)) == [(1, 2), (2, 3), (3, 5), (4, 7)]
    assert list(primes_up_to(2)) == [(1, 2)]
    assert list(primes_up_to(3)) == [(1, 2), (2, 3)]


def test_matches_trial_division_to_1e5():
    assert primes_up_to(10**5).primes.tolist() == TD_1E5


def test_count_1e6():
    assert len(primes_up_to(10**6).primes) == 78498
    assert prime_count(10**6) == 78498


@pytest.mark.parametrize("x,expected", [(1, 0), (2, 1), (10, 4), (100, 25), (7919, 1000)])
def test_prime_count(x, expected):
    assert prime_count(x) == expected


@pytest.mark.parametrize("n,p", [(1, 2), (5, 11), (100, 541), (1000, 7919), (10**6, 15485863)])
def test_nth_prime(n, p):
    assert nth_prime(n) == p


def test_nth_prime_rejects_zero():
    with pytest.raises(DomainError):
        nth_prime(0)


def test_empty_range():
    with pytest.raises(EmptyRangeError):
        primes_up_to(1)


def test_config_validation():
    with pytest.raises(ValueError):
        SieveConfig(100, segment_size=10)
    with pytest.raises(ValueError):
        SieveConfig(100, parallelism=0)


def test_stream_indexing():
    ps = primes_up_to(1000)
    assert ps[1] == 2 and ps[168] == 997
    assert len(ps.primes) == 168


def test_prime_at_vectorized():
    idx = np.array([1, 2, 3, 100, 1000])
    assert prime_at(idx).tolist() == [2, 3, 5, 541, 7919]


def test_segment_boundaries_against_plain_sieve():
    # limits and segments chosen so boundaries fall on and around primes
    ref = plain_sieve(200_000)
    for limit in (199_999, 200_000, 131_071, 131_072, 131_073):
        for seg in (1024, 1026, 4096, 65_536):
            got = primes_up_to(limit, SieveConfig(limit, segment_size=seg)).primes
            assert got.tolist() == ref[ref <= limit].tolist(), (limit, seg)


@settings(max_examples=25, deadline=None)
@given(
    limit=st.integers(min_value=2, max_value=300_000),
    seg=st.integers(min_value=1024, max_value=50_000),
    par=st.integers(min_value=1, max_value=8),
)
def test_output_independent_of_segmentation(limit, seg, par):
    got = primes_up_to(limit, SieveConfig(limit, segment_size=seg, parallelism=par)).primes
    base = sieve.primes_below(limit)
    assert np.array_equal(got, base)


def test_cache_grows_consistently():
    a = sieve.first_primes(10).tolist()
    b = sieve.first_primes(20_000)[:20_000]
    assert a[:10] == b[:10].tolist()
    assert b.tolist() == plain_sieve(int(b[-1])).tolist()
