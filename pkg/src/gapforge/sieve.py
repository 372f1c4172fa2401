"""
Segmented sieve of Eratosthenes.

Only odd numbers are stored inside a segment, so a segment covering
``segment_size`` integers needs ``segment_size // 2`` bytes of mask.
Segments are independent once the base primes up to ``sqrt(limit)`` are
known, which lets several workers sieve at once; results are always
emitted in increasing order.

Indices are 1-based: ``p_1 = 2``.
"""

from __future__ import annotations

import math
import threading
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyRangeError

MAX_LIMIT = 2**63 - 1
DEFAULT_SEGMENT_SIZE = 1 << 21


@dataclass(frozen=True)
class SieveConfig:
    limit: int
    segment_size: int = DEFAULT_SEGMENT_SIZE
    parallelism: int = 1

    def __post_init__(self):
        if self.limit < 2:
            raise EmptyRangeError(f"limit must be >= 2, got {self.limit}")
        if self.limit > MAX_LIMIT:
            raise DomainError(f"limit {self.limit} exceeds 2**63 - 1")
        if self.segment_size < 1024:
            raise DomainError(f"segment_size must be >= 1024, got {self.segment_size}")
        if self.parallelism < 1:
            raise DomainError(f"parallelism must be >= 1, got {self.parallelism}")


class PrimeStream:
    """All primes up to a limit, in order, viewed as ``(n, p_n)`` pairs."""

    def __init__(self, primes: np.ndarray, limit: int):
        self.primes = primes
        self.limit = limit

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for i, p in enumerate(self.primes.tolist(), start=1):
            yield i, p

    def __len__(self) -> int:
        return len(self.primes)

    def __getitem__(self, n: int) -> int:
        """Return ``p_n`` (1-based)."""
        if n < 1 or n > len(self.primes):
            raise IndexError(n)
        return int(self.primes[n - 1])

    def __repr__(self) -> str:
        return f"PrimeStream(limit={self.limit}, count={len(self.primes)})"


def small_primes(limit: int) -> np.ndarray:
    """Plain (unsegmented) sieve; used for the base primes."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _sieve_odd_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    # odd numbers in [lo, hi); lo is odd
    size = (hi - lo + 1) // 2
    mask = np.ones(size, dtype=bool)
    if lo == 1:
        mask[0] = False
    for p in base.tolist():
        pp = p * p
        if pp >= hi:
            break
        start = max(pp, -(-lo // p) * p)
        if not start & 1:
            start += p
        if start < hi:
            mask[(start - lo) >> 1 :: p] = False
    return lo + 2 * np.flatnonzero(mask).astype(np.int64)


def iter_prime_segments(config: SieveConfig) -> Iterator[np.ndarray]:
    """Yield arrays of consecutive primes covering ``[2, config.limit]``.

    With ``parallelism > 1`` segments are sieved by a thread pool, but the
    arrays are yielded in increasing order regardless.
    """
    limit = config.limit
    base = small_primes(math.isqrt(limit))
    base = base[base > 2]
    yield np.array([2], dtype=np.int64)
    span = config.segment_size + (config.segment_size & 1)
    bounds = [(lo, min(lo + span, limit + 1)) for lo in range(1, limit + 1, span)]
    if config.parallelism == 1:
        for lo, hi in bounds:
            yield _sieve_odd_segment(lo, hi, base)
        return
    window = 2 * config.parallelism
    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        for i in range(0, len(bounds), window):
            chunk = bounds[i : i + window]
            yield from pool.map(lambda b: _sieve_odd_segment(b[0], b[1], base), chunk)


def primes_up_to(limit: int, config: SieveConfig | None = None) -> PrimeStream:
    """All primes ``<= limit`` with 1-based indices.

    >>> list(primes_up_to(10))
    [(1, 2), (2, 3), (3, 5), (4, 7)]
    """
    if limit < 2:
        raise EmptyRangeError(f"no primes below 2 (limit={limit})")
    if config is None:
        config = SieveConfig(limit)
    elif config.limit != limit:
        config = SieveConfig(limit, config.segment_size, config.parallelism)
    primes = np.concatenate(list(iter_prime_segments(config)))
    return PrimeStream(primes, limit)


def prime_count(x: int) -> int:
    """pi(x), the number of primes ``<= x``."""
    if x < 2:
        return 0
    if x <= _cache.limit:
        return int(np.searchsorted(_cache.primes, x, side="right"))
    total = 0
    for seg in iter_prime_segments(SieveConfig(x)):
        total += len(seg)
    return total


def nth_prime_bound(n: int) -> int:
    """An upper bound for ``p_n``: ``n(ln n + ln ln n)`` for ``n >= 6``."""
    if n < 6:
        return 13
    return int(n * (math.log(n) + math.log(math.log(n)))) + 1


class _PrimeCache:
    """Grow-only table of the first primes, shared by index lookups."""

    def __init__(self):
        self.lock = threading.Lock()
        self.primes = small_primes(1 << 16)
        self.limit = 1 << 16

    def ensure_count(self, count: int) -> np.ndarray:
        primes = self.primes
        if len(primes) >= count:
            return primes
        with self.lock:
            limit = max(nth_prime_bound(count), self.limit * 2)
            while len(self.primes) < count:
                self._extend(limit)
                limit = int(limit * 1.2) + 1
            return self.primes

    def ensure_limit(self, limit: int) -> np.ndarray:
        if limit <= self.limit:
            return self.primes
        with self.lock:
            if limit > self.limit:
                self._extend(limit)
            return self.primes

    def _extend(self, limit: int):
        if limit <= self.limit:
            return
        self.primes = primes_up_to(limit).primes
        self.limit = limit


_cache = _PrimeCache()


def first_primes(count: int) -> np.ndarray:
    """Array holding at least the first ``count`` primes (index 0 is ``p_1``)."""
    return _cache.ensure_count(count)


def primes_below(limit: int) -> np.ndarray:
    """Array of all primes ``<= limit`` (served from the shared cache)."""
    primes = _cache.ensure_limit(limit)
    return primes[: np.searchsorted(primes, limit, side="right")]


def prime_at(indices) -> np.ndarray:
    """Vectorized ``p_n`` lookup for an array of 1-based indices."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        return idx.copy()
    if idx.min() < 1:
        raise DomainError("prime index must be >= 1")
    table = first_primes(int(idx.max()))
    return table[idx - 1]


def nth_prime(n: int) -> int:
    """Return ``p_n``.

    >>> nth_prime(1), nth_prime(5), nth_prime(100)
    (2, 11, 541)
    """
    if n < 1:
        raise DomainError(f"prime index must be >= 1, got {n}")
    return int(first_primes(n)[n - 1])
