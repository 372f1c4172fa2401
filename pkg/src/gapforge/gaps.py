"""Prime gaps ``g_n = p_{n+1} - p_n`` as indexed records."""

from __future__ import annotations

from collections.abc import Iterator
from typing import NamedTuple

import numpy as np

from .errors import DomainError, EmptyRangeError
from .sieve import first_primes

CHUNK = 1 << 18


class GapRecord(NamedTuple):
    n: int
    p_n: int
    p_next: int
    g: int


def gap_arrays(n_start: int, n_end: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(n, p_n, p_next, g)`` as int64 arrays for ``n`` in ``[n_start, n_end]``."""
    if n_start < 1 or n_start > n_end:
        raise EmptyRangeError(f"invalid index range [{n_start}, {n_end}]")
    primes = first_primes(n_end + 1)[n_start - 1 : n_end + 1]
    p, q = primes[:-1], primes[1:]
    return np.arange(n_start, n_end + 1, dtype=np.int64), p, q, q - p


def gap_stream(n_start: int, n_end: int) -> Iterator[GapRecord]:
    """Gap records for every ``n`` in ``[n_start, n_end]``, in order.

    >>> list(gap_stream(1, 3))
    [GapRecord(n=1, p_n=2, p_next=3, g=1), GapRecord(n=2, p_n=3, p_next=5, g=2), GapRecord(n=3, p_n=5, p_next=7, g=2)]
    """
    if n_start < 1 or n_start > n_end:
        raise EmptyRangeError(f"invalid index range [{n_start}, {n_end}]")
    first_primes(n_end + 1)
    for lo in range(n_start, n_end + 1, CHUNK):
        hi = min(lo + CHUNK - 1, n_end)
        arrays = gap_arrays(lo, hi)
        for n, p, q, g in zip(*(a.tolist() for a in arrays)):
            yield GapRecord(n, p, q, g)


def gap(n: int) -> int:
    """``g_n``.

    >>> gap(1), gap(4), gap(100)
    (1, 4, 6)
    """
    if n < 1:
        raise DomainError(f"gap index must be >= 1, got {n}")
    p = first_primes(n + 1)
    return int(p[n] - p[n - 1])
