"""Prime-gap experiments: sieving, auxiliary sequences and verified inequality scans."""

from .errors import BitBudgetExceeded, DomainError, EmptyRangeError, GapforgeError, ParseError, PositivityError
from .expr import evaluate, parse_sequence_expr, to_text
from .gaps import GapRecord, gap, gap_arrays, gap_stream
from .kummer import (
    KummerCheck,
    KummerWitness,
    NotFoundUpTo,
    SeriesSpec,
    canonical_b,
    canonical_identity,
    find_violation_witness,
    kummer_inequality_scan,
)
from .numeric import EvalValue, State, Verdict
from .recurrence import RecurrenceRun, iterate_equality, q_monotone_audit
from .sequences import AuxSequenceSpec, eval_q, eval_Q, eval_u
from .sieve import PrimeStream, SieveConfig, first_primes, nth_prime, prime_count, primes_up_to
from .xi import XiRecord, xi_scan, ratio_check, theorem_check, gap_check, twin_scan, xi_density

__version__ = "0.1.0"
