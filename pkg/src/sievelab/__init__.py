"""Numerical laboratory for larger-sieve and large-sieve inequalities."""

from .arith import IntegerSet, PrimeTable, ResidueSet, is_prime, primes_up_to
from .report import ReportRow, emit, read_report
from .sieve import PrimePlan, gallagher_bound

__all__ = [
    "IntegerSet",
    "PrimePlan",
    "PrimeTable",
    "ReportRow",
    "ResidueSet",
    "emit",
    "gallagher_bound",
    "is_prime",
    "primes_up_to",
    "read_report",
]
__version__ = "0.1.0"
