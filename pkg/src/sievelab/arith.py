"""Primes, primality, residue projections and the set types shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

# Miller-Rabin with the first 12 prime bases is deterministic below 3.3e24,
# which covers the whole supported range.
MAX_PRIMALITY_INPUT = 2**64
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

# Residue sets are bitmasks; moduli above this cap are refused.
RESIDUE_MODULUS_CAP = 2**20


def _sieve_flags(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """All primes up to ``limit`` inclusive, ascending."""

    limit: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self) -> Iterator[int]:
        return (int(p) for p in self.primes)

    def __contains__(self, n: object) -> bool:
        if not isinstance(n, (int, np.integer)) or n < 2 or n > self.limit:
            return False
        i = int(np.searchsorted(self.primes, n))
        return i < len(self.primes) and int(self.primes[i]) == n

    def up_to(self, bound: int) -> list[int]:
        """Primes of the table that are <= bound."""
        stop = int(np.searchsorted(self.primes, bound, side="right"))
        return [int(p) for p in self.primes[:stop]]

    @cached_property
    def log_weights(self) -> np.ndarray:
        """log p / p for every listed prime."""
        ps = self.primes.astype(float)
        return np.log(ps) / ps


def primes_up_to(limit: int) -> PrimeTable:
    if limit < 0:
        raise ValueError(f"limit must be non-negative, got {limit}")
    if limit < 2:
        primes = np.zeros(0, dtype=np.int64)
    else:
        primes = np.flatnonzero(_sieve_flags(limit)).astype(np.int64)
    primes.setflags(write=False)
    return PrimeTable(limit, primes)


def is_prime(n: int) -> bool:
    """Deterministic primality for 0 <= n < 2**64."""
    n = int(n)
    if n < 0 or n >= MAX_PRIMALITY_INPUT:
        raise ValueError(f"is_prime supports 0 <= n < 2**64, got {n}")
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def log_weight_sum(table: PrimeTable, filter: Optional[Callable[[int], bool]] = None) -> float:
    """Sum of log p / p over the table, optionally restricted by ``filter``."""
    if filter is None:
        return float(table.log_weights.sum())
    return float(sum(w for p, w in zip(table, table.log_weights) if filter(p)))


@dataclass(frozen=True)
class IntegerSet:
    """A finite set of integers inside [1, N]."""

    ambient: int
    elements: tuple[int, ...]

    def __post_init__(self):
        if self.ambient < 1:
            raise ValueError("ambient N must be >= 1")
        els = self.elements
        if any(b <= a for a, b in zip(els, els[1:])):
            raise ValueError("elements must be strictly increasing")
        if els and (els[0] < 1 or els[-1] > self.ambient):
            raise ValueError(f"elements must lie in [1, {self.ambient}]")

    @classmethod
    def of(cls, elements: Iterable[int], N: Optional[int] = None) -> "IntegerSet":
        els = tuple(sorted({int(a) for a in elements}))
        if N is None:
            N = els[-1] if els else 1
        return cls(int(N), els)

    @classmethod
    def interval(cls, n: int, N: Optional[int] = None) -> "IntegerSet":
        return cls(N or n, tuple(range(1, n + 1)))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __contains__(self, n: object) -> bool:
        return n in self.as_frozenset

    @cached_property
    def as_frozenset(self) -> frozenset[int]:
        return frozenset(self.elements)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.elements, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def fiber_counts(self, p: int) -> np.ndarray:
        """x_r = #{a in A : a = r mod p} for r = 0..p-1."""
        return np.bincount(self.array % p, minlength=p)

    def intersect_shift(self, h: int) -> "IntegerSet":
        """A ∩ (A + h), kept inside the same ambient interval."""
        s = self.as_frozenset
        return IntegerSet(self.ambient, tuple(a for a in self.elements if a - h in s))


def _mask(p: int) -> int:
    return (1 << p) - 1


@dataclass(frozen=True)
class ResidueSet:
    """A subset of Z/pZ stored as a p-bit mask (bit r set iff r is a member)."""

    modulus: int
    bits: int

    def __post_init__(self):
        if self.modulus > RESIDUE_MODULUS_CAP:
            raise ValueError(f"modulus {self.modulus} exceeds cap {RESIDUE_MODULUS_CAP}")
        if not is_prime(self.modulus):
            raise ValueError(f"modulus must be prime, got {self.modulus}")
        if self.bits < 0 or self.bits >> self.modulus:
            raise ValueError("bits outside Z/pZ")

    @classmethod
    def of(cls, members: Iterable[int], p: int) -> "ResidueSet":
        bits = 0
        for r in members:
            bits |= 1 << (int(r) % p)
        return cls(p, bits)

    @classmethod
    def full(cls, p: int) -> "ResidueSet":
        return cls(p, _mask(p))

    @classmethod
    def from_flags(cls, flags: np.ndarray) -> "ResidueSet":
        """Build from a boolean array of length p."""
        p = len(flags)
        packed = np.packbits(np.asarray(flags, dtype=bool), bitorder="little")
        return cls(p, int.from_bytes(packed.tobytes(), "little"))

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, r: object) -> bool:
        return isinstance(r, (int, np.integer)) and bool(self.bits >> (int(r) % self.modulus) & 1)

    def __iter__(self) -> Iterator[int]:
        bits, r = self.bits, 0
        while bits:
            if bits & 1:
                yield r
            bits >>= 1
            r += 1

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(self)

    def shift(self, h: int) -> "ResidueSet":
        """The translate A + h."""
        p = self.modulus
        h %= p
        if h == 0:
            return self
        rotated = ((self.bits << h) | (self.bits >> (p - h))) & _mask(p)
        return ResidueSet(p, rotated)

    def negate(self) -> "ResidueSet":
        return ResidueSet.of(((-r) % self.modulus for r in self), self.modulus)

    def scale(self, d: int) -> "ResidueSet":
        return ResidueSet.of((r * d for r in self), self.modulus)

    def _check(self, other: "ResidueSet") -> None:
        if other.modulus != self.modulus:
            raise ValueError(f"modulus mismatch: {self.modulus} vs {other.modulus}")

    def __and__(self, other: "ResidueSet") -> "ResidueSet":
        self._check(other)
        return ResidueSet(self.modulus, self.bits & other.bits)

    def __or__(self, other: "ResidueSet") -> "ResidueSet":
        self._check(other)
        return ResidueSet(self.modulus, self.bits | other.bits)

    def issubset(self, other: "ResidueSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0


def project_mod(A: IntegerSet, p: int) -> ResidueSet:
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    flags = np.zeros(p, dtype=bool)
    flags[A.array % p] = True
    return ResidueSet.from_flags(flags)


def occupancy(A: IntegerSet, p: int) -> int:
    """|A mod p| without building the residue set."""
    return int(np.count_nonzero(np.bincount(A.array % p, minlength=p)))
