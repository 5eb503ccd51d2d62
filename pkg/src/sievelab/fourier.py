"""Exponential sums at rationals a/p and the per-prime spectral energy I_p(f)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .arith import IntegerSet, is_prime


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """A function f: [1, N] -> C held sparsely; unset points are zero."""

    ambient: int
    values: Mapping[int, complex] = field(repr=False)

    def __post_init__(self):
        for n in self.values:
            if not 1 <= n <= self.ambient:
                raise ValueError(f"support point {n} outside [1, {self.ambient}]")

    @classmethod
    def indicator(cls, A: IntegerSet) -> "WeightFunction":
        return cls(A.ambient, {a: 1.0 for a in A})

    @classmethod
    def from_array(cls, values: np.ndarray) -> "WeightFunction":
        """values[i] is f(i + 1)."""
        values = np.asarray(values)
        nz = np.flatnonzero(values)
        return cls(len(values), {int(i) + 1: complex(values[i]) for i in nz})

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Points and values as parallel numpy arrays, ascending in n."""
        ns = np.fromiter(sorted(self.values), dtype=np.int64, count=len(self.values))
        vs = np.array([self.values[int(n)] for n in ns], dtype=complex)
        return ns, vs

    def dense(self) -> np.ndarray:
        out = np.zeros(self.ambient, dtype=complex)
        ns, vs = self.support()
        out[ns - 1] = vs
        return out

    def total(self) -> complex:
        return complex(sum(self.values.values()))

    def power_sum(self, exponent: float) -> float:
        """Sum of |f(n)|**exponent."""
        _, vs = self.support()
        return float(np.sum(np.abs(vs) ** exponent))


@dataclass(frozen=True, eq=False)
class SpectrumAtPrime:
    p: int
    amplitudes: np.ndarray = field(repr=False)  # index a-1 holds fhat(a/p), a = 1..p-1
    energy: float


def fiber_sums(f: WeightFunction, p: int) -> np.ndarray:
    """F[r] = sum of f(n) over n = r mod p."""
    ns, vs = f.support()
    r = ns % p
    return np.bincount(r, weights=vs.real, minlength=p) + 1j * np.bincount(r, weights=vs.imag, minlength=p)


def _phases(a: int, p: int) -> np.ndarray:
    # reduce a*r mod p in integers so the angle argument stays in [0, 1)
    r = np.arange(p, dtype=np.int64)
    return np.exp(-2j * np.pi * ((a * r) % p) / p)


def fhat(f: WeightFunction, a: int, p: int) -> complex:
    """sum_n f(n) e(-a n / p)."""
    if not 0 <= a < p:
        raise ValueError(f"need 0 <= a < p, got a={a}, p={p}")
    F = fiber_sums(f, p)
    if a == 0:
        return complex(F.sum())
    return complex(np.dot(F, _phases(a, p)))


def spectrum(f: WeightFunction, p: int) -> SpectrumAtPrime:
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    # length-p DFT of the fiber vector; numpy's sign convention matches e(-a r/p)
    amps = np.fft.fft(fiber_sums(f, p))[1:]
    energy = float(np.sum(amps.real**2 + amps.imag**2))
    return SpectrumAtPrime(p, amps, energy)


def parseval_energy(f: WeightFunction, p: int) -> float:
    """I_p(f) via p * sum_r |F_r|^2 - |sum f|^2; independent of the DFT path."""
    F = fiber_sums(f, p)
    return float(p * np.sum(np.abs(F) ** 2) - abs(F.sum()) ** 2)


def max_amplitude(A: IntegerSet, p: int) -> tuple[int, float]:
    """The a in [1, p-1] maximising |hat 1_A(a/p)|, smallest a on ties."""
    if len(A) == 0:
        raise ValueError("A must be nonempty")
    mags = np.abs(spectrum(WeightFunction.indicator(A), p).amplitudes)
    best = int(np.argmax(mags))
    return best + 1, float(mags[best])


def amplitude_constant(p: int, epsilon: float, samples: int, seed: int = 0, N: int | None = None) -> float:
    """Smallest max_a |hat 1_A(a/p)| / |A| seen over random A whose residues fit an AP of length (1-eps)p.

    The lower bound |hat 1_A(a/p)| >> |A| for such A comes with no explicit
    constant; this records the empirical one.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    rng = np.random.default_rng(seed)
    N = N or 50 * p
    length = max(1, int((1 - epsilon) * p))
    ns = np.arange(1, N + 1)
    worst = np.inf
    for _ in range(samples):
        start, step = int(rng.integers(p)), int(rng.integers(1, p))
        allowed = np.zeros(p, dtype=bool)
        allowed[(start + step * np.arange(length)) % p] = True
        pool = ns[allowed[ns % p]]
        pick = pool[rng.random(pool.size) < rng.uniform(0.05, 1.0)]
        if pick.size == 0:
            pick = pool[:1]
        A = IntegerSet(N, tuple(int(n) for n in pick))
        worst = min(worst, max_amplitude(A, p)[1] / len(A))
    return float(worst)
