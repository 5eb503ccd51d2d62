"""Sumsets, representation counts, additive energy and AP covers in Z/pZ."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Union

import numpy as np

from .arith import IntegerSet, ResidueSet, is_prime


@dataclass(frozen=True)
class RepCountProfile:
    """nu(h) = |A ∩ (A + h)|.

    For a residue set ``counts`` is a tuple indexed by h in Z/pZ; for an
    integer set ``modulus`` is None and ``counts`` maps each h in A - A to nu(h).
    """

    modulus: Optional[int]
    counts: Union[tuple[int, ...], Mapping[int, int]]

    def __getitem__(self, h: int) -> int:
        if self.modulus is not None:
            return self.counts[h % self.modulus]
        return self.counts.get(h, 0)

    def total(self) -> int:
        vals = self.counts if self.modulus is not None else self.counts.values()
        return sum(vals)


@dataclass(frozen=True)
class ApWindow:
    """{start + i*step : 0 <= i < length} in Z/pZ."""

    p: int
    start: int
    step: int
    length: int

    def __post_init__(self):
        if self.step % self.p == 0:
            raise ValueError("step must be nonzero mod p")
        if not 1 <= self.length <= self.p:
            raise ValueError(f"length must be in [1, {self.p}]")
        if not (0 <= self.start < self.p and 0 < self.step < self.p):
            raise ValueError("start and step must be reduced residues")

    def residues(self) -> ResidueSet:
        return ResidueSet.of((self.start + i * self.step for i in range(self.length)), self.p)

    def contains(self, S: ResidueSet) -> bool:
        return S.issubset(self.residues())


def sumset(A: ResidueSet, B: ResidueSet) -> ResidueSet:
    if A.modulus != B.modulus:
        raise ValueError(f"modulus mismatch: {A.modulus} vs {B.modulus}")
    out = ResidueSet(A.modulus, 0)
    for b in B:
        out = out | A.shift(b)
    return out


def cdc_bound(A: ResidueSet, B: ResidueSet) -> int:
    """Cauchy-Davenport lower bound min(p, |A|+|B|-1)."""
    return min(A.modulus, len(A) + len(B) - 1)


def rep_counts_mod(A: ResidueSet) -> RepCountProfile:
    p = A.modulus
    return RepCountProfile(p, tuple(len(A & A.shift(h)) for h in range(p)))


def _pair_profile(values: np.ndarray) -> dict[int, int]:
    keys, counts = np.unique(values, return_counts=True)
    return {int(k): int(c) for k, c in zip(keys, counts)}


def _correlate(A: IntegerSet, sums: bool) -> dict[int, int]:
    arr = A.array
    if len(arr) == 0:
        return {}
    if len(arr) <= 2000:
        outer = np.add.outer(arr, arr) if sums else np.subtract.outer(arr, arr)
        return _pair_profile(outer.ravel())
    # indicator convolution; counts are small integers so rounding is exact
    ind = np.zeros(A.ambient + 1)
    ind[arr] = 1.0
    other = ind if sums else ind[::-1]
    size = 2 * len(ind) - 1
    n = 1 << (size - 1).bit_length()
    conv = np.fft.irfft(np.fft.rfft(ind, n) * np.fft.rfft(other, n), n)[:size]
    conv = np.rint(conv).astype(np.int64)
    offset = 0 if sums else len(ind) - 1
    nz = np.flatnonzero(conv)
    return {int(i) - offset: int(conv[i]) for i in nz}


def rep_counts(A: IntegerSet) -> RepCountProfile:
    """Sparse difference profile over Z, keyed by h in A - A."""
    return RepCountProfile(None, _correlate(A, sums=False))


def sum_counts(A: IntegerSet) -> dict[int, int]:
    """r(s) = #{(a, b) in A^2 : a + b = s}."""
    return _correlate(A, sums=True)


def additive_energy(A: IntegerSet) -> int:
    return sum(r * r for r in sum_counts(A).values())


def representation_counts(A: ResidueSet, B: ResidueSet) -> list[int]:
    """r(s) = |A ∩ (s - B)| for s in Z/pZ."""
    if A.modulus != B.modulus:
        raise ValueError(f"modulus mismatch: {A.modulus} vs {B.modulus}")
    negB = B.negate()
    return [len(A & negB.shift(s)) for s in range(A.modulus)]


def robust_cdc_set(A: ResidueSet, B: ResidueSet, K: float) -> tuple[ResidueSet, float]:
    """Elements with at least K representations, and the robust CDC lower bound.

    The bound is only guaranteed when |A|, |B| >= sqrt(K p); see
    :func:`robust_cdc_applies`.
    """
    p = A.modulus
    reps = representation_counts(A, B)
    S = ResidueSet.of((s for s, r in enumerate(reps) if r >= K), p)
    bound = cdc_bound(A, B) - 3 * math.sqrt(K * p)
    return S, bound


def robust_cdc_applies(A: ResidueSet, B: ResidueSet, K: float) -> bool:
    # |A| >= sqrt(Kp)  <=>  |A|^2 >= Kp, compared without a square root
    t = K * A.modulus
    return len(A) ** 2 >= t and len(B) ** 2 >= t


def min_ap_cover(A: ResidueSet) -> ApWindow:
    """Shortest AP window containing A; smallest step then smallest start on ties."""
    p = A.modulus
    members = A.members
    if not members:
        raise ValueError("A must be nonempty")
    if len(members) == 1:
        return ApWindow(p, members[0], 1, 1)
    if len(members) == p:
        return ApWindow(p, 0, 1, p)
    best: Optional[tuple[int, int, int]] = None  # (length, step, start)
    for d in range(1, max(1, (p - 1) // 2) + 1):
        dinv = pow(d, -1, p)
        scaled = sorted(r * dinv % p for r in members)
        gaps = [(scaled[(i + 1) % len(scaled)] - scaled[i]) % p for i in range(len(scaled))]
        g = max(gaps)
        length = p - g + 1
        if best is not None and length > best[0]:
            continue
        # the window begins right after a largest gap; pick the smallest start
        start = min(scaled[(i + 1) % len(scaled)] * d % p for i, gi in enumerate(gaps) if gi == g)
        cand = (length, d, start)
        if best is None or cand < best:
            best = cand
    length, step, start = best
    return ApWindow(p, start, step, length)


def ap_window_intersect_shift(S: ApWindow, h: int) -> int:
    """|S ∩ (S + h)| from the window arithmetic alone."""
    p, L = S.p, S.length
    # in index coordinates S is [0, L) and S + h is [t, t + L) mod p
    t = (h % p) * pow(S.step, -1, p) % p
    return max(0, L - t) + max(0, t + L - p)


def grynkiewicz_sweep(p: int, c: float, samples: int, seed: int = 0) -> dict:
    """Random consistency sweep of the small-doubling AP structure statement.

    Samples A, B with |A|, |B| >= cp + 3 built near APs (so the doubling
    hypothesis is met often), and whenever the hypothesis holds checks that
    the minimal AP cover of A has length <= |A| + cp.
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    rng = random.Random(seed)
    lo = math.ceil(c * p + 3)
    tested = violations = 0
    worst = None
    for _ in range(samples):
        if lo > p:
            break
        # a shared step keeps A + B short, which is when the hypothesis bites
        step = rng.randrange(1, p)
        # sizes up to p/2 leave room for |A+B| <= (1-c)p - 3
        hi = max(lo, p // 2)
        A = _near_ap(p, rng.randint(lo, hi), rng, step)
        B = _near_ap(p, rng.randint(lo, hi), rng, step if rng.random() < 0.9 else None)
        if len(A) < lo or len(B) < lo:
            continue
        size = len(sumset(A, B))
        if size > min(len(A) + len(B) - 1 + c * p, (1 - c) * p - 3):
            continue
        tested += 1
        cover = min_ap_cover(A).length
        if cover > len(A) + c * p:
            violations += 1
            worst = worst or (A.members, B.members)
    return {"p": p, "c": c, "tested": tested, "violations": violations, "witness": worst}


def _near_ap(p: int, size: int, rng: random.Random, step: Optional[int] = None) -> ResidueSet:
    # an AP of length ~size with a few holes punched and a few strays added
    step = step or rng.randrange(1, p)
    start = rng.randrange(p)
    length = min(p, size + rng.randint(0, 2))
    members = {(start + i * step) % p for i in range(length)}
    for _ in range(rng.randint(0, 2)):
        if len(members) > 1:
            members.discard(rng.choice(sorted(members)))
    if rng.random() < 0.3:
        members.add(rng.randrange(p))
    return ResidueSet.of(members, p)


def largest_clean_c(p: int, cs: list[float], samples: int, seed: int = 0) -> Optional[float]:
    """Largest c from ``cs`` whose sweep saw no violation (None if every c failed)."""
    clean = [c for c in cs if grynkiewicz_sweep(p, c, samples, seed)["violations"] == 0]
    return max(clean) if clean else None
