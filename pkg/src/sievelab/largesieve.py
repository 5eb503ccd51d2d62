"""The large sieve variant, its dual form, the dual-norm bound and energy lifting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .additive import additive_energy
from .arith import IntegerSet, occupancy, primes_up_to
from .fourier import WeightFunction, spectrum

Point = Union[float, Fraction]


@dataclass(frozen=True, eq=False)
class FareyFamily:
    """Coefficients g_p(a) on the fractions a/p, p <= P prime, 1 <= a <= p-1.

    ``coeffs[p][a - 1]`` holds g_p(a).
    """

    P: int
    coeffs: dict[int, np.ndarray] = field(repr=False)

    def __post_init__(self):
        primes = set(primes_up_to(self.P))
        if set(self.coeffs) != primes:
            raise ValueError(f"need coefficient vectors for exactly the primes <= {self.P}")
        for p, g in self.coeffs.items():
            if len(g) != p - 1:
                raise ValueError(f"g_{p} must have length {p - 1}")

    @classmethod
    def zeros(cls, P: int) -> "FareyFamily":
        return cls(P, {p: np.zeros(p - 1, dtype=complex) for p in primes_up_to(P)})

    @classmethod
    def delta(cls, P: int, p: int, a: int, value: complex = 1.0) -> "FareyFamily":
        fam = cls.zeros(P)
        fam.coeffs[p][a - 1] = value
        return fam

    @classmethod
    def random(cls, P: int, rng: np.random.Generator, kind: str = "gaussian") -> "FareyFamily":
        coeffs = {}
        for p in primes_up_to(P):
            if kind == "gaussian":
                g = rng.standard_normal(p - 1) + 1j * rng.standard_normal(p - 1)
            elif kind == "sparse":
                g = np.zeros(p - 1, dtype=complex)
                hits = rng.random(p - 1) < 0.2
                g[hits] = rng.standard_normal(hits.sum()) + 1j * rng.standard_normal(hits.sum())
            elif kind == "aligned":
                # phases chosen so every term of L g(n0) is real positive for a random n0
                n0 = int(rng.integers(1, 1 << 20))
                a = np.arange(1, p)
                g = rng.random(p - 1) * np.exp(-2j * np.pi * ((a * n0) % p) / p)
            else:
                raise ValueError(f"unknown kind {kind!r}")
            coeffs[p] = g
        return cls(P, coeffs)

    @classmethod
    def from_function(cls, f: WeightFunction, P: int) -> "FareyFamily":
        """h(a/p) = hat f(a/p), the image of f under the adjoint of L."""
        return cls(P, {p: spectrum(f, p).amplitudes for p in primes_up_to(P)})

    def __add__(self, other: "FareyFamily") -> "FareyFamily":
        return FareyFamily(self.P, {p: self.coeffs[p] + other.coeffs[p] for p in self.coeffs})

    def __sub__(self, other: "FareyFamily") -> "FareyFamily":
        return FareyFamily(self.P, {p: self.coeffs[p] - other.coeffs[p] for p in self.coeffs})

    def scaled(self, t: float) -> "FareyFamily":
        return FareyFamily(self.P, {p: t * g for p, g in self.coeffs.items()})

    def is_zero(self) -> bool:
        return all(not np.any(g) for g in self.coeffs.values())


@dataclass(frozen=True)
class NormBundle:
    y1: float
    l2: float
    y: float
    k: int


def _lp(v: np.ndarray, q: float) -> float:
    return float(np.sum(np.abs(v) ** q) ** (1 / q))


def norms(g: FareyFamily, k: int) -> NormBundle:
    """||g||_{Y_1}, ||g||_2 and their sum ||g||_Y."""
    q = 2 * k / (2 * k - 1)
    y1 = sum(_lp(v, q) ** (2 * k) for v in g.coeffs.values()) ** (1 / (2 * k))
    l2 = math.sqrt(sum(float(np.sum(np.abs(v) ** 2)) for v in g.coeffs.values()))
    return NormBundle(y1, l2, y1 + l2, k)


def dual_y1_norm(h: FareyFamily, k: int) -> float:
    """||h||_{Y_1^*} = (sum_p ||h_p||_{2k}^{2k/(2k-1)})^{(2k-1)/2k}."""
    e = 2 * k / (2 * k - 1)
    return sum(_lp(v, 2 * k) ** e for v in h.coeffs.values()) ** (1 / e)


def dual_lower_norm(h: FareyFamily, k: int) -> float:
    """P^{-(k-1)/2k} (sum_p ||h_p||_2^{2k/(2k-1)})^{(2k-1)/2k}."""
    e = 2 * k / (2 * k - 1)
    inner = sum(_lp(v, 2) ** e for v in h.coeffs.values()) ** (1 / e)
    return h.P ** (-(k - 1) / (2 * k)) * inner


@dataclass(frozen=True)
class VariantReport:
    k: int
    P: int
    N: int
    lhs: float
    rhs_first: float
    rhs_second: float
    ratio: Optional[float]

    @property
    def rhs(self) -> float:
        return self.rhs_first + self.rhs_second


def variant_sides(f: WeightFunction, P: int, k: int) -> VariantReport:
    if k < 1 or P < 2:
        raise ValueError("need k >= 1 and P >= 2")
    N = f.ambient
    e = k / (2 * k - 1)
    lhs = sum(max(spectrum(f, p).energy, 0.0) ** e for p in primes_up_to(P))
    mass = f.power_sum(2 * k / (2 * k - 1))
    front = P ** ((k - 1) / (2 * k - 1)) * mass
    first = front * N ** (1 / (2 * k - 1))
    second = front * P ** (2 * k / (2 * k - 1))
    den = first + second
    return VariantReport(k, P, N, lhs, first, second, lhs / den if den > 0 else None)


def farey_points(P: int) -> list[Fraction]:
    """The reduced fractions a/p with p <= P prime and 1 <= a <= p-1, ascending."""
    return sorted(Fraction(a, p) for p in primes_up_to(P) for a in range(1, p))


def _circle_distance(x: Point, y: Point) -> Point:
    d = (x - y) % 1
    return min(d, 1 - d)


def _exp_sum(ns: np.ndarray, vs: np.ndarray, x: Point) -> complex:
    if isinstance(x, Fraction):
        # exact reduction of x*n mod 1 before the phase is taken
        num, den = x.numerator, x.denominator
        frac = ((num * ns) % den) / den
    else:
        frac = np.mod(x * ns, 1.0)
    return complex(np.dot(vs, np.exp(-2j * np.pi * frac)))


@dataclass(frozen=True)
class ClassicalReport:
    N: int
    delta: float
    points: int
    lhs: float
    rhs: float
    ratio: Optional[float]
    constant: float = 1.0  # lhs <= (N - 1 + 1/delta) sum |f|^2 <= rhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.constant * self.rhs * (1 + 1e-9) + 1e-9


def classical_large_sieve_sides(f: WeightFunction, points: Sequence[Point], delta: float) -> ClassicalReport:
    pts = sorted(points, key=lambda x: x % 1)
    if delta <= 0:
        raise ValueError("delta must be positive")
    for x, y in zip(pts, pts[1:] + pts[:1]):
        if len(pts) > 1 and _circle_distance(x, y) < delta * (1 - 1e-12):
            raise ValueError(f"points {x} and {y} are closer than delta={delta}")
    ns, vs = f.support()
    lhs = sum(abs(_exp_sum(ns, vs, x)) ** 2 for x in pts)
    rhs = (f.ambient + 1 / delta) * f.power_sum(2)
    return ClassicalReport(f.ambient, delta, len(pts), lhs, rhs, lhs / rhs if rhs > 0 else None)


def apply_L(g: FareyFamily, N: int) -> np.ndarray:
    """(L g)(n) = sum_p sum_a g_p(a) e(a n / p) for n = 1..N."""
    n = np.arange(1, N + 1)
    out = np.zeros(N, dtype=complex)
    for p, gp in g.coeffs.items():
        full = np.concatenate(([0.0], gp))
        # G[r] = sum_a g_p(a) e(a r / p), an inverse DFT scaled by p
        G = np.fft.ifft(full) * p
        out += G[n % p]
    return out


def dual_operator_ratio(g: FareyFamily, N: int, k: int) -> float:
    """||L g||_{2k} / ||g||_Y."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if g.is_zero():
        raise ValueError("g must be nonzero")
    Lg = apply_L(g, N)
    return _lp(Lg, 2 * k) / norms(g, k).y


def operator_norm_probe(N: int, P: int, k: int, trials: int, seed: int) -> dict:
    """Largest ||L g||_{2k} / ||g||_Y / (N^{1/2k} + P) over seeded random probes."""
    root = np.random.SeedSequence(seed)
    kinds = ("gaussian", "sparse", "aligned")
    best = 0.0
    best_kind = None
    for i, child in enumerate(root.spawn(trials)):
        rng = np.random.default_rng(child)
        kind = kinds[i % len(kinds)]
        g = FareyFamily.random(P, rng, kind)
        if g.is_zero():
            continue
        r = dual_operator_ratio(g, N, k) / (N ** (1 / (2 * k)) + P)
        if r > best:
            best, best_kind = r, kind
    return {"N": N, "P": P, "k": k, "trials": trials, "max_normalized_ratio": best, "argmax_kind": best_kind}


@dataclass
class DualNormReport:
    k: int
    P: int
    rhs: float
    rows: list[tuple[float, bool]]  # (2 * max(||h1||_{Y1*}, ||h2||_2), holds)

    @property
    def violations(self) -> int:
        return sum(1 for _, ok in self.rows if not ok)


def dual_norm_lower_check(h: FareyFamily, decompositions: Iterable[tuple[FareyFamily, FareyFamily]],
                          k: int) -> DualNormReport:
    rhs = dual_lower_norm(h, k)
    rows = []
    for h1, h2 in decompositions:
        for p, v in h.coeffs.items():
            s = h1.coeffs[p] + h2.coeffs[p]
            if not np.allclose(s, v, rtol=1e-12, atol=1e-12 * (1 + float(np.max(np.abs(v), initial=0)))):
                raise ValueError("decomposition does not sum to h")
        lhs = 2 * max(dual_y1_norm(h1, k), math.sqrt(sum(float(np.sum(np.abs(v) ** 2)) for v in h2.coeffs.values())))
        rows.append((lhs, lhs >= rhs * (1 - 1e-12)))
    return DualNormReport(k, h.P, rhs, rows)


def random_decompositions(h: FareyFamily, count: int, rng: np.random.Generator) -> list[tuple[FareyFamily, FareyFamily]]:
    """Trivial splits plus random convex and random-noise splits of h."""
    out = [(h, FareyFamily.zeros(h.P)), (FareyFamily.zeros(h.P), h)]
    while len(out) < count:
        if rng.random() < 0.5:
            h1 = h.scaled(float(rng.random()))
        else:
            h1 = FareyFamily.random(h.P, rng, "gaussian")
        out.append((h1, h - h1))
    return out[:count]


@dataclass
class HolderReport:
    k: int
    size: int
    N: int
    energy: int
    lhs: float  # sum (1_A * 1_A)^{2k/(2k-1)}
    middle: float  # (sum conv)^{(2k-2)/(2k-1)} (sum conv^2)^{1/(2k-1)}
    rhs: float  # |A|^{4(k-1)/(2k-1)} E(A)^{1/(2k-1)}
    primes_used: int
    lifting_ratio: Optional[float]  # E(A) / (|A|^3 |A|/sqrt N (|P|/N^{1/2k})^{2k-1})

    @property
    def holds(self) -> bool:
        tol = 1e-9 * max(1.0, self.rhs)
        return self.lhs <= self.middle + tol and self.middle <= self.rhs + tol


def self_convolution(A: IntegerSet) -> np.ndarray:
    """(1_A * 1_A)(n) for n = 0..2N by direct pair counting."""
    return np.bincount(np.add.outer(A.array, A.array).ravel(), minlength=2 * A.ambient + 1)


def holder_energy_chain(A: IntegerSet, k: int, good_primes: Optional[Iterable[int]] = None) -> HolderReport:
    if len(A) == 0 or k < 1:
        raise ValueError("need nonempty A and k >= 1")
    conv = self_convolution(A).astype(float)
    energy = additive_energy(A)
    q = 2 * k / (2 * k - 1)
    lhs = float(np.sum(conv**q))
    middle = float(np.sum(conv) ** ((2 * k - 2) / (2 * k - 1)) * np.sum(conv**2) ** (1 / (2 * k - 1)))
    rhs = len(A) ** (4 * (k - 1) / (2 * k - 1)) * energy ** (1 / (2 * k - 1))
    N = A.ambient
    Q = int(math.floor(N ** (1 / (2 * k)) * (1 + 1e-12)))
    if good_primes is None:
        good = [p for p in primes_up_to(Q) if occupancy(A, p) < p]
    else:
        good = list(good_primes)
    ratio = None
    if good:
        n = len(A)
        scale = n**3 * (n / math.sqrt(N)) * (len(good) / N ** (1 / (2 * k))) ** (2 * k - 1)
        ratio = energy / scale
    return HolderReport(k, len(A), N, energy, lhs, middle, rhs, len(good), ratio)


@dataclass
class CorollaryReport:
    k: int
    N: int
    size: int
    P: int
    per_prime: list[dict]
    failing_primes: list[int]
    size_over_sqrtN: float

    @property
    def applicable(self) -> bool:
        return not self.failing_primes

    @property
    def min_energy_ratio(self) -> Optional[float]:
        vals = [r["energy"] / self.size**2 for r in self.per_prime if self.size]
        return min(vals) if vals else None


def corollary_scenario(A: IntegerSet, k: int) -> CorollaryReport:
    """Check 'A misses >= 0.1p classes mod every p <= N^{1/2k}' and the I_p >> |A|^2 step."""
    N = A.ambient
    P = int(math.floor(N ** (1 / (2 * k)) * (1 + 1e-12)))
    f = WeightFunction.indicator(A)
    n = len(A)
    rows, failing = [], []
    for p in primes_up_to(P):
        occ = occupancy(A, p)
        missing = p - occ
        ok = missing >= 0.1 * p
        if not ok:
            failing.append(p)
        energy = spectrum(f, p).energy
        # Cauchy-Schwarz over fibers: I_p >= |A|^2 (p / |A mod p| - 1)
        bound = n * n * (p / occ - 1) if occ else 0.0
        rows.append({"p": p, "occupancy": occ, "missing": missing, "hypothesis": ok,
                     "energy": energy, "fiber_bound": bound})
    return CorollaryReport(k, N, n, P, rows, failing, n / math.sqrt(N))
