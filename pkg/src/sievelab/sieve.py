"""Gallagher's larger sieve and its refinements as evaluable functionals.

Every lemma checker returns a report that says whether the hypotheses were met
and which inequality of the argument held on the instance, rather than a bare
boolean.  Inequalities whose proofs carry O(1) slack are compared with an
explicit additive ``slack``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .additive import rep_counts
from .arith import IntegerSet, PrimeTable, is_prime, occupancy, primes_up_to

REL_TOL = 1e-9
DEFAULT_SLACK = 2.0


@dataclass(frozen=True, eq=False)
class PrimePlan:
    """Primes up to Q with a distinguished subset ``good`` and the (alpha, c) in play."""

    Q: int
    table: PrimeTable = field(repr=False)
    good: frozenset[int]
    alpha: float
    c: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if any(p > self.Q or p not in self.table for p in self.good):
            raise ValueError("good primes must be primes <= Q")

    @classmethod
    def build(cls, Q: int, alpha: float, c: float, good: Optional[Iterable[int]] = None) -> "PrimePlan":
        table = primes_up_to(Q)
        good_set = frozenset(table) if good is None else frozenset(int(p) for p in good)
        return cls(Q, table, good_set, alpha, c)

    @property
    def primes(self) -> list[int]:
        return list(self.table)

    def mass(self, primes: Optional[Iterable[int]] = None) -> float:
        ps = self.primes if primes is None else primes
        return sum(math.log(p) / p for p in ps)

    def exceptional_mass(self) -> float:
        return self.mass(p for p in self.table if p not in self.good)


@dataclass(frozen=True, eq=False)
class FiberProfile:
    p: int
    fiber_counts: np.ndarray = field(repr=False)
    second_moment: int


def fiber_profile(A: IntegerSet, p: int) -> FiberProfile:
    x = A.fiber_counts(p)
    return FiberProfile(p, x, int(np.dot(x, x)))


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    holds: bool


def _le(lhs: float, rhs: float, slack: float = 0.0) -> bool:
    return lhs <= rhs + slack + REL_TOL * max(1.0, abs(rhs))


def _lt(lhs: float, rhs: float, slack: float = 0.0) -> bool:
    return lhs < rhs + slack


def gallagher_bound(A: IntegerSet, Q: int) -> tuple[float, float, Optional[float]]:
    """Quantitative larger sieve over primes p <= Q.

    |A| <= (sum log p - log N) / (sum log p / |A mod p| - log N)
    whenever the denominator is positive; the bound is None otherwise.
    """
    if len(A) == 0:
        raise ValueError("A must be nonempty")
    if Q < 2:
        raise ValueError("Q must be >= 2")
    logN = math.log(A.ambient)
    num = den = -logN
    for p in primes_up_to(Q):
        lp = math.log(p)
        num += lp
        den += lp / occupancy(A, p)
    return num, den, (num / den if den > 0 else None)


def occupancy_functional(A: IntegerSet, plan: PrimePlan, primes: Optional[Iterable[int]] = None) -> float:
    """sum over p <= Q of (log p / p) * (|A mod p| / p)."""
    ps = plan.primes if primes is None else primes
    return sum(math.log(p) / p * occupancy(A, p) / p for p in ps)


def amgm_lower(weights: Sequence[tuple[float, float]], kappa: float) -> tuple[float, float]:
    """Returns (sum w/a, sum w / kappa) for pairs (w, a) with sum w*a = kappa * sum w."""
    if not weights or any(w <= 0 or a <= 0 for w, a in weights) or kappa <= 0:
        raise ValueError("weights, values and kappa must be positive")
    W = sum(w for w, _ in weights)
    mean = sum(w * a for w, a in weights)
    if abs(mean - kappa * W) > REL_TOL * abs(mean):
        raise ValueError(f"kappa={kappa} inconsistent with weighted mean {mean / W}")
    return sum(w / a for w, a in weights), W / kappa


@dataclass
class SplitReport:
    """Instance evaluation of the non-uniform sieving size argument."""

    N: int
    alpha: float
    c: float
    cprime: float
    cutoff: int
    hypotheses: dict[str, Check]
    S1: float = 0.0
    S2: float = 0.0
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None
    chain: list[Check] = field(default_factory=list)
    final_value: Optional[float] = None
    final_threshold: float = 0.0
    degenerate: Optional[str] = None

    @property
    def hypotheses_met(self) -> bool:
        return all(c.holds for c in self.hypotheses.values())

    @property
    def final_passes(self) -> bool:
        return self.final_value is not None and self.final_value > self.final_threshold

    def failing_steps(self) -> list[str]:
        return [c.name for c in self.chain if not c.holds]


def nonuniform_size_split(
    A: IntegerSet, plan: PrimePlan, cprime: Optional[float] = None, slack: float = DEFAULT_SLACK
) -> SplitReport:
    """Recompute S1, S2, kappa1, kappa2 and every step of the argument on one instance.

    ``plan.Q`` plays the role of N^alpha; the sums are then cut at
    N^(alpha - c').  ``cprime`` defaults to c^3 alpha / 100.
    """
    alpha, c, N = plan.alpha, plan.c, A.ambient
    if cprime is None:
        cprime = c**3 * alpha / 100
    logN = math.log(N)
    all_primes = plan.primes
    good = [p for p in all_primes if p in plan.good]
    total = plan.mass()
    good_mass = plan.mass(good)
    occ_all = occupancy_functional(A, plan)
    occ_good = occupancy_functional(A, plan, good)
    hyps = {
        "mass": Check("sum_P logp/p >= c sum logp/p", good_mass, c * total, good_mass >= c * total),
        "occupancy_all": Check("occupancy <= (alpha+c') mass", occ_all, (alpha + cprime) * total,
                               _le(occ_all, (alpha + cprime) * total)),
        "occupancy_good": Check("occupancy_P <= (alpha-c) mass_P", occ_good, (alpha - c) * good_mass,
                                _le(occ_good, (alpha - c) * good_mass)),
    }
    cutoff = int(math.floor(N ** (alpha - cprime) * (1 + 1e-12)))
    rep = SplitReport(N, alpha, c, cprime, cutoff, hyps, final_threshold=logN + 1)

    low = [p for p in all_primes if p <= cutoff]
    in_p = [p for p in low if p in plan.good]
    out_p = [p for p in low if p not in plan.good]
    S1 = plan.mass(in_p)
    S2 = plan.mass(out_p)
    rep.S1, rep.S2 = S1, S2
    if S1 == 0 or S2 == 0:
        rep.degenerate = "S1 is zero" if S1 == 0 else "S2 is zero"
        return rep
    k1 = occupancy_functional(A, plan, in_p) / S1
    k2 = occupancy_functional(A, plan, out_p) / S2
    rep.kappa1, rep.kappa2 = k1, k2

    chain = rep.chain
    chain.append(Check("S1+S2 = (alpha-c')logN + O(1)", abs(S1 + S2 - (alpha - cprime) * logN), 0.0,
                       _le(abs(S1 + S2 - (alpha - cprime) * logN), 0.0, slack)))
    chain.append(Check("S1 > c*alpha*logN/2", S1, c * alpha * logN / 2, S1 > c * alpha * logN / 2))
    chain.append(Check("S1 > (1-c/2) mass_P", S1, (1 - c / 2) * good_mass, S1 > (1 - c / 2) * good_mass))
    chain.append(Check("kappa1 <= alpha - c/2", k1, alpha - c / 2, _le(k1, alpha - c / 2)))
    mixed = k1 * S1 + k2 * S2
    chain.append(Check("k1S1+k2S2 < alpha(alpha+c')logN + O(1)", mixed, alpha * (alpha + cprime) * logN,
                       _lt(mixed, alpha * (alpha + cprime) * logN, slack)))
    chain.append(Check("k1S1+k2S2 > alpha(alpha-2c')logN", mixed, alpha * (alpha - 2 * cprime) * logN,
                       mixed > alpha * (alpha - 2 * cprime) * logN))
    gap = (k2 - k1) * S2
    chain.append(Check("(k2-k1)S2 > c*alpha*logN/3", gap, c * alpha * logN / 3, gap > c * alpha * logN / 3))
    chain.append(Check("k2 - k1 > c/3", k2 - k1, c / 3, k2 - k1 > c / 3))
    inv1 = sum(math.log(p) / occupancy(A, p) for p in in_p)
    inv2 = sum(math.log(p) / occupancy(A, p) for p in out_p)
    chain.append(Check("sum_P log p/|A_p| >= S1/k1", inv1, S1 / k1, _le(S1 / k1, inv1)))
    chain.append(Check("sum_notP log p/|A_p| >= S2/k2", inv2, S2 / k2, _le(S2 / k2, inv2)))
    direct = S1 / k1 + S2 / k2
    expanded = ((S1 + S2) ** 2 + S1 * S2 * (k1 - k2) ** 2 / (k1 * k2)) / mixed
    chain.append(Check("S1/k1+S2/k2 identity", direct, expanded,
                       abs(direct - expanded) <= REL_TOL * max(1.0, abs(direct))))
    rep.final_value = direct
    return rep


def _unif_threshold_holds(second_moment: int, size: int, p: int, alpha: float, c: float) -> bool:
    # p * sum x_r^2 <= (1/alpha + c) |A|^2, with alpha and c taken exactly
    return Fraction(p * second_moment) <= (1 / Fraction(alpha) + Fraction(c)) * size * size


def classify_unif_fibers(A: IntegerSet, plan: PrimePlan) -> tuple[frozenset[int], float]:
    """Primes of ``plan.good`` with near-uniform fibers, and the log-mass outside them."""
    n = len(A)
    unif = frozenset(
        p for p in plan.primes
        if p in plan.good and _unif_threshold_holds(fiber_profile(A, p).second_moment, n, p, plan.alpha, plan.c)
    )
    outside = plan.mass(p for p in plan.primes if p not in unif)
    return unif, outside


@dataclass
class FiberReport:
    p: int
    precondition_met: bool
    occupancy: int
    occupancy_floor: float
    light_residues: int
    light_allowance: float

    @property
    def holds(self) -> bool:
        return (self.occupancy + REL_TOL >= self.occupancy_floor
                and self.light_residues <= self.light_allowance + REL_TOL)


def fiber_property_check(A: IntegerSet, p: int, alpha: float, c: float) -> FiberReport:
    prof = fiber_profile(A, p)
    n = len(A)
    x = prof.fiber_counts
    occupied = x[x > 0]
    # the standing assumption |A mod p| <= alpha p comes with membership in the sieving set
    pre = (_unif_threshold_holds(prof.second_moment, n, p, alpha, c)
           and len(occupied) <= alpha * p * (1 + REL_TOL))
    light_cut = (1 / alpha - c ** (1 / 3)) * n / p
    return FiberReport(
        p=p,
        precondition_met=pre,
        occupancy=len(occupied),
        occupancy_floor=alpha * (1 - c * alpha) * p,
        light_residues=int(np.count_nonzero(occupied < light_cut)),
        light_allowance=c ** (1 / 3) * p,
    )


def _nu_tables(A: IntegerSet, primes: Iterable[int], epsilon: float) -> list[tuple[int, np.ndarray]]:
    """Per prime, the weight log p / nu_p(h) on residues with nu_p(h) >= eps p, else 0."""
    out = []
    for p in primes:
        occ = np.zeros(p, dtype=bool)
        occ[A.array % p] = True
        idx = np.flatnonzero(occ)
        # nu_p(h) = #{r in A_p : r - h in A_p}
        nu = np.bincount((idx[:, None] - idx[None, :]).ravel() % p, minlength=p)
        w = np.zeros(p)
        keep = nu >= epsilon * p
        w[keep] = math.log(p) / nu[keep]
        out.append((p, w))
    return out


def _j_primes(plan: PrimePlan, Qcap: Optional[int]) -> list[int]:
    cap = plan.Q if Qcap is None else Qcap
    return [p for p in plan.primes if p in plan.good and p <= cap]


def quantity_J(A: IntegerSet, plan: PrimePlan, epsilon: float, Qcap: Optional[int] = None) -> float:
    """J = sum_{a,b in A} sum_{p in P, p <= Qcap, nu_p(a-b) >= eps p} log p / nu_p(a-b).

    Evaluated through the integer difference profile: sum_h nu(h) * weight(h).
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must be in (0, 1)")
    prof = rep_counts(A).counts
    hs = np.fromiter(prof.keys(), dtype=np.int64, count=len(prof))
    mult = np.fromiter(prof.values(), dtype=float, count=len(prof))
    total = 0.0
    for p, w in _nu_tables(A, _j_primes(plan, Qcap), epsilon):
        total += float(np.dot(mult, w[hs % p]))
    return total


def quantity_J_pairwise(A: IntegerSet, plan: PrimePlan, epsilon: float, Qcap: Optional[int] = None) -> float:
    """Same as :func:`quantity_J` but summing over ordered pairs directly."""
    diffs = np.subtract.outer(A.array, A.array).ravel()
    total = 0.0
    for p, w in _nu_tables(A, _j_primes(plan, Qcap), epsilon):
        total += float(w[diffs % p].sum())
    return total


@dataclass
class JDecomposition:
    J: float
    R: float
    high_part: float  # pairs with nu(a-b) > R
    low_part: float
    low_pairs: int
    difference_set_size: int
    per_pair_high_max: float  # max over h with nu(h) > R of sum_p log p / nu_p(h)
    logN: float

    @property
    def low_pairs_bound_holds(self) -> bool:
        return self.low_pairs <= self.R * self.difference_set_size

    @property
    def high_part_bound(self) -> float:
        """|A|^2 (log N + 1) scale against which ``high_part`` is compared."""
        return (self.logN + 1) * self.total_pairs

    total_pairs: int = 0


def j_decomposition(A: IntegerSet, plan: PrimePlan, epsilon: float, R: float,
                    Qcap: Optional[int] = None) -> JDecomposition:
    """Split J by whether the difference a - b is popular (nu > R) or not."""
    prof = rep_counts(A).counts
    hs = np.fromiter(prof.keys(), dtype=np.int64, count=len(prof))
    mult = np.fromiter(prof.values(), dtype=float, count=len(prof))
    per_h = np.zeros(len(hs))
    for p, w in _nu_tables(A, _j_primes(plan, Qcap), epsilon):
        per_h += w[hs % p]
    high = mult > R
    return JDecomposition(
        J=float(np.dot(mult, per_h)),
        R=R,
        high_part=float(np.dot(mult[high], per_h[high])),
        low_part=float(np.dot(mult[~high], per_h[~high])),
        low_pairs=int(mult[~high].sum()),
        difference_set_size=len(hs),
        per_pair_high_max=float(per_h[high].max()) if high.any() else 0.0,
        logN=math.log(A.ambient),
        total_pairs=len(A) ** 2,
    )


@dataclass(frozen=True)
class SieveConstants:
    alpha: float
    c: float
    derived: dict[str, float]


def derive_constants(alpha: float, c: float, k: int = 2, epsilon: float = 0.5, levels: int = 5) -> SieveConstants:
    """The explicit constants quoted alongside each lemma."""
    if not 0 < alpha < 1 or c <= 0 or k < 1 or not 0 < epsilon < 1:
        raise ValueError("need alpha in (0,1), c > 0, k >= 1, epsilon in (0,1)")
    eps31 = (c * alpha / 100) ** 2
    derived = {
        "nonuniform_size_cprime": c**3 * alpha / 100,
        "nonuniform_fiber_cprime": c**2 * alpha / 10,
        "small_doubling_cprime": 1e-50 * (c * alpha) ** 25,
        "small_doubling_epsilon": eps31,
        "small_doubling_cprime_from_epsilon": eps31**12 * alpha / 10,
        "eta": (10 * k) ** -8 * epsilon**4,
    }
    for i in range(levels + 1):
        derived[f"c_{i}"] = (3 * k) ** i * c
    return SieveConstants(alpha, c, derived)


def small_doubling_parameters(size: int, N: int, alpha: float, c: float) -> dict[str, float]:
    """R = |A|^((1+c)/2) and Q = min(|A|^(1/2 + c/4), N^alpha)."""
    return {"R": size ** ((1 + c) / 2), "Q": min(size ** (0.5 + c / 4), N**alpha)}


def crt_set(N: int, allowed: dict[int, Iterable[int]]) -> IntegerSet:
    """{n in [1, N] : n mod p lies in allowed[p] for every listed p}."""
    ns = np.arange(1, N + 1, dtype=np.int64)
    keep = np.ones(N, dtype=bool)
    for p, rs in allowed.items():
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        ok = np.zeros(p, dtype=bool)
        ok[[r % p for r in rs]] = True
        keep &= ok[ns % p]
    return IntegerSet(N, tuple(int(n) for n in ns[keep]))
