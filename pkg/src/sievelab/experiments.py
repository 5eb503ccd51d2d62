"""Value-set statistics, all-prime sumset scans and extremal residue-class searches."""

from __future__ import annotations

import itertools
import math
import random
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .arith import IntegerSet, ResidueSet, is_prime, occupancy, primes_up_to

# ---------------------------------------------------------------------------
# polynomial value sets


@dataclass(frozen=True)
class PolySpec:
    """Integer polynomial; ``coefficients[i]`` is the coefficient of x**i."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        if len(self.coefficients) < 2 or self.coefficients[-1] == 0:
            raise ValueError("need degree >= 1 with a nonzero leading coefficient")

    @classmethod
    def of(cls, *coefficients: int) -> "PolySpec":
        return cls(tuple(int(c) for c in coefficients))

    @classmethod
    def monomial(cls, d: int) -> "PolySpec":
        return cls(tuple([0] * d + [1]))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x: int) -> int:
        return sum(c * x**i for i, c in enumerate(self.coefficients))


def _values_mod(poly: PolySpec, p: int) -> np.ndarray:
    # Horner in int64; every intermediate stays below p^2 < 2^63 for p < 3e9
    x = np.arange(p, dtype=np.int64)
    acc = np.full(p, poly.coefficients[-1] % p, dtype=np.int64)
    for c in reversed(poly.coefficients[:-1]):
        acc = (acc * x + c % p) % p
    return acc


@lru_cache(maxsize=None)
def value_set_size(poly: PolySpec, p: int) -> int:
    seen = np.zeros(p, dtype=bool)
    seen[_values_mod(poly, p)] = True
    return int(np.count_nonzero(seen))


def value_set_mod(poly: PolySpec, p: int) -> ResidueSet:
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    seen = np.zeros(p, dtype=bool)
    seen[_values_mod(poly, p)] = True
    return ResidueSet.from_flags(seen)


def monomial_value_set_size(p: int, d: int) -> int:
    """(p - 1) / gcd(p - 1, d) + 1, the image size of x^d on Z/pZ."""
    if p == 2:
        return 2
    return (p - 1) // math.gcd(p - 1, d) + 1


def larger_sieve_sum(poly: PolySpec, Q: int, N: Optional[int] = None) -> tuple[float, float]:
    """sum_{p<=Q} log p / |V_p| and its ratio to log Q.

    With ``N`` given, |V_p| is replaced by |A mod p| for the literal set
    A = {poly(x) : x >= 0} ∩ [1, N].
    """
    if Q < 10:
        raise ValueError("Q must be >= 10")
    A = poly_value_set(poly, N) if N is not None else None
    total = 0.0
    for p in primes_up_to(Q):
        size = occupancy(A, p) if A is not None else value_set_size(poly, p)
        total += math.log(p) / size
    return total, total / math.log(Q)


def cube_larger_sieve_sum(Q: int, N: Optional[int] = None) -> tuple[float, float]:
    return larger_sieve_sum(PolySpec.monomial(3), Q, N)


def poly_value_set(poly: PolySpec, N: int) -> IntegerSet:
    """{poly(x) : x >= 0} ∩ [1, N] for a polynomial eventually increasing on x >= 0."""
    vals = set()
    x, misses = 0, 0
    # stop once the values have left [1, N] for good
    while misses < 4 * poly.degree + 8:
        v = poly(x)
        if 1 <= v <= N:
            vals.add(v)
            misses = 0
        elif v > N:
            misses += 1
        x += 1
    return IntegerSet.of(vals, N)


def weighted_value_set_density(poly: PolySpec, Q: int) -> float:
    """sum (log p/p)(|V_p|/p) / sum (log p/p) over p <= Q."""
    if Q < 10:
        raise ValueError("Q must be >= 10")
    num = den = 0.0
    for p in primes_up_to(Q):
        w = math.log(p) / p
        num += w * value_set_size(poly, p) / p
        den += w
    return num / den


@dataclass
class GomezReport:
    degree: int
    Q: int
    trials: int
    checks: int
    violations: list[tuple[tuple[int, ...], int, int]]  # (coefficients, p, |V_p|)
    min_ratio: Optional[float]

    @property
    def vacuous(self) -> bool:
        return self.checks == 0


def gomez_bound_sweep(degree: int, Q: int, trials: int, seed: int = 0) -> GomezReport:
    """|V_p| >= (1/d + 2/d^2) p - d for random degree-d polynomials and p <= Q with d ∤ p-1.

    Primes dividing the leading coefficient or not exceeding d are skipped,
    since the reduction mod p then has a different degree.
    """
    if degree < 2:
        raise ValueError("degree must be >= 2")
    rng = random.Random(seed)
    primes = [p for p in primes_up_to(Q) if (p - 1) % degree != 0 and p > degree]
    d = degree
    floor_frac = 1 / d + 2 / d**2
    checks = 0
    violations = []
    min_ratio = None
    for _ in range(trials):
        coeffs = [rng.randint(-1000, 1000) for _ in range(d)] + [rng.choice([-1, 1]) * rng.randint(1, 1000)]
        poly = PolySpec(tuple(coeffs))
        for p in primes:
            if coeffs[-1] % p == 0:
                continue
            size = value_set_size(poly, p)
            checks += 1
            ratio = size / p
            min_ratio = ratio if min_ratio is None else min(min_ratio, ratio)
            if size < floor_frac * p - d:
                violations.append((poly.coefficients, p, size))
    return GomezReport(degree, Q, trials, checks, violations, min_ratio)


# ---------------------------------------------------------------------------
# all-prime sumsets


@dataclass
class CdcProfile:
    cutoff: int
    rows: list[dict]  # per prime: occupancies, zero avoided, occupancy sum <= p + 1

    @property
    def consistent_everywhere(self) -> bool:
        return all(r["inequality"] for r in self.rows)


def _is_composite(n: int) -> bool:
    return n >= 4 and not is_prime(n)


def triple_sumset_prime_scan(A1: IntegerSet, A2: IntegerSet, A3: IntegerSet,
                             cutoff: Optional[int] = None) -> tuple[Optional[tuple[int, int, int]], CdcProfile]:
    """First (a1, a2, a3) with a composite sum, plus the per-prime occupancy profile.

    The profile records, for p <= cutoff (default N^0.6), whether 0 mod p is
    missed by the sumset and whether |A1 mod p|+|A2 mod p|+|A3 mod p| <= p + 1.
    """
    if not (len(A1) and len(A2) and len(A3)):
        raise ValueError("sets must be nonempty")
    witness = None
    for a1 in A1:
        for a2 in A2:
            base = a1 + a2
            for a3 in A3:
                if _is_composite(base + a3):
                    witness = (a1, a2, a3)
                    break
            if witness:
                break
        if witness:
            break
    N = max(A1.ambient, A2.ambient, A3.ambient)
    if cutoff is None:
        cutoff = int(N**0.6)
    rows = []
    for p in primes_up_to(cutoff):
        occ = [occupancy(S, p) for S in (A1, A2, A3)]
        r1 = {a % p for a in A1}
        r12 = {(x + a) % p for x in r1 for a in {b % p for b in A2}}
        r123 = {(x + a) % p for x in r12 for a in {b % p for b in A3}}
        rows.append({"p": p, "occupancies": occ, "zero_avoided": 0 not in r123,
                     "sumset_size": len(r123), "inequality": sum(occ) <= p + 1})
    return witness, CdcProfile(cutoff, rows)


def greedy_prime_pair(N: int, offset: int = 0, max_size: Optional[int] = None,
                      seeds: tuple[int, int] = (1, 2)) -> tuple[IntegerSet, IntegerSet]:
    """Grow A1, A2 ⊂ [1, N] with every a1 + a2 + offset prime.

    Sides alternate; each step appends the smallest admissible element above
    the current maximum.  Stops when neither side can grow (or at ``max_size``).
    """
    A1, A2 = [seeds[0]], [seeds[1]]
    if not all(is_prime(a + b + offset) for a in A1 for b in A2):
        raise ValueError("seeds do not give a prime sum")
    stuck = [False, False]
    side = 0
    while not all(stuck):
        grow, other = (A1, A2) if side == 0 else (A2, A1)
        if max_size is not None and len(grow) >= max_size:
            stuck[side] = True
        elif not stuck[side]:
            # parity: all sums are odd primes, so a side keeps its parity
            cand = grow[-1] + 2
            while cand <= N and not all(is_prime(cand + b + offset) for b in other):
                cand += 2
            if cand <= N:
                grow.append(cand)
            else:
                stuck[side] = True
        side ^= 1
    return IntegerSet.of(A1, N), IntegerSet.of(A2, N)


# ---------------------------------------------------------------------------
# extremal search

# branch and bound enumerates every cap-subset of residues at a node
BNB_BRANCH_LIMIT = 20_000
LOCAL_RESTARTS = 4


@dataclass(frozen=True)
class SearchConstraint:
    """|A mod p| <= caps[p] for each listed prime, with A ⊂ [1, N]."""

    N: int
    alpha: float
    caps: dict[int, int] = field(hash=False)

    def __post_init__(self):
        for p, cap in self.caps.items():
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")
            if not 0 <= cap <= p:
                raise ValueError(f"cap for {p} must be in [0, p]")

    @classmethod
    def from_alpha(cls, N: int, alpha: float, slack: Callable[[int], int] | int = 0,
                   cutoff: Optional[int] = None) -> "SearchConstraint":
        """caps[p] = min(p, floor(alpha p) + slack) for primes p <= cutoff (default N^alpha)."""
        if cutoff is None:
            cutoff = int(math.floor(N**alpha * (1 + 1e-12)))
        slack_fn = slack if callable(slack) else (lambda p, s=slack: s)
        caps = {p: min(p, int(math.floor(alpha * p)) + slack_fn(p)) for p in primes_up_to(cutoff)}
        return cls(N, alpha, caps)

    @property
    def prime_cutoff(self) -> int:
        return max(self.caps, default=1)


@dataclass
class Certificate:
    size: int
    occupancies: dict[int, int]
    caps: dict[int, int]
    method: str
    nodes: int
    upper_bound: Optional[float]

    @property
    def valid(self) -> bool:
        return all(self.occupancies[p] <= self.caps[p] for p in self.caps)


def certify(A: IntegerSet, constraint: SearchConstraint, method: str = "", nodes: int = 0,
            upper_bound: Optional[float] = None) -> Certificate:
    """Recount every cap from scratch."""
    occ = {p: (occupancy(A, p) if len(A) else 0) for p in constraint.caps}
    return Certificate(len(A), occ, dict(constraint.caps), method, nodes, upper_bound)


def _residue_table(N: int, primes: Sequence[int]) -> np.ndarray:
    ns = np.arange(1, N + 1, dtype=np.int64)
    return np.stack([ns % p for p in primes]) if primes else np.zeros((0, N), dtype=np.int64)


def _gallagher_cap_bound(constraint: SearchConstraint) -> Optional[float]:
    """Larger sieve bound valid for every feasible A, or None when uninformative."""
    logN = math.log(constraint.N)
    num = den = -logN
    for p, cap in constraint.caps.items():
        num += math.log(p)
        den += math.log(p) / cap
    return num / den if den > 0 else None


def _exhaustive(constraint: SearchConstraint, primes: list[int], res: np.ndarray) -> tuple[np.ndarray, int]:
    N = constraint.N
    best = np.zeros(N, dtype=bool)
    nodes = 0
    choices = [itertools.combinations(range(p), constraint.caps[p]) for p in primes]
    for combo in itertools.product(*choices):
        nodes += 1
        alive = np.ones(N, dtype=bool)
        for p, row, rs in zip(primes, res, combo):
            ok = np.zeros(p, dtype=bool)
            ok[list(rs)] = True
            alive &= ok[row]
        if alive.sum() > best.sum():
            best = alive
    return best, nodes


def _branch_and_bound(constraint: SearchConstraint, primes: list[int], res: np.ndarray,
                      budget: int, upper: Optional[float]) -> tuple[np.ndarray, int, bool]:
    N = constraint.N
    state = {"best": np.zeros(N, dtype=bool), "best_size": 0, "nodes": 0, "complete": True}

    def recurse(level: int, alive: np.ndarray) -> None:
        if state["nodes"] >= budget:
            state["complete"] = False
            return
        state["nodes"] += 1
        size = int(alive.sum())
        if size <= state["best_size"]:
            return
        if level == len(primes):
            state["best"], state["best_size"] = alive, size
            return
        p = primes[level]
        row = res[level]
        fiber = np.bincount(row[alive], minlength=p)
        cap = constraint.caps[p]
        # only the cap heaviest classes matter for the bound; try subsets by total fiber mass
        subsets = sorted(itertools.combinations(range(p), cap),
                         key=lambda rs: (-int(fiber[list(rs)].sum()), rs))
        for rs in subsets:
            if int(fiber[list(rs)].sum()) <= state["best_size"]:
                break
            ok = np.zeros(p, dtype=bool)
            ok[list(rs)] = True
            recurse(level + 1, alive & ok[row])
            if upper is not None and state["best_size"] >= math.floor(upper + 1e-9):
                return

    recurse(0, np.ones(N, dtype=bool))
    return state["best"], state["nodes"], state["complete"]


def _local_search(constraint: SearchConstraint, primes: list[int], res: np.ndarray, budget: int,
                  rng: random.Random, seeds: Iterable[IntegerSet], restarts: int = LOCAL_RESTARTS
                  ) -> tuple[np.ndarray, int]:
    N = constraint.N
    starts: list[list[set[int]]] = []
    for S in seeds:
        chosen = []
        for p in primes:
            fib = np.bincount(S.array % p, minlength=p) if len(S) else np.zeros(p, dtype=np.int64)
            order = sorted(range(p), key=lambda r: (-int(fib[r]), r))
            chosen.append(set(order[: constraint.caps[p]]))
        starts.append(chosen)
    # random starts on top of the seeds; a hill climb stops at the first local optimum
    for _ in range(restarts if starts else max(1, restarts)):
        starts.append([set(rng.sample(range(p), constraint.caps[p])) for p in primes])

    best = np.zeros(N, dtype=bool)
    steps = 0
    for start in starts:
        R = [set(s) for s in start]
        member = np.stack([np.isin(row, list(r)) for row, r in zip(res, R)]) if primes else np.ones((0, N), bool)
        viol = (~member).sum(axis=0)
        while steps < budget:
            steps += 1
            best_move = None
            for i, p in enumerate(primes):
                row = res[i]
                only_here = (viol == 1) & ~member[i]
                gains = np.bincount(row[only_here], minlength=p)
                losses = np.bincount(row[viol == 0], minlength=p)
                inside = sorted(R[i])
                outside = [r for r in range(p) if r not in R[i]]
                if not inside or not outside:
                    continue
                r_out = min(inside, key=lambda r: (int(losses[r]), r))
                r_in = max(outside, key=lambda r: (int(gains[r]), -r))
                delta = int(gains[r_in]) - int(losses[r_out])
                if delta > 0 and (best_move is None or delta > best_move[0]):
                    best_move = (delta, i, r_out, r_in)
            if best_move is None:
                break
            _, i, r_out, r_in = best_move
            R[i].discard(r_out)
            R[i].add(r_in)
            new_row = np.isin(res[i], list(R[i]))
            viol += (~new_row).astype(viol.dtype) - (~member[i]).astype(viol.dtype)
            member[i] = new_row
        alive = viol == 0
        if alive.sum() > best.sum():
            best = alive
    return best, steps


def extremal_search(constraint: SearchConstraint, budget: int, method: str = "auto", seed: int = 0,
                    seeds: Iterable[IntegerSet] = ()) -> tuple[IntegerSet, Certificate]:
    """Largest A ⊂ [1, N] found that respects every cap.

    ``method`` is ``exhaustive`` (all cap-subsets of residues), ``bnb``
    (branch and bound, primes descending, pruned by the alive count and the
    larger sieve bound), ``local`` (swap-based local search from ``seeds`` or a
    random start) or ``auto``, which picks exhaustive when the product of
    choices fits the budget and otherwise runs branch and bound, falling back
    to local search if the budget runs out.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if any(cap == 0 for cap in constraint.caps.values()):
        raise ValueError("infeasible constraint: some cap is 0")
    N = constraint.N
    primes = sorted(constraint.caps, reverse=True)
    res = _residue_table(N, primes)
    upper = _gallagher_cap_bound(constraint)
    rng = random.Random(seed)
    if method == "auto":
        per_prime = [math.comb(p, constraint.caps[p]) for p in primes]
        if math.prod(per_prime) <= budget:
            method = "exhaustive"
        elif max(per_prime, default=1) <= BNB_BRANCH_LIMIT:
            method = "bnb"
        else:
            method = "local"
    if method == "exhaustive":
        alive, nodes = _exhaustive(constraint, primes, res)
    elif method == "bnb":
        alive, nodes, complete = _branch_and_bound(constraint, primes, res, budget, upper)
        if not complete:
            local, steps = _local_search(constraint, primes, res, budget, rng, seeds)
            nodes += steps
            if local.sum() > alive.sum():
                alive, method = local, "bnb+local"
    elif method == "local":
        alive, nodes = _local_search(constraint, primes, res, budget, rng, seeds)
    else:
        raise ValueError(f"unknown method {method!r}")
    A = IntegerSet(N, tuple(int(n) + 1 for n in np.flatnonzero(alive)))
    return A, certify(A, constraint, method, nodes, upper)
