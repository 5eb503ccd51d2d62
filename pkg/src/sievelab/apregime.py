"""Iterative refinement A_0 ⊃ A_1 ⊃ ... driven by popular differences and shrinking AP windows."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .additive import ApWindow, ap_window_intersect_shift, min_ap_cover, rep_counts
from .arith import IntegerSet, project_mod
from .sieve import PrimePlan, gallagher_bound

DEFAULT_ETA = 0.05


@dataclass(frozen=True, eq=False)
class ApSystem:
    """A set whose residues mod each good prime sit inside an AP window of length <= (1-eps)p."""

    A: IntegerSet
    plan: PrimePlan
    windows: dict[int, ApWindow] = field(repr=False)
    epsilon: float
    k: int

    def __post_init__(self):
        if set(self.windows) != set(self.plan.good):
            raise ValueError("need exactly one window per good prime")
        for p, w in self.windows.items():
            if w.p != p:
                raise ValueError(f"window for {p} has modulus {w.p}")
            if w.length > (1 - self.epsilon) * p + 1e-12:
                raise ValueError(f"window for {p} longer than (1-eps)p")
            if len(self.A) and not w.contains(project_mod(self.A, p)):
                raise ValueError(f"A mod {p} escapes its window")

    @classmethod
    def from_covers(cls, A: IntegerSet, plan: PrimePlan, epsilon: float, k: int) -> "ApSystem":
        """Use the minimal AP cover of A mod p as the window for each good prime."""
        return cls(A, plan, {p: min_ap_cover(project_mod(A, p)) for p in plan.good}, epsilon, k)

    def window_mass(self) -> float:
        return sum(math.log(p) / p * w.length / p for p, w in self.windows.items())


def popular_differences(A: IntegerSet, theta: float) -> list[int]:
    """{0} ∪ {h != 0 : |A ∩ (A+h)| >= theta |A|}, sorted by |h| then sign (positive first)."""
    if not 0 < theta <= 1:
        raise ValueError("theta must be in (0, 1]")
    nu = rep_counts(A).counts
    need = theta * len(A)
    H = {h for h, v in nu.items() if h != 0 and v >= need} | {0}
    return sorted(H, key=lambda h: (abs(h), h < 0))


def shrink_gain(system: ApSystem, h: int) -> float:
    """sum over good p of (log p / p) |S_p ∩ (S_p + h)| / p."""
    return sum(math.log(p) / p * ap_window_intersect_shift(w, h) / p for p, w in system.windows.items())


def shrink_gain_bitsets(system: ApSystem, h: int) -> float:
    """Same quantity evaluated on explicit residue sets."""
    total = 0.0
    for p, w in system.windows.items():
        S = w.residues()
        total += math.log(p) / p * len(S & S.shift(h)) / p
    return total


def _refined_window(w: ApWindow, h: int) -> Optional[ApWindow]:
    p, L = w.p, w.length
    t = (h % p) * pow(w.step, -1, p) % p
    if t == 0:
        return w
    if t < L and t + L <= p:
        # [t, L) in index coordinates: still an AP with the same step
        return ApWindow(p, (w.start + t * w.step) % p, w.step, L - t)
    inter = w.residues() & w.residues().shift(h)
    return min_ap_cover(inter) if len(inter) else None


@dataclass
class StepResult:
    system: ApSystem
    accepted: bool
    h: Optional[int]
    gain: Optional[float]
    base: float
    terminal: bool = False


def refine_step(system: ApSystem, theta: float, eta: float = DEFAULT_ETA) -> StepResult:
    base = shrink_gain(system, 0)
    candidates = [h for h in popular_differences(system.A, theta) if h != 0]
    if not candidates:
        return StepResult(system, False, None, None, base)
    gains = [(shrink_gain(system, h), i) for i, h in enumerate(candidates)]
    # candidates are already in tie-break order, so the index settles ties
    g, i = min(gains)
    h = candidates[i]
    if not g < (1 - eta) * base:
        return StepResult(system, False, h, g, base)
    A_next = system.A.intersect_shift(h)
    windows = {}
    for p, w in system.windows.items():
        nw = _refined_window(w, h)
        if nw is None:
            return StepResult(system, False, h, g, base, terminal=True)
        windows[p] = nw
    if len(A_next) == 0:
        return StepResult(system, False, h, g, base, terminal=True)
    nxt = ApSystem(A_next, system.plan, windows, system.epsilon, system.k)
    # a wrapped intersection is re-covered by an AP, which may be longer than
    # the intersection itself; only accept if the covers still contract
    if not nxt.window_mass() < (1 - eta) * base:
        return StepResult(system, False, h, g, base)
    return StepResult(nxt, True, h, g, base)


@dataclass
class Level:
    size: int
    window_mass: float
    h: Optional[int]
    c_i: float
    accepted: bool


@dataclass
class IterationTrace:
    levels: list[Level]
    stop_reason: str
    systems: list[ApSystem] = field(repr=False, default_factory=list)
    final_gallagher: Optional[tuple[float, float, Optional[float]]] = None
    threshold: float = 0.0
    eta: float = DEFAULT_ETA

    def audit(self) -> dict[str, bool]:
        """Nesting, containment and per-step mass contraction across the trace."""
        nesting = all(b.A.as_frozenset <= a.A.as_frozenset for a, b in zip(self.systems, self.systems[1:]))
        containment = all(w.contains(project_mod(s.A, p)) for s in self.systems if len(s.A)
                          for p, w in s.windows.items())
        contraction = all(
            nxt.window_mass <= (1 - self.eta) * cur.window_mass * (1 + 1e-12)
            for cur, nxt in zip(self.levels, self.levels[1:]) if nxt.accepted
        )
        return {"nesting": nesting, "containment": containment, "contraction": contraction}


def run_regime(system: ApSystem, max_iters: int, theta: float, eta: float = DEFAULT_ETA) -> IterationTrace:
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    Q = system.plan.Q
    threshold = math.log(Q) / (4 * system.k)
    c = system.plan.c
    levels = [Level(len(system.A), system.window_mass(), None, c, False)]
    systems = [system]
    reason = "max_iters"
    for i in range(max_iters):
        if system.window_mass() < threshold:
            reason = "below_threshold"
            break
        step = refine_step(system, theta, eta)
        if step.terminal:
            reason = "empty"
            break
        if not step.accepted:
            reason = "no_shrinking_difference"
            break
        system = step.system
        systems.append(system)
        levels.append(Level(len(system.A), system.window_mass(), step.h, (3 * system.k) ** (i + 1) * c, True))
    else:
        if system.window_mass() < threshold:
            reason = "below_threshold"
    final = gallagher_bound(system.A, Q) if len(system.A) and Q >= 2 else None
    return IterationTrace(levels, reason, systems, final, threshold, eta)


def default_theta(N: int, k: int, c_i: float, scale: float = 0.5) -> float:
    """scale * N^{-3k c_i}, the popular-difference threshold fraction."""
    return min(1.0, scale * N ** (-3 * k * c_i))


def hp_consistency(system: ApSystem, H: Iterable[int], eta: float) -> list[dict]:
    """For each good p: |H_p mod p| against 4 eta^{1/4} |S_p| + 1."""
    H = list(H)
    rows = []
    q = eta**0.25
    for p, w in system.windows.items():
        Hp = {h % p for h in H if ap_window_intersect_shift(w, h) >= (1 - q) * w.length}
        bound = 4 * q * w.length + 1
        rows.append({"p": p, "Hp_mod_p": len(Hp), "bound": bound, "holds": len(Hp) <= bound + 1e-12})
    return rows
