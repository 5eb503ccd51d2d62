import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sievelab.additive import ApWindow, min_ap_cover
from sievelab.apregime import (
    ApSystem,
    default_theta,
    hp_consistency,
    popular_differences,
    refine_step,
    run_regime,
    shrink_gain,
    shrink_gain_bitsets,
)
from sievelab.arith import IntegerSet, project_mod
from sievelab.sieve import PrimePlan
from sievelab.suites import ap_instance, shrink_gain_probes


def ap_system(eps=0.4):
    A = IntegerSet.of([1 + 30 * i for i in range(4)], 200)
    return ApSystem.from_covers(A, PrimePlan.build(7, 0.5, 0.01, good=[7]), eps, 2)


def test_popular_differences_interval():
    n = 40
    H = set(popular_differences(IntegerSet.interval(n), 0.5))
    assert set(range(-n // 2, n // 2 + 1)) <= H


def test_popular_differences_sidon():
    A = IntegerSet.of([2**i for i in range(10)])
    assert popular_differences(A, 2 / len(A) + 0.01) == [0]


def test_popular_differences_squares_recount():
    sq = [k * k for k in range(1, 101)]
    A = IntegerSet.of(sq, 10_000)
    H = popular_differences(A, 0.05)
    s = set(sq)
    need = 0.05 * len(sq)
    members = set(H)
    for h in range(-10_000, 10_001):
        count = sum(1 for x in sq if x - h in s)
        assert (h in members) == (h == 0 or count >= need)
    assert H == sorted(H, key=lambda h: (abs(h), h < 0))


def test_shrink_gain_basics():
    system = ap_instance()
    assert shrink_gain(system, 0) == pytest.approx(system.window_mass(), rel=1e-15)
    A = IntegerSet.of([1, 2, 3], 100)
    plan = PrimePlan.build(13, 0.5, 0.01, good=[11, 13])
    windows = {11: ApWindow(11, 0, 1, 5), 13: ApWindow(13, 0, 1, 6)}
    sysm = ApSystem(A, plan, windows, 0.4, 2)
    for h in (1, 2, 3):
        want = sum(math.log(p) / p * (m - h) / p for p, m in ((11, 5), (13, 6)))
        assert shrink_gain(sysm, h) == pytest.approx(want)


def test_shrink_gain_matches_bitsets():
    assert shrink_gain_probes(ap_instance(), 100, np.random.default_rng(4)) == 0


@settings(max_examples=50, deadline=None)
@given(st.sets(st.integers(1, 2000), min_size=1, max_size=12), st.integers(-5000, 5000))
def test_shrink_gain_random_system(xs, h):
    A = IntegerSet.of(xs, 2000)
    plan = PrimePlan.build(31, 0.5, 0.01, good=[p for p in (17, 19, 23, 29, 31)
                                                   if min_ap_cover(project_mod(A, p)).length <= 0.9 * p])
    system = ApSystem.from_covers(A, plan, 0.1, 2)
    assert shrink_gain(system, h) == shrink_gain_bitsets(system, h)


def test_refine_step_ap_example():
    step = refine_step(ap_system(), 0.7)
    assert step.accepted and step.h == 30
    assert len(step.system.A) == 3
    assert set(step.system.A) == {31, 61, 91}


def test_refine_step_nothing_to_shrink():
    single = IntegerSet.of([5], 50)
    system = ApSystem.from_covers(single, PrimePlan.build(7, 0.5, 0.01), 0.4, 2)
    step = refine_step(system, 0.5)
    assert not step.accepted and step.h is None
    # windows that already are single residues cannot shrink further
    A = IntegerSet.of([1 + 210 * i for i in range(20)], 5000)
    system = ApSystem.from_covers(A, PrimePlan.build(7, 0.5, 0.01), 0.4, 2)
    assert not refine_step(system, 0.3).accepted


def test_system_validation():
    A = IntegerSet.of([1, 2, 3], 100)
    plan = PrimePlan.build(7, 0.5, 0.01, good=[7])
    with pytest.raises(ValueError):
        ApSystem(A, plan, {7: ApWindow(7, 0, 1, 7)}, 0.4, 2)
    with pytest.raises(ValueError):
        ApSystem(A, plan, {7: ApWindow(7, 4, 1, 3)}, 0.4, 2)
    with pytest.raises(ValueError):
        ApSystem(A, plan, {}, 0.4, 2)


def test_run_regime_rejects_zero_iters():
    with pytest.raises(ValueError):
        run_regime(ap_system(), 0, 0.5)


def test_run_regime_already_below_threshold():
    trace = run_regime(ap_system(), 10, 0.7)
    assert trace.levels[0].window_mass < trace.threshold
    assert len(trace.levels) == 1 and trace.stop_reason == "below_threshold"


def test_constructed_trace_audit():
    trace = run_regime(ap_instance(), 50, 0.1, 0.05)
    audit = trace.audit()
    assert all(audit.values()), audit
    assert trace.stop_reason != "max_iters"
    accepted = [lvl for lvl in trace.levels if lvl.accepted]
    assert accepted
    for a, b in zip(trace.levels, trace.levels[1:]):
        assert b.window_mass <= 0.95 * a.window_mass
        assert b.size <= a.size
    assert [lvl.c_i for lvl in trace.levels] == pytest.approx([0.01 * 6**i for i in range(len(trace.levels))])


def test_squares_based_trace():
    sq = IntegerSet.of([k * k for k in range(1, 101)], 10_000)
    good = [p for p in (3, 5, 7, 11, 13) if min_ap_cover(project_mod(sq, p)).length <= 0.6 * p]
    system = ApSystem.from_covers(sq, PrimePlan.build(13, 0.5, 0.01, good=good), 0.4, 2)
    trace = run_regime(system, 30, 0.05)
    assert all(trace.audit().values())
    assert trace.stop_reason in {"below_threshold", "empty", "no_shrinking_difference", "max_iters"}


def test_hp_consistency():
    system = ap_instance()
    H = popular_differences(system.A, 0.1)
    rows = hp_consistency(system, H, 0.05)
    assert {r["p"] for r in rows} == set(system.windows)
    for r in rows:
        assert r["bound"] == pytest.approx(4 * 0.05**0.25 * system.windows[r["p"]].length + 1)


def test_default_theta():
    assert default_theta(10**4, 2, 0.01) == pytest.approx(0.5 * (10**4) ** (-0.06))
    assert default_theta(10, 1, 0.0, scale=3) == 1.0
