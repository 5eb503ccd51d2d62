import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from sievelab.additive import (
    ApWindow,
    additive_energy,
    ap_window_intersect_shift,
    cdc_bound,
    grynkiewicz_sweep,
    min_ap_cover,
    rep_counts,
    rep_counts_mod,
    representation_counts,
    robust_cdc_applies,
    robust_cdc_set,
    sumset,
)
from sievelab.arith import IntegerSet, ResidueSet


def quadruple_energy(xs) -> int:
    xs = list(xs)
    return sum(1 for a, b, c, d in itertools.product(xs, repeat=4) if a + b == c + d)


def ap_cover_oracle(S: set, p: int) -> int:
    """Shortest AP (any start, step, length) containing S, by trying every triple."""
    for length in range(1, p + 1):
        for step in range(1, p):
            for start in range(p):
                if S <= {(start + i * step) % p for i in range(length)}:
                    return length
    return p


def test_sumset_examples():
    A, B = ResidueSet.of([0, 1], 5), ResidueSet.of([0, 2], 5)
    assert sumset(A, B).members == (0, 1, 2, 3)
    assert cdc_bound(A, B) == 3
    full = ResidueSet.full(7)
    assert sumset(full, full) == full


@pytest.mark.parametrize("p", [2, 3, 5])
def test_cdc_exhaustive_naive(p):
    subsets = [set(c) for r in range(1, p + 1) for c in itertools.combinations(range(p), r)]
    for a in subsets:
        for b in subsets:
            s = {(x + y) % p for x in a for y in b}
            A, B = ResidueSet.of(a, p), ResidueSet.of(b, p)
            assert set(sumset(A, B)) == s
            assert len(s) >= min(p, len(a) + len(b) - 1)


def test_rep_counts_mod():
    prof = rep_counts_mod(ResidueSet.of([0, 1, 2], 5))
    assert prof[1] == 2
    single = rep_counts_mod(ResidueSet.of([3], 7))
    assert single[0] == 1 and all(single[h] == 0 for h in range(1, 7))
    qr = ResidueSet.of({x * x % 11 for x in range(1, 11)}, 11)
    assert rep_counts_mod(qr).total() == len(qr) ** 2


def test_additive_energy_examples():
    assert additive_energy(IntegerSet.of([1])) == 1
    assert additive_energy(IntegerSet.of([1, 2, 3])) == 19
    for k in range(1, 9):
        A = IntegerSet.of([2**i for i in range(k + 1)])
        n = len(A)
        assert additive_energy(A) == 2 * n * n - n


@settings(max_examples=60)
@given(st.sets(st.integers(1, 200), min_size=1, max_size=12))
def test_energy_vs_quadruples(xs):
    A = IntegerSet.of(xs, 200)
    E = quadruple_energy(xs)
    assert additive_energy(A) == E
    assert sum(v * v for v in rep_counts(A).counts.values()) == E


def test_energy_fft_path_matches_outer_product():
    rng = random.Random(5)
    xs = rng.sample(range(1, 50_000), 2500)
    A = IntegerSet.of(xs, 50_000)
    small = IntegerSet.of(xs[:1500], 50_000)
    # the large set takes the FFT route; spot-check its profile against direct counting
    prof = rep_counts(A)
    s = set(xs)
    for h in (0, 1, 7, 1234, -1234):
        assert prof[h] == sum(1 for x in xs if x - h in s)
    assert additive_energy(small) == sum(v * v for v in rep_counts(small).counts.values())


def test_robust_cdc_examples():
    A = ResidueSet.of([0, 1, 2, 3], 7)
    S, bound = robust_cdc_set(A, A, 2)
    assert S.members == (1, 2, 3, 4, 5)
    assert bound == pytest.approx(7 - 3 * math.sqrt(14))
    for p in (11, 13):
        B = ResidueSet.of([0, 2, 5], p)
        C = ResidueSet.of([1, 3, 4, 9], p)
        S, bound = robust_cdc_set(B, C, 1)
        assert S == sumset(B, C)
        assert bound == pytest.approx(min(p, 6) - 3 * math.sqrt(p))


def test_robust_cdc_applies_boundary():
    A = ResidueSet.of(range(4), 11)
    assert not robust_cdc_applies(A, A, 2)  # 16 < 22
    B = ResidueSet.of(range(5), 11)
    assert robust_cdc_applies(B, B, 2)  # 25 >= 22


def test_robust_cdc_sweep_p11():
    rng = random.Random(11)
    p = 11
    for _ in range(3000):
        K = rng.choice([1, 2, 3])
        lo = math.ceil(math.sqrt(K * p))
        a = set(rng.sample(range(p), rng.randint(lo, p)))
        A = ResidueSet.of(a, p)
        S, bound = robust_cdc_set(A, A, K)
        reps = [sum(1 for x in a if (s - x) % p in a) for s in range(p)]
        assert set(S) == {s for s in range(p) if reps[s] >= K}
        assert len(S) >= bound


def test_representation_counts_total():
    A, B = ResidueSet.of([0, 1, 4], 7), ResidueSet.of([2, 3], 7)
    assert sum(representation_counts(A, B)) == 6


def test_min_ap_cover_examples():
    w = min_ap_cover(ResidueSet.of([1, 3, 5], 7))
    assert (w.start, w.step, w.length) == (1, 2, 3)
    assert min_ap_cover(ResidueSet.full(11)).length == 11
    qr0 = ResidueSet.of([0, 1, 3, 4, 5, 9], 11)
    w = min_ap_cover(qr0)
    assert w.contains(qr0)
    assert w.length == ap_cover_oracle({0, 1, 3, 4, 5, 9}, 11) == 8


@settings(max_examples=80)
@given(st.sampled_from([2, 3, 5, 7, 11, 13]), st.data())
def test_min_ap_cover_vs_oracle(p, data):
    s = data.draw(st.sets(st.integers(0, p - 1), min_size=1))
    w = min_ap_cover(ResidueSet.of(s, p))
    assert w.contains(ResidueSet.of(s, p))
    assert w.length == ap_cover_oracle(s, p)


def test_intersect_shift_examples():
    p, m = 31, 10
    w = ApWindow(p, 0, 1, m)
    for h in range(m):
        assert ap_window_intersect_shift(w, h) == m - h
    assert ap_window_intersect_shift(ApWindow(p, 5, 3, 7), 0) == 7


def test_intersect_shift_vs_bitsets_mod_101():
    rng = random.Random(101)
    p = 101
    w = ApWindow(p, rng.randrange(p), rng.randrange(1, p), rng.randint(1, p))
    S = w.residues()
    for _ in range(50):
        h = rng.randrange(-10**6, 10**6)
        assert ap_window_intersect_shift(w, h) == len(S & S.shift(h))


@settings(max_examples=200)
@given(st.sampled_from([2, 3, 5, 7, 11, 101]), st.data())
def test_intersect_shift_property(p, data):
    w = ApWindow(p, data.draw(st.integers(0, p - 1)), data.draw(st.integers(1, p - 1)) if p > 2 else 1,
                 data.draw(st.integers(1, p)))
    h = data.draw(st.integers(-5 * p, 5 * p))
    S = w.residues()
    assert ap_window_intersect_shift(w, h) == len(S & S.shift(h))


def test_ap_window_validation():
    with pytest.raises(ValueError):
        ApWindow(7, 0, 0, 3)
    with pytest.raises(ValueError):
        ApWindow(7, 0, 1, 8)


@pytest.mark.parametrize("p", [31, 53, 101])
def test_grynkiewicz_consistency(p):
    out = grynkiewicz_sweep(p, 0.05, samples=400, seed=p)
    assert out["tested"] >= 50
    assert out["violations"] == 0, out["witness"]
