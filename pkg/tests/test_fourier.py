import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sievelab.arith import IntegerSet, project_mod
from sievelab.fourier import WeightFunction, amplitude_constant, fhat, max_amplitude, parseval_energy, spectrum


def naive_fhat(values: dict, a: int, p: int) -> complex:
    return sum(v * cmath.exp(-2j * math.pi * a * n / p) for n, v in values.items())


def test_fhat_examples():
    p = 7
    block = WeightFunction.indicator(IntegerSet.interval(p))
    assert abs(fhat(block, 1, p)) < 1e-12
    f = WeightFunction.indicator(IntegerSet.of([1, 2], 2))
    assert fhat(f, 1, 3) == pytest.approx(-1 + 0j, abs=1e-12)
    g = WeightFunction.from_array(np.array([2.0, -1.5, 0.25j]))
    assert fhat(g, 0, 5) == pytest.approx(g.total())
    with pytest.raises(ValueError):
        fhat(f, 3, 3)


def test_spectrum_examples():
    f = WeightFunction.indicator(IntegerSet.of([1, 2], 2))
    assert spectrum(f, 2).energy == pytest.approx(0, abs=1e-12)
    assert spectrum(f, 3).energy == pytest.approx(2, abs=1e-12)
    m, p = 9, 11
    A = IntegerSet.of([3 + p * i for i in range(m)])
    assert spectrum(WeightFunction.indicator(A), p).energy == pytest.approx((p - 1) * m * m)


@settings(max_examples=100)
@given(st.dictionaries(st.integers(1, 300), st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                                 allow_infinity=False), min_size=1, max_size=30),
       st.sampled_from([2, 3, 5, 7, 13, 31]))
def test_spectrum_matches_naive_sum(values, p):
    N = max(values)
    arr = np.zeros(N, dtype=complex)
    for n, v in values.items():
        arr[n - 1] = v
    f = WeightFunction.from_array(arr)
    sp = spectrum(f, p)
    scale = 1 + sum(abs(v) for v in values.values())
    for a in range(1, p):
        assert abs(sp.amplitudes[a - 1] - naive_fhat(values, a, p)) < 1e-9 * scale
        assert abs(fhat(f, a, p) - naive_fhat(values, a, p)) < 1e-9 * scale


@settings(max_examples=200)
@given(st.sets(st.integers(1, 2000), min_size=1, max_size=200), st.sampled_from([2, 3, 11, 101, 997]))
def test_parseval(xs, p):
    A = IntegerSet.of(xs, 2000)
    x = A.fiber_counts(p).astype(float)
    lhs = p * float(np.sum(x * x))
    energy = spectrum(WeightFunction.indicator(A), p).energy
    assert lhs == pytest.approx(len(A) ** 2 + energy, rel=1e-9)
    assert parseval_energy(WeightFunction.indicator(A), p) == pytest.approx(energy, rel=1e-9, abs=1e-6)


def test_max_amplitude():
    m, p = 5, 13
    A = IntegerSet.of([4 + p * i for i in range(m)])
    assert max_amplitude(A, p)[1] == pytest.approx(m)
    a, mag = max_amplitude(IntegerSet.interval(p), p)
    assert mag == pytest.approx(0, abs=1e-9) and a == 1


def test_max_amplitude_short_interval_mod_13():
    # residues inside an interval of length 6 mod 13 force a large Fourier coefficient
    A = IntegerSet.of([2, 16, 30, 44, 58, 72])
    assert project_mod(A, 13).members == (2, 3, 4, 5, 6, 7)
    a, mag = max_amplitude(A, 13)
    direct = max(abs(naive_fhat({n: 1 for n in A}, b, 13)) for b in range(1, 13))
    assert mag == pytest.approx(direct)
    assert mag >= 0.2 * len(A)
    assert mag == pytest.approx(abs(math.sin(6 * math.pi / 13) / math.sin(math.pi / 13)))


def test_weight_function_basics():
    f = WeightFunction.from_array(np.array([1.0, 0.0, -2.0]))
    n, v = f.support()
    assert list(n) == [1, 3]
    assert f.power_sum(2) == pytest.approx(5)
    assert f.total() == pytest.approx(-1)


def test_amplitude_constant_grows_with_epsilon():
    small = amplitude_constant(31, 0.1, 60, seed=2)
    large = amplitude_constant(31, 0.5, 60, seed=2)
    assert 0 < small < large <= 1
    with pytest.raises(ValueError):
        amplitude_constant(31, 1.0, 5)
