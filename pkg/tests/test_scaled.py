"""Tests for the extended-range scaled arithmetic."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rnaphase.scaled import ScaledArray, ScaledReal, add_raw, dot_rev_raw


class TestScaledReal:
    def test_zero(self):
        z = ScaledReal()
        assert z.is_zero()
        assert z.to_float() == 0.0
        assert (z + ScaledReal.from_float(2.0)).to_float() == 2.0

    def test_normalization(self):
        x = ScaledReal(6.0, 0)
        assert 1.0 <= x.m < 2.0
        assert x.to_float() == 6.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ScaledReal(-1.0, 0)

    def test_extreme_exponents(self):
        big = ScaledReal.from_log2(5_000_000.3)
        small = ScaledReal.from_log2(-5_000_000.7)
        assert big.to_float() == math.inf
        assert small.to_float() == 0.0
        assert abs((big * small).log2 - (-0.4)) < 1e-6

    @given(
        st.floats(min_value=1e-300, max_value=1e300),
        st.floats(min_value=1e-300, max_value=1e300),
    )
    def test_mul_matches_floats(self, a, b):
        got = (ScaledReal.from_float(a) * ScaledReal.from_float(b)).to_float()
        expect = a * b
        if expect == 0.0 or math.isinf(expect):
            return  # outside double range, scaled value is still exact
        assert got == pytest.approx(expect, rel=1e-15)

    @given(
        st.floats(min_value=1e-30, max_value=1e30),
        st.floats(min_value=1e-30, max_value=1e30),
    )
    def test_add_and_ratio(self, a, b):
        sa, sb = ScaledReal.from_float(a), ScaledReal.from_float(b)
        assert (sa + sb).to_float() == pytest.approx(a + b, rel=1e-15)
        assert sa.ratio(sa + sb) == pytest.approx(a / (a + b), rel=1e-12)

    def test_ordering(self):
        xs = [ScaledReal.from_log2(l) for l in (-1000.0, -1.0, 0.0, 999.5)]
        assert xs == sorted(xs)
        assert ScaledReal() < ScaledReal.from_log2(-100000.0)

    def test_add_keeps_dominant_term(self):
        big = ScaledReal.from_log2(3000.0)
        tiny = ScaledReal.from_log2(-3000.0)
        assert (big + tiny).log2 == big.log2


class TestScaledArray:
    def test_set_get_roundtrip(self):
        arr = ScaledArray(4)
        arr.set(2, ScaledReal.from_float(0.125))
        assert arr.get(2).to_float() == 0.125
        assert arr.get(0).is_zero()

    def test_dot_rev_matches_numpy(self):
        rng = np.random.default_rng(0)
        a = rng.random(10)
        b = rng.random(10)
        sa, sb = ScaledArray(10), ScaledArray(10)
        for i in range(10):
            sa.set(i, ScaledReal.from_float(a[i]))
            sb.set(i, ScaledReal.from_float(b[i]))
        got = sa.dot_rev(sb, 2, 7, 9).to_float()
        expect = sum(a[i] * b[9 - i] for i in range(2, 8))
        assert got == pytest.approx(expect, rel=1e-14)

    def test_dot_rev_wide_exponent_spread(self):
        sa, sb = ScaledArray(3), ScaledArray(3)
        for i, l in enumerate((0.0, -600.0, -1300.0)):
            sa.set_log2(i, l)
            sb.set_log2(i, 0.0)
        got = sa.dot_rev(sb, 0, 2, 2)
        # terms below ~2^-1100 of the max vanish, as double addition would
        assert got.log2 == pytest.approx(0.0, abs=1e-12)

    def test_to_floats_saturates(self):
        arr = ScaledArray(2)
        arr.set_log2(0, 40_000.0)
        arr.set_log2(1, -40_000.0)
        vals = arr.to_floats()
        assert vals[0] == math.inf and vals[1] == 0.0

    def test_longdouble_dtype_preserved(self):
        arr = ScaledArray(3, dtype=np.longdouble)
        arr.set_log2(0, 0.5)
        arr.set_log2(1, 0.25)
        m, e = dot_rev_raw(arr, arr, 0, 1, 1)
        assert m.dtype == np.longdouble
        m2, e2 = add_raw(m, e, m, e)
        assert m2.dtype == np.longdouble
