"""Extended-range nonnegative reals stored as mantissa * 2**exponent.

The weighted coefficient arrays grow or decay geometrically, so their values
leave the double range long before the lengths of interest (n ~ 4000).  All
series arithmetic is sums and products of nonnegative terms, which a scaled
representation handles without the cancellation or certificate problems of
log-domain arithmetic: a stored value is exactly zero or has mantissa in
[1, 2), so strict positivity is directly testable.

``ScaledReal`` is the scalar type; ``ScaledArray`` is the vectorized
counterpart used by the coefficient recurrences.  Exponents are int64, so the
representable range is vastly wider than anything a length-10^6 series could
need.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

__all__ = ["ScaledReal", "ScaledArray", "dot_rev_raw", "add_raw"]

# ldexp shifts below this produce exact zeros anyway; clipping keeps the
# int64 -> C-int conversion inside ldexp's accepted range.
_MIN_SHIFT = -1100


def _normalize(mantissa: float, exponent: int) -> tuple[float, int]:
    if mantissa == 0.0:
        return 0.0, 0
    m, e = math.frexp(mantissa)  # m in [0.5, 1)
    return m * 2.0, exponent + e - 1  # shift to [1, 2)


class ScaledReal:
    """A nonnegative real x = mantissa * 2**exponent with mantissa in [1,2) or 0."""

    __slots__ = ("m", "e")

    def __init__(self, m: float = 0.0, e: int = 0):
        if m < 0.0:
            raise ValueError("ScaledReal is nonnegative by construction")
        self.m, self.e = _normalize(m, e)

    @classmethod
    def from_float(cls, x: float) -> "ScaledReal":
        if x < 0.0 or not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r} as a ScaledReal")
        return cls(x, 0)

    @classmethod
    def from_log2(cls, l: float) -> "ScaledReal":
        """Value 2**l for arbitrary real l (never under/overflows)."""
        e = math.floor(l)
        return cls(2.0 ** (l - e), int(e))

    def is_zero(self) -> bool:
        return self.m == 0.0

    @property
    def log2(self) -> float:
        if self.m == 0.0:
            return -math.inf
        return math.log2(self.m) + self.e

    def to_float(self) -> float:
        """Nearest double; over/underflows saturate to inf/0."""
        if self.m == 0.0:
            return 0.0
        if self.e > 1024:
            return math.inf
        if self.e < -1074:
            return 0.0
        return math.ldexp(self.m, self.e)

    def __mul__(self, other: Union["ScaledReal", float]) -> "ScaledReal":
        if not isinstance(other, ScaledReal):
            other = ScaledReal.from_float(float(other))
        if self.m == 0.0 or other.m == 0.0:
            return ScaledReal()
        return ScaledReal(self.m * other.m, self.e + other.e)

    __rmul__ = __mul__

    def __add__(self, other: "ScaledReal") -> "ScaledReal":
        if not isinstance(other, ScaledReal):
            other = ScaledReal.from_float(float(other))
        if self.m == 0.0:
            return ScaledReal(other.m, other.e)
        if other.m == 0.0:
            return ScaledReal(self.m, self.e)
        hi, lo = (self, other) if self.e >= other.e else (other, self)
        shift = lo.e - hi.e
        if shift < _MIN_SHIFT:
            return ScaledReal(hi.m, hi.e)
        return ScaledReal(hi.m + math.ldexp(lo.m, shift), hi.e)

    def __truediv__(self, other: "ScaledReal") -> "ScaledReal":
        if not isinstance(other, ScaledReal):
            other = ScaledReal.from_float(float(other))
        if other.m == 0.0:
            raise ZeroDivisionError("ScaledReal division by zero")
        if self.m == 0.0:
            return ScaledReal()
        return ScaledReal(self.m / other.m, self.e - other.e)

    def ratio(self, other: "ScaledReal") -> float:
        """self / other as a double (saturating), handy for probabilities."""
        return (self / other).to_float()

    def _cmp_key(self):
        # (is_nonzero, e, m) orders correctly for nonnegative values.
        return (self.m != 0.0, self.e if self.m != 0.0 else 0, self.m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScaledReal):
            return NotImplemented
        return self.m == other.m and (self.m == 0.0 or self.e == other.e)

    def __lt__(self, other: "ScaledReal") -> bool:
        return self._cmp_key() < other._cmp_key()

    def __le__(self, other: "ScaledReal") -> bool:
        return self == other or self < other

    def __gt__(self, other: "ScaledReal") -> bool:
        return other < self

    def __ge__(self, other: "ScaledReal") -> bool:
        return other <= self

    def __hash__(self):
        return hash((self.m, self.e if self.m != 0.0 else 0))

    def __repr__(self) -> str:
        return f"ScaledReal({self.m!r}, {self.e})"


class ScaledArray:
    """Dense array of nonnegative scaled reals (parallel mantissa/exponent arrays).

    The dtype of the mantissa array is configurable so the same recurrences can
    be re-run at extended precision (np.longdouble) as a self-check.
    """

    __slots__ = ("m", "e")

    def __init__(self, n: int, dtype=np.float64):
        self.m = np.zeros(n, dtype=dtype)
        self.e = np.zeros(n, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.m)

    @property
    def dtype(self):
        return self.m.dtype

    def get(self, i: int) -> ScaledReal:
        return ScaledReal(float(self.m[i]), int(self.e[i]))

    def set(self, i: int, value: ScaledReal) -> None:
        self.m[i] = value.m
        self.e[i] = value.e

    def set_log2(self, i: int, l: float) -> None:
        e = math.floor(l)
        self.m[i] = self.dtype.type(2.0) ** self.dtype.type(l - e)
        self.e[i] = int(e)

    def log2(self) -> np.ndarray:
        """Elementwise log2 as float64 (-inf for zeros)."""
        out = np.full(len(self), -np.inf)
        nz = self.m > 0
        out[nz] = np.log2(self.m[nz].astype(np.float64)) + self.e[nz]
        return out

    def to_floats(self) -> np.ndarray:
        """Saturating conversion to float64 (underflow -> 0, overflow -> inf)."""
        shift = np.clip(self.e, -1100, 1100).astype(np.int32)
        with np.errstate(over="ignore"):
            vals = np.ldexp(self.m.astype(np.float64), shift)
        vals[self.e > 1024] = np.inf
        vals[self.e < -1075] = 0.0
        return vals

    def dot_rev(self, other: "ScaledArray", lo_a: int, hi_a: int, n: int) -> ScaledReal:
        """sum_{i=lo_a}^{hi_a} self[i] * other[n-i], the convolution kernel."""
        m, e = dot_rev_raw(self, other, lo_a, hi_a, n)
        return ScaledReal(float(m), e)


def dot_rev_raw(a: ScaledArray, b: ScaledArray, lo_a: int, hi_a: int, n: int):
    """sum_{i=lo_a}^{hi_a} a[i] * b[n-i] as a (mantissa, exponent) pair.

    The mantissa keeps the arrays' dtype, so extended-precision runs stay
    extended through the accumulation.
    """
    if hi_a < lo_a:
        return a.m.dtype.type(0.0), 0
    am = a.m[lo_a : hi_a + 1]
    bm = b.m[n - hi_a : n - lo_a + 1][::-1]
    pm = am * bm
    nz = pm != 0
    if not nz.any():
        return a.m.dtype.type(0.0), 0
    pe = a.e[lo_a : hi_a + 1] + b.e[n - hi_a : n - lo_a + 1][::-1]
    top = int(pe[nz].max())
    shift = np.clip(pe - top, _MIN_SHIFT, 0).astype(np.int32)
    total = np.ldexp(pm, shift).sum()
    fm, fe = np.frexp(total)
    return fm * 2, top + int(fe) - 1


def add_raw(m1, e1: int, m2, e2: int):
    """(m1, e1) + (m2, e2) as a normalized (mantissa, exponent) pair."""
    if m1 == 0:
        return m2, e2
    if m2 == 0:
        return m1, e1
    if e1 < e2:
        m1, e1, m2, e2 = m2, e2, m1, e1
    shift = e2 - e1
    total = m1 + (np.ldexp(m2, shift) if shift >= _MIN_SHIFT else 0.0)
    fm, fe = np.frexp(total)
    return fm * 2, e1 + int(fe) - 1
