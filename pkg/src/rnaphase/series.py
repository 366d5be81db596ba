"""Exact weighted coefficient arrays for the structure-counting grammar.

``C[n]`` sums p**arcs * v**G over irreducible structures (those spanned by a
rainbow) of length n; ``S[n]`` sums over all structures; ``Sk[n][k]`` refines
S by the number of irreducible blocks.  The recurrences translate the grammar
term by term:

    irreducible  =  rainbow closing a hairpin
                 |  rainbow closing an interior loop around an irreducible
                 |  rainbow closing a multiloop: a gap, then >= 2 branch+gap
                    units, each branch an irreducible weighted v**gamma2

    structure    =  sequence of (exterior unpaired vertex | irreducible block)

Everything is computed by direct O(nmax^2) coefficient recurrences in scaled
arithmetic; a brute-force enumeration over explicit diagrams (scored through
the energy module, a fully independent code path) serves as the oracle for
small n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .energy import EnergyParams, structure_weight
from .scaled import ScaledArray, ScaledReal, add_raw, dot_rev_raw
from .structures import SecondaryStructure, block_count

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "WeightedSeries",
    "compute_series",
    "compute_C",
    "compute_S",
    "compute_Sk",
    "enumerate_structures",
    "brute_force_enumerate",
    "BruteForceTotals",
    "ratio_trace",
    "export_series_csv",
    "export_block_histogram_csv",
    "scaled_decimal",
]

BRUTE_FORCE_LIMIT = 16

_E_SENTINEL = np.int64(-(2**62))  # exponent placeholder for zero entries in 2-D tables


class _Scaled2D:
    """Row-major table of nonnegative scaled reals with sentinel exponents."""

    __slots__ = ("m", "e")

    def __init__(self, rows: int, cols: int, dtype=np.float64):
        self.m = np.zeros((rows, cols), dtype=dtype)
        self.e = np.full((rows, cols), _E_SENTINEL, dtype=np.int64)

    def get(self, i: int, j: int) -> ScaledReal:
        if self.m[i, j] == 0:
            return ScaledReal()
        return ScaledReal(float(self.m[i, j]), int(self.e[i, j]))

    def row_ratios(self, i: int, denom: ScaledReal) -> np.ndarray:
        """Row i divided by ``denom`` as float64 (ratios expected <= ~1)."""
        pm = self.m[i].astype(np.float64) / denom.m
        shift = np.clip(self.e[i] - denom.e, -1100, 1000).astype(np.int32)
        return np.ldexp(pm, shift)


@dataclass
class WeightedSeries:
    """Coefficient arrays C, S (and optionally Sk) for one parameter set.

    The auxiliary arrays expose the grammar pieces the stochastic traceback
    needs: ``hairpin`` is the hairpin term of C, ``tail`` the branch+gap unit
    T = v**gamma2 * C/(1-z), ``tail_seq`` the nonempty unit sequences
    R = T/(1-T), ``multi_units`` U = T^2/(1-T), and ``multi_interior`` the
    prefix sums of U (multiloop interiors of a given length).
    """

    params: EnergyParams
    nmax: int
    C: ScaledArray
    S: ScaledArray
    hairpin: ScaledArray
    tail: ScaledArray
    tail_seq: ScaledArray
    multi_units: ScaledArray
    multi_interior: ScaledArray
    kmax: Optional[int] = None
    Sk: Optional[_Scaled2D] = field(default=None, repr=False)

    def block_pmf(self, n: int) -> np.ndarray:
        """P(X_n = k) for k = 0..kmax; raises if Sk was not computed."""
        if self.Sk is None:
            raise ValueError("Sk table not computed; pass kmax to compute_series")
        if n > self.nmax:
            raise ValueError(f"n={n} exceeds nmax={self.nmax}")
        return self.Sk.row_ratios(n, self.S.get(n))

    def sk_truncation_defect(self, n: int) -> float:
        """Relative mass missing from row n of Sk (0 when kmax was sufficient)."""
        return abs(1.0 - self.block_pmf(n).sum())


def _log2_weight(params: EnergyParams, score: float, arcs: int = 0) -> float:
    return arcs * params.log2_p + score * params.log2_v


def compute_series(
    params: EnergyParams,
    nmax: int,
    kmax: Optional[int] = None,
    dtype=np.float64,
) -> WeightedSeries:
    """Build C, S (and Sk when ``kmax`` is given) up to length ``nmax``.

    ``kmax`` may be the string "auto" for ceil(nmax / 5), the largest possible
    block count (every block needs at least 5 vertices).
    """
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    lv = params.log2_v
    size = nmax + 1

    C = ScaledArray(size, dtype)
    H = ScaledArray(size, dtype)
    T = ScaledArray(size, dtype)
    R = ScaledArray(size, dtype)
    U = ScaledArray(size, dtype)
    VS = ScaledArray(size, dtype)  # prefix sums of U
    S = ScaledArray(size, dtype)

    # Hairpin term of C: closing pair plus ell = n-2 unpaired bases, with the
    # tetra-loop score replacing 4*alpha2 at ell == 4.
    for n in range(5, size):
        ell = n - 2
        score = params.alpha1 + (params.alpha3 if ell == 4 else params.alpha2 * ell)
        H.set_log2(n, _log2_weight(params, score, arcs=1))

    # Interior kernel: g unpaired bases split left/right in g+1 ways.
    K = ScaledArray(size, dtype)
    for g in range(size):
        K.set_log2(g, math.log2(g + 1) + g * params.beta2 * lv)

    p_beta = ScaledReal.from_log2(_log2_weight(params, params.beta1, arcs=1))
    p_gamma = ScaledReal.from_log2(
        _log2_weight(params, params.gamma1 + params.gamma2, arcs=1)
    )
    v_gamma2 = ScaledReal.from_log2(params.gamma2 * lv)

    for n in range(size):
        # U[n] = sum T[m] * R[n-m]: first branch+gap unit, then >= 1 more.
        if n >= 10:
            um, ue = dot_rev_raw(T, R, 5, n - 5, n)
            U.m[n], U.e[n] = um, ue
        if n >= 1:
            vm, ve = add_raw(VS.m[n - 1], int(VS.e[n - 1]), U.m[n], int(U.e[n]))
            VS.m[n], VS.e[n] = vm, ve

        if n >= 5:
            cm, ce = H.m[n], int(H.e[n])
            if n >= 7:  # interior: outer pair + g unpaired + inner irreducible
                im, ie = dot_rev_raw(K, C, 0, n - 7, n - 2)
                cm, ce = add_raw(cm, ce, im * dtype(p_beta.m), ie + p_beta.e)
            if n >= 12:  # multiloop: closing pair + interior of length n-2
                mm, me = VS.m[n - 2], int(VS.e[n - 2])
                cm, ce = add_raw(cm, ce, mm * dtype(p_gamma.m), me + p_gamma.e)
            C.m[n], C.e[n] = cm, ce

        tm, te = add_raw(
            T.m[n - 1] if n >= 1 else dtype(0.0),
            int(T.e[n - 1]) if n >= 1 else 0,
            C.m[n] * dtype(v_gamma2.m),
            int(C.e[n]) + v_gamma2.e,
        )
        T.m[n], T.e[n] = tm, te
        rm, re = add_raw(T.m[n], int(T.e[n]), U.m[n], int(U.e[n]))
        R.m[n], R.e[n] = rm, re

    # S = 1 / (1 - (z + C)): S[n] = S[n-1] + sum_{m>=5} C[m] S[n-m].
    S.m[0], S.e[0] = dtype(1.0), 0
    for n in range(1, size):
        sm, se = S.m[n - 1], int(S.e[n - 1])
        if n >= 5:
            bm, be = dot_rev_raw(C, S, 5, n, n)
            sm, se = add_raw(sm, se, bm, be)
        S.m[n], S.e[n] = sm, se

    series = WeightedSeries(
        params=params, nmax=nmax, C=C, S=S, hairpin=H, tail=T, tail_seq=R,
        multi_units=U, multi_interior=VS,
    )

    if kmax is not None:
        if kmax == "auto":
            kmax = max(1, math.ceil(nmax / 5))
        series.kmax = int(kmax)
        series.Sk = _compute_sk(C, nmax, series.kmax, dtype)
    return series


def _compute_sk(C: ScaledArray, nmax: int, kmax: int, dtype) -> _Scaled2D:
    """Sk[n][k] = Sk[n-1][k] + sum_m C[m] Sk[n-m][k-1] (block-count refinement)."""
    sk = _Scaled2D(nmax + 1, kmax + 1, dtype)
    sk.m[0, 0], sk.e[0, 0] = dtype(1.0), 0
    for n in range(1, nmax + 1):
        # Two passes over m: a max-exponent scan, then a rescaled accumulation.
        emax = np.where(sk.m[n - 1] > 0, sk.e[n - 1], _E_SENTINEL).copy()
        for m in range(5, n + 1):
            if C.m[m] == 0:
                continue
            prev = sk.e[n - m, : kmax] + int(C.e[m])
            np.maximum(
                emax[1:], np.where(sk.m[n - m, : kmax] > 0, prev, _E_SENTINEL),
                out=emax[1:],
            )
        acc = np.zeros(kmax + 1, dtype=dtype)
        safe = np.where(emax > _E_SENTINEL, emax, 0)
        shift = np.clip(sk.e[n - 1] - safe, -1100, 0).astype(np.int32)
        acc += np.ldexp(sk.m[n - 1], shift)
        for m in range(5, n + 1):
            cm = C.m[m]
            if cm == 0:
                continue
            shift = np.clip(
                (sk.e[n - m, : kmax] + int(C.e[m])) - safe[1:], -1100, 0
            ).astype(np.int32)
            acc[1:] += np.ldexp(sk.m[n - m, : kmax] * cm, shift)
        nz = acc > 0
        fm, fe = np.frexp(acc[nz])
        sk.m[n, nz] = fm * 2
        sk.e[n, nz] = safe[nz] + fe - 1
    return sk


def compute_C(nmax: int, params: EnergyParams, dtype=np.float64) -> ScaledArray:
    return compute_series(params, nmax, dtype=dtype).C


def compute_S(nmax: int, params: EnergyParams, dtype=np.float64) -> ScaledArray:
    return compute_series(params, nmax, dtype=dtype).S


def compute_Sk(nmax: int, kmax: int, params: EnergyParams, dtype=np.float64):
    return compute_series(params, nmax, kmax=kmax, dtype=dtype).Sk


# ---------------------------------------------------------------------------
# Brute-force oracle


def enumerate_structures(n: int) -> Iterator[SecondaryStructure]:
    """Yield every valid structure on n vertices (n <= BRUTE_FORCE_LIMIT)."""
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"refusing to enumerate n={n} > {BRUTE_FORCE_LIMIT} structures exhaustively"
        )

    def rec(lo: int, hi: int) -> Iterator[tuple[tuple[int, int], ...]]:
        if lo > hi:
            yield ()
            return
        # Position lo unpaired...
        for rest in rec(lo + 1, hi):
            yield rest
        # ...or paired to j >= lo + 4.
        for j in range(lo + 4, hi + 1):
            for inner in rec(lo + 1, j - 1):
                for outer in rec(j + 1, hi):
                    yield ((lo, j),) + inner + outer

    for arcs in rec(1, n):
        yield SecondaryStructure(n=n, arcs=arcs)


@dataclass
class BruteForceTotals:
    n: int
    structure_count: int
    S_exact: ScaledReal
    C_exact: ScaledReal  # rainbow-restricted total
    Sk_exact: list[ScaledReal]  # by block count


def brute_force_enumerate(n: int, params: EnergyParams) -> BruteForceTotals:
    """Score every diagram individually through the energy module and aggregate."""
    s_total = ScaledReal()
    c_total = ScaledReal()
    sk: list[ScaledReal] = [ScaledReal() for _ in range(n // 5 + 2)]
    count = 0
    for s in enumerate_structures(n):
        w = structure_weight(s, params)
        count += 1
        s_total = s_total + w
        if (1, n) in s.arcs:
            c_total = c_total + w
        k = block_count(s)
        sk[k] = sk[k] + w
    return BruteForceTotals(
        n=n, structure_count=count, S_exact=s_total, C_exact=c_total, Sk_exact=sk
    )


# ---------------------------------------------------------------------------
# Diagnostics and export


def ratio_trace(series: WeightedSeries) -> dict[str, np.ndarray]:
    """r(n) = C[n]/S[n] plus the regime diagnostics n*r(n) and log r(n)/n."""
    n = np.arange(series.nmax + 1)
    log2_r = series.C.log2() - series.S.log2()
    with np.errstate(over="ignore"):
        r = np.exp2(np.clip(log2_r, -1074, 1024))
    r[np.isneginf(log2_r)] = 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        log_r_over_n = np.where(n > 0, log2_r * math.log(2.0) / np.maximum(n, 1), np.nan)
    return {"n": n, "r": r, "log2_r": log2_r, "n_r": n * r, "log_r_over_n": log_r_over_n}


def scaled_decimal(value: ScaledReal, digits: int = 12) -> str:
    """Decimal scientific string with unbounded exponent, e.g. '1.234e+2041'."""
    if value.is_zero():
        return "0"
    log10 = value.log2 * math.log10(2.0)
    exp10 = math.floor(log10)
    mant = 10.0 ** (log10 - exp10)
    # Guard against mantissa rounding to 10.
    if mant >= 10.0:
        mant /= 10.0
        exp10 += 1
    return f"{mant:.{digits}f}e{exp10:+d}"


def _provenance_lines(params: EnergyParams, **extra) -> list[str]:
    fields = {k: getattr(params, k) for k in (
        "alpha1", "alpha2", "alpha3", "beta1", "beta2", "gamma1", "gamma2", "v", "p",
    )}
    fields.update(extra)
    return [f"# {key}={value!r}" for key, value in fields.items()]


def export_series_csv(series: WeightedSeries, path: str | Path) -> None:
    """Columns n, S, C, r (decimal-scientific for S/C) plus log10 helpers."""
    trace = ratio_trace(series)
    ln10 = math.log10(2.0)
    lines = _provenance_lines(series.params, nmax=series.nmax)
    lines.append("n,S,C,r,log10_S,log10_C")
    s_log2 = series.S.log2()
    c_log2 = series.C.log2()
    for n in range(series.nmax + 1):
        s_str = scaled_decimal(series.S.get(n))
        c_str = scaled_decimal(series.C.get(n))
        lines.append(
            f"{n},{s_str},{c_str},{float(trace['r'][n])!r},"
            f"{float(s_log2[n] * ln10)!r},{float(c_log2[n] * ln10)!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def export_block_histogram_csv(series: WeightedSeries, n: int, path: str | Path) -> None:
    """Columns n, k, Sk, P(X_n=k) for one backbone length."""
    if series.Sk is None:
        raise ValueError("Sk table not computed")
    pmf = series.block_pmf(n)
    lines = _provenance_lines(series.params, n=n, kmax=series.kmax)
    lines.append("n,k,Sk,P")
    for k, prob in enumerate(pmf):
        sk_str = scaled_decimal(series.Sk.get(n, k))
        lines.append(f"{n},{k},{sk_str},{float(prob)!r}")
    Path(path).write_text("\n".join(lines) + "\n")
