"""MFE folding of nucleotide sequences under the combinatorial loop scores.

The loop scores are sequence-agnostic, so folding plain lengths would make
every interval optimum depend only on size; sequences with complementarity
constraints ({GC, CG, AU, UA, GU, UG}, chord length >= 4) are what make
candidate statistics meaningful.  "MFE" means maximum total score G under
this package's sign convention.

Recurrences (four tables, one column per right end j):

    V[i][j]   best score with (i,j) paired: hairpin, interior loop around a
              nested pair (total unpaired capped at lmax), or multiloop
              closing gamma1 + gamma2 + M2[i+1][j-1]
    WS[i][j]  open region: blocks (scored V) and free unpaired vertices
    M1[i][j]  multiloop interior with >= 1 branch (each branch V + gamma2,
              unpaired free)
    M2[i][j]  multiloop interior with >= 2 branches

Sparsification restricts the split loops of WS/M1/M2 to candidates: a pair
(k, j) is a W-candidate when its closed score strictly beats every proper
decomposition of [k, j] into smaller optimal pieces, and an M-candidate when
the same holds inside the forced-branch semiring.  Dominated split points can
never improve a maximum, so pruned and full runs produce identical tables.

All DP arithmetic is int64 on loop scores quantized to 1e-6 score units
(exact for parameters with at most six decimals, like the built-in sets), so
score equality between variants is exact rather than within float noise.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .energy import EnergyParams, structure_energy
from .structures import SecondaryStructure, validate

__all__ = [
    "ALPHABET",
    "QUANT",
    "Sequence",
    "FoldResult",
    "CandidateStats",
    "SweepRow",
    "SweepResult",
    "fold_full",
    "fold_sparse",
    "brute_force_fold",
    "count_candidates_sweep",
    "random_sequence",
]

ALPHABET = "ACGU"
QUANT = 1_000_000  # integer score units per score unit
_NEG = -(2**60)
BRUTE_FORCE_LIMIT = 16
UNCAPPED_LIMIT = 120

_CODE = {c: i for i, c in enumerate(ALPHABET)}
_PAIR_OK = np.zeros((4, 4), dtype=bool)
for _a, _b in ("AU", "UA", "GC", "CG", "GU", "UG"):
    _PAIR_OK[_CODE[_a], _CODE[_b]] = True


@dataclass(frozen=True)
class Sequence:
    text: str

    def __post_init__(self):
        bad = set(self.text) - set(ALPHABET)
        if bad:
            raise ValueError(f"sequence contains non-ACGU symbols: {sorted(bad)}")

    def __len__(self) -> int:
        return len(self.text)

    def codes(self) -> np.ndarray:
        raw = np.frombuffer(self.text.encode(), dtype=np.uint8)
        mapped = np.empty(len(raw), dtype=np.int8)
        for ch, code in _CODE.items():
            mapped[raw == ord(ch)] = code
        return mapped


def _codes(seq: "Sequence | str") -> np.ndarray:
    if isinstance(seq, str):
        seq = Sequence(seq)
    return seq.codes()


def random_sequence(length: int, seed: int, stream: int = 0) -> Sequence:
    """Uniform ACGU sequence from a counter-based stream keyed by (seed, stream)."""
    key = ((seed & 0xFFFFFFFFFFFFFFFF) << 64) | (stream & 0xFFFFFFFFFFFFFFFF)
    rng = np.random.Generator(np.random.Philox(key=key))
    return Sequence("".join(ALPHABET[i] for i in rng.integers(0, 4, size=length)))


@dataclass
class FoldResult:
    score: float  # canonical float score of the returned structure
    structure: SecondaryStructure
    score_units: int  # optimum in quantized units (exact DP value)
    intervals: int  # pairable (i, j) with span >= 4 considered by the DP
    table_cells: int
    elapsed_ms: float


@dataclass
class CandidateStats:
    n: int
    intervals: int
    candidates: int
    fraction_pruned: float
    t_sparse_ms: float
    cells_sparse: int
    t_full_ms: Optional[float] = None
    cells_full: Optional[int] = None


@dataclass
class SweepRow:
    n: int
    trial: int
    candidates: int
    intervals: int
    t_full_ms: float
    t_sparse_ms: float
    cells_full: int
    cells_sparse: int


@dataclass
class SweepResult:
    rows: list[SweepRow]
    slopes: dict[str, dict[str, float]] = field(default_factory=dict)


class _Quantized:
    """Loop scores in integer units, shared by the DP and the brute force."""

    def __init__(self, params: EnergyParams, nmax: int):
        self.params = params
        ell = np.arange(nmax + 2, dtype=np.float64)
        hp = params.alpha1 + params.alpha2 * ell
        if nmax >= 4:
            hp[4] = params.alpha1 + params.alpha3
        self.hairpin = np.round(hp * QUANT).astype(np.int64)
        self.interior = np.round(
            (params.beta1 + params.beta2 * ell) * QUANT
        ).astype(np.int64)
        self.multi_close = int(round((params.gamma1 + params.gamma2) * QUANT))
        self.branch = int(round(params.gamma2 * QUANT))

    def structure_units(self, s: SecondaryStructure) -> int:
        """Quantized total score via the loop decomposition (oracle path)."""
        from .energy import Hairpin, Interior
        from .structures import loop_decomposition

        total = 0
        for loop in loop_decomposition(s):
            if isinstance(loop, Hairpin):
                total += int(self.hairpin[loop.ell])
            elif isinstance(loop, Interior):
                total += int(self.interior[loop.ell])
            else:
                total += self.multi_close + (loop.branches - 1) * self.branch
        return total


class _FoldTables:
    """Filled DP tables plus per-column candidate lists (for traceback)."""

    def __init__(self, n, V, WS, M1, M2, candW, candM, quant, lmax, uncapped):
        self.n = n
        self.V = V
        self.WS = WS
        self.M1 = M1
        self.M2 = M2
        self.candW = candW
        self.candM = candM
        self.quant = quant
        self.lmax = lmax
        self.uncapped = uncapped


def _engine(
    codes: np.ndarray,
    params: EnergyParams,
    sparse: bool,
    lmax: int,
    uncapped: bool,
    keep_tables: bool,
    agnostic: bool = False,
):
    """One DP run; returns (score_units, tables|None, stats dict)."""
    n = len(codes)
    size = n + 2
    quant = _Quantized(params, n)
    t0 = time.perf_counter()

    # Pairability, 1-indexed.  Agnostic mode allows every pair of span >= 4
    # (cross-validation against the sequence-free counting grammar).
    pair_ok = np.zeros((size, size), dtype=bool)
    if n >= 5:
        if agnostic:
            ok = np.ones((n, n), dtype=bool)
        else:
            c = codes
            ok = _PAIR_OK[c[:, None], c[None, :]]
        iu = np.triu_indices(n, k=4)
        pair_ok[1 + iu[0], 1 + iu[1]] = ok[iu]
    intervals = int(pair_ok.sum())

    if intervals == 0:
        elapsed = (time.perf_counter() - t0) * 1e3
        stats = {
            "intervals": 0, "candidates": 0, "cells": size, "elapsed_ms": elapsed,
        }
        tables = _FoldTables(n, None, None, None, None, {}, {}, quant, lmax, uncapped)
        return 0, (tables if keep_tables else None), stats

    if uncapped:
        if n > UNCAPPED_LIMIT:
            raise ValueError(
                f"uncapped interior loops are O(n^4); limit is n <= {UNCAPPED_LIMIT}"
            )
        lmax = n  # cap never binds

    window = lmax + 3
    WS = np.zeros((size, size), dtype=np.int64)
    M1 = np.full((size, size), _NEG, dtype=np.int64)
    M2_full = None
    V_full = None
    if keep_tables:
        V_full = np.full((size, size), _NEG, dtype=np.int64)
        M2_full = np.full((size, size), _NEG, dtype=np.int64)
        v_ring = m2_ring = None
        cells = 4 * size * size
    else:
        v_ring = np.full((size, window), _NEG, dtype=np.int64)
        m2_ring = np.full((size, 2), _NEG, dtype=np.int64)
        cells = 2 * size * size + size * window + 2 * size

    def v_col(q: int) -> np.ndarray:
        if keep_tables:
            return V_full[:, q]
        return v_ring[:, q % window]

    def m2_col(q: int) -> np.ndarray:
        if keep_tables:
            return M2_full[:, q]
        return m2_ring[:, q % 2]

    g2 = quant.branch
    mclose = quant.multi_close
    candW: dict[int, np.ndarray] = {}
    candM: dict[int, np.ndarray] = {}
    n_cand = 0

    for j in range(5, n + 1):
        # ---- V column -----------------------------------------------------
        vc = v_col(j)
        vc.fill(_NEG)
        imax = j - 4
        ell = j - np.arange(1, imax + 1) - 1
        vals = quant.hairpin[ell].copy()
        # interior loops: a left / b right unpaired around the nested pair
        for a in range(0, min(lmax, j - 6) + 1):
            bmax = min(lmax - a, j - 6 - a)
            for b in range(0, bmax + 1):
                hi = j - 6 - a - b  # largest i for this (a, b)
                if hi < 1:
                    break
                inner = v_col(j - 1 - b)[2 + a : j - 4 - b]
                np.maximum(
                    vals[:hi], inner + int(quant.interior[a + b]), out=vals[:hi]
                )
        # multiloop closings
        hi = j - 12
        if hi >= 1:
            inner = m2_col(j - 1)[2 : hi + 2]
            np.maximum(vals[:hi], inner + mclose, out=vals[:hi])
        mask = pair_ok[1 : imax + 1, j]
        vc[1 : imax + 1] = np.where(mask, vals, _NEG)

        # ---- candidate discovery ------------------------------------------
        vb = vc + g2
        if sparse:
            kw: list[int] = []
            km: list[int] = []
            pot = np.nonzero(
                pair_ok[1 : imax + 1, j]
                & ((vc[1 : imax + 1] > WS[1 : imax + 1, j - 1])
                   | (vb[1 : imax + 1] > M1[1 : imax + 1, j - 1]))
            )[0] + 1
            for i in pot[::-1]:
                i = int(i)
                ws_split = int(WS[i, j - 1])
                if kw:
                    ka = np.array(kw, dtype=np.int64)
                    ws_split = max(
                        ws_split, int((WS[i, ka - 1] + vc[ka]).max())
                    )
                if vc[i] > ws_split:
                    kw.append(i)
                m1_split = int(M1[i, j - 1])
                if km:
                    ka = np.array(km, dtype=np.int64)
                    m1_split = max(
                        m1_split,
                        int((np.maximum(M1[i, ka - 1], 0) + vb[ka]).max()),
                    )
                if vb[i] > m1_split:
                    km.append(i)
            kw_arr = np.array(sorted(kw), dtype=np.int64)
            km_arr = np.array(sorted(km), dtype=np.int64)
        else:
            kw_arr = km_arr = np.nonzero(pair_ok[:, j])[0]

        # ---- WS / M1 / M2 columns -----------------------------------------
        ws_col = WS[:, j]
        np.copyto(ws_col, WS[:, j - 1])
        for k in kw_arr:
            k = int(k)
            np.maximum(ws_col[1:k], WS[1:k, k - 1] + int(vc[k]), out=ws_col[1:k])
        if not sparse:
            flags_w = pair_ok[:, j] & (vc > ws_col)

        m1_col = M1[:, j]
        np.copyto(m1_col, M1[:, j - 1])
        m2c = m2_col(j)
        np.copyto(m2c, m2_col(j - 1))
        for k in km_arr:
            k = int(k)
            vbk = int(vb[k])
            np.maximum(m2c[1:k], M1[1:k, k - 1] + vbk, out=m2c[1:k])
            np.maximum(
                m1_col[1:k], np.maximum(M1[1:k, k - 1], 0) + vbk, out=m1_col[1:k]
            )
        if not sparse:
            flags_m = pair_ok[:, j] & (vb > m1_col)
            kw_arr = np.nonzero(flags_w)[0]
            km_arr = np.nonzero(flags_m)[0]
        np.maximum(ws_col, np.where(pair_ok[:, j], vc, _NEG), out=ws_col)
        np.maximum(m1_col, np.where(pair_ok[:, j], vb, _NEG), out=m1_col)

        candW[j] = kw_arr
        candM[j] = km_arr
        n_cand += len(np.union1d(kw_arr, km_arr))

    score = int(WS[1, n])
    elapsed = (time.perf_counter() - t0) * 1e3
    stats = {
        "intervals": intervals,
        "candidates": n_cand,
        "cells": cells,
        "elapsed_ms": elapsed,
    }
    tables = None
    if keep_tables:
        tables = _FoldTables(
            n, V_full, WS, M1, M2_full, candW, candM, quant, lmax, uncapped
        )
    return score, tables, stats


def _traceback(tables: _FoldTables) -> SecondaryStructure:
    """Deterministic traceback shared by full and sparse runs.

    Preference order at ties: trailing vertex unpaired first, then the
    smallest split point among candidates; closings resolve hairpin, then
    interior by ascending (left, right) gap, then multiloop.
    """
    n = tables.n
    if tables.V is None:
        return SecondaryStructure(n=n, arcs=())
    V, WS, M1, M2 = tables.V, tables.WS, tables.M1, tables.M2
    quant = tables.quant
    g2 = quant.branch
    arcs: list[tuple[int, int]] = []
    stack: list[tuple[str, int, int]] = [("WS", 1, n)]

    while stack:
        kind, i, j = stack.pop()
        if kind == "WS":
            while j >= i:
                if WS[i, j] == (WS[i, j - 1] if j - 1 >= i else 0):
                    j -= 1
                    continue
                target = WS[i, j]
                for k in tables.candW[j]:
                    k = int(k)
                    if k < i or k > j - 4:
                        continue
                    left = WS[i, k - 1] if k - 1 >= i else 0
                    if left + V[k, j] == target:
                        stack.append(("V", k, j))
                        j = k - 1
                        break
                else:
                    raise AssertionError(f"open-region traceback stuck at [{i},{j}]")
        elif kind == "V":
            arcs.append((i, j))
            span = j - i
            if V[i, j] == quant.hairpin[span - 1]:
                continue
            done = False
            amax = min(tables.lmax, span - 6)
            for a in range(0, amax + 1):
                for b in range(0, min(tables.lmax - a, span - 6 - a) + 1):
                    p, q = i + 1 + a, j - 1 - b
                    if V[p, q] > _NEG // 2 and \
                            V[p, q] + quant.interior[a + b] == V[i, j]:
                        stack.append(("V", p, q))
                        done = True
                        break
                if done:
                    break
            if done:
                continue
            if M2[i + 1, j - 1] > _NEG // 2 and \
                    quant.multi_close + M2[i + 1, j - 1] == V[i, j]:
                stack.append(("M2", i + 1, j - 1))
                continue
            raise AssertionError(f"closed traceback stuck at ({i},{j})")
        elif kind == "M2":
            while j - 1 >= i and M2[i, j] == M2[i, j - 1]:
                j -= 1
            target = M2[i, j]
            hit = False
            for k in tables.candM[j]:
                k = int(k)
                if k <= i or k > j - 4:
                    continue
                if M1[i, k - 1] > _NEG // 2 and \
                        M1[i, k - 1] + V[k, j] + g2 == target:
                    stack.append(("M1", i, k - 1))
                    stack.append(("V", k, j))
                    hit = True
                    break
            if not hit:
                raise AssertionError(f"multiloop traceback stuck at [{i},{j}]")
        else:  # M1
            while j - 1 >= i and M1[i, j] == M1[i, j - 1]:
                j -= 1
            target = M1[i, j]
            hit = False
            for k in tables.candM[j]:
                k = int(k)
                if k < i or k > j - 4:
                    continue
                prefix = 0 if k == i else max(int(M1[i, k - 1]), 0)
                if V[k, j] + g2 + prefix == target:
                    stack.append(("V", k, j))
                    if k > i and M1[i, k - 1] > 0:
                        stack.append(("M1", i, k - 1))
                    hit = True
                    break
            if not hit:
                raise AssertionError(f"branch traceback stuck at [{i},{j}]")

    return validate(n, arcs)


def _fold(seq, params, sparse, lmax, uncapped, agnostic=False):
    codes = _codes(seq)
    score_units, tables, stats = _engine(
        codes, params, sparse=sparse, lmax=lmax, uncapped=uncapped,
        keep_tables=True, agnostic=agnostic,
    )
    structure = _traceback(tables)
    result = FoldResult(
        score=structure_energy(structure, params),
        structure=structure,
        score_units=score_units,
        intervals=stats["intervals"],
        table_cells=stats["cells"],
        elapsed_ms=stats["elapsed_ms"],
    )
    return result, stats


def fold_full(seq, params: EnergyParams, lmax: int = 30,
              uncapped: bool = False, agnostic: bool = False) -> FoldResult:
    """Maximize the total score over all pairing-compatible structures."""
    result, _ = _fold(seq, params, sparse=False, lmax=lmax, uncapped=uncapped,
                      agnostic=agnostic)
    return result


def fold_sparse(seq, params: EnergyParams,
                lmax: int = 30) -> tuple[FoldResult, CandidateStats]:
    """Candidate-pruned fold; identical tables and structure to fold_full."""
    result, stats = _fold(seq, params, sparse=True, lmax=lmax, uncapped=False)
    cand = CandidateStats(
        n=result.structure.n,
        intervals=stats["intervals"],
        candidates=stats["candidates"],
        fraction_pruned=1.0 - stats["candidates"] / max(stats["intervals"], 1),
        t_sparse_ms=stats["elapsed_ms"],
        cells_sparse=stats["cells"],
    )
    return result, cand


def brute_force_fold(seq, params: EnergyParams) -> FoldResult:
    """Exhaustive maximization over pairing-compatible structures (n <= 16).

    Scores through the loop decomposition (independent of the DP recurrences,
    shared quantization).  Ties pick fewest arcs, then the lexicographically
    smallest arc list.
    """
    codes = _codes(seq)
    n = len(codes)
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"refusing brute-force fold for n={n} > {BRUTE_FORCE_LIMIT}")
    quant = _Quantized(params, n)
    t0 = time.perf_counter()

    def rec(lo: int, hi: int):
        if lo > hi:
            yield ()
            return
        for rest in rec(lo + 1, hi):
            yield rest
        for j in range(lo + 4, hi + 1):
            if not _PAIR_OK[codes[lo - 1], codes[j - 1]]:
                continue
            for inner in rec(lo + 1, j - 1):
                for outer in rec(j + 1, hi):
                    yield ((lo, j),) + inner + outer

    best_units = 0
    best_struct = SecondaryStructure(n=n, arcs=())
    for arcs in rec(1, n):
        s = SecondaryStructure(n=n, arcs=arcs)
        units = quant.structure_units(s)
        key = (units, -len(arcs), tuple(-x for pair in s.arcs for x in pair))
        cur = (best_units, -len(best_struct.arcs),
               tuple(-x for pair in best_struct.arcs for x in pair))
        if key > cur:
            best_units = units
            best_struct = s
    elapsed = (time.perf_counter() - t0) * 1e3
    return FoldResult(
        score=structure_energy(best_struct, params),
        structure=best_struct,
        score_units=best_units,
        intervals=0,
        table_cells=0,
        elapsed_ms=elapsed,
    )


def _sweep_task(args) -> SweepRow:
    length, trial, params, seed, lmax = args
    seq = random_sequence(length, seed, stream=(length << 20) | trial)
    codes = _codes(seq)
    # untimed warm-up so allocator/cache state is comparable for both variants
    warm = _codes(random_sequence(30, seed, stream=(1 << 40) | trial))
    _engine(warm, params, sparse=False, lmax=lmax, uncapped=False, keep_tables=True)
    _engine(warm, params, sparse=True, lmax=lmax, uncapped=False, keep_tables=False)
    score_f, _, stats_f = _engine(
        codes, params, sparse=False, lmax=lmax, uncapped=False, keep_tables=True
    )
    score_s, _, stats_s = _engine(
        codes, params, sparse=True, lmax=lmax, uncapped=False, keep_tables=False
    )
    if score_f != score_s:
        raise AssertionError(
            f"sparse/full mismatch on n={length} trial={trial}: "
            f"{score_s} vs {score_f}"
        )
    return SweepRow(
        n=length,
        trial=trial,
        candidates=stats_s["candidates"],
        intervals=stats_s["intervals"],
        t_full_ms=stats_f["elapsed_ms"],
        t_sparse_ms=stats_s["elapsed_ms"],
        cells_full=stats_f["cells"],
        cells_sparse=stats_s["cells"],
    )


def count_candidates_sweep(
    lengths: list[int],
    trials: int,
    params: EnergyParams,
    seed: int,
    lmax: int = 30,
    workers: Optional[int] = None,
    bootstrap: int = 200,
) -> SweepResult:
    """Average candidate statistics over random sequences per length.

    Emits log-log slope fits (candidate totals and wall-clock vs n) with
    bootstrap 95% intervals over trials.
    """
    if sorted(lengths) != list(lengths):
        raise ValueError("lengths must be ascending")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = [(n, t, params, seed, lmax) for n in lengths for t in range(trials)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]

    result = SweepResult(rows=rows)
    result.slopes = _sweep_slopes(rows, lengths, trials, bootstrap, seed)
    return result


def _loglog_slope(ns: np.ndarray, ys: np.ndarray) -> float:
    return float(np.polyfit(np.log(ns), np.log(np.maximum(ys, 1e-12)), 1)[0])


def _sweep_slopes(rows, lengths, trials, bootstrap, seed) -> dict:
    ns = np.array(lengths, dtype=np.float64)
    by_len = {
        n: [r for r in rows if r.n == n] for n in lengths
    }
    out = {}
    rng = np.random.Generator(np.random.Philox(key=seed))
    for name, getter in [
        ("candidates", lambda r: r.candidates),
        ("t_full_ms", lambda r: r.t_full_ms),
        ("t_sparse_ms", lambda r: r.t_sparse_ms),
    ]:
        means = np.array([np.mean([getter(r) for r in by_len[n]]) for n in lengths])
        slope = _loglog_slope(ns, means)
        boots = []
        for _ in range(bootstrap):
            bm = []
            for n in lengths:
                vals = np.array([getter(r) for r in by_len[n]])
                bm.append(vals[rng.integers(0, len(vals), len(vals))].mean())
            boots.append(_loglog_slope(ns, np.array(bm)))
        lo, hi = np.percentile(boots, [2.5, 97.5])
        out[name] = {
            "slope": slope, "ci_low": float(lo), "ci_high": float(hi),
            "means": {int(n): float(m) for n, m in zip(lengths, means)},
        }
    return out
