"""Exact Boltzmann sampling of structures and limit-law comparisons.

Each structure of length n is drawn with probability weight / S[n] by a
stochastic traceback over the same recurrences that built the series tables,
so the sampler and the counter share one grammar by construction.

The traceback is organized as batched resolution of typed requests:

    TOP(j)    open region of length j: last vertex exterior-unpaired, or a
              trailing irreducible block of some size m
    BLOCK(m)  irreducible of size m: hairpin, interior (choose the unpaired
              total g, then the left/right split), or multiloop (choose the
              leading gap)
    USEQ(L)   multiloop interior of length L: >= 2 branch+gap units
    RSEQ(j)   >= 1 further branch+gap units of total length j
    TUNIT(t)  one branch+gap unit: choose the branch size

Requests generated by a decision are always strictly smaller, or equal-sized
of a later kind in the fixed kind order, so one descending sweep over sizes
resolves everything; all samples at the same (kind, size) are decided in one
vectorized step.  Randomness is a counter-based stream per sample (a splitmix
hash of seed, sample index, and a per-sample decision counter), so results do
not depend on batching, chunking, or thread count, and no state is stored
beyond one integer per sample.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from .energy import EnergyParams
from .series import WeightedSeries, compute_series
from .structures import SecondaryStructure

__all__ = [
    "SampleBatch",
    "LawFit",
    "sample",
    "exact_block_pmf",
    "discrete_limit_pmf",
    "rayleigh_pdf",
    "fit_gaussian",
    "fit_rayleigh",
    "total_variation",
    "export_batch_csv",
    "export_histogram_csv",
]

# Kind order within one size level; generated requests never point backwards.
# (Interior left/right splits are uniform and resolved inline.)
_TOP, _USEQ, _RSEQ, _TUNIT, _BLOCK = range(5)

# splitmix64 constants (finalizer of Steele et al.'s SplitMix generator)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0**-53


@dataclass
class SampleBatch:
    """Reproducible batch of samples: (params, n, count, seed) fixes everything."""

    params: EnergyParams
    n: int
    count: int
    seed: int
    X: np.ndarray  # irreducible block count per sample
    G: np.ndarray  # total energy per sample
    arcs: np.ndarray  # arc count per sample
    structures: Optional[list[SecondaryStructure]] = field(default=None, repr=False)


def _mix64(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x = x * _MIX1
    x = x ^ (x >> np.uint64(27))
    x = x * _MIX2
    return x ^ (x >> np.uint64(31))


class _Streams:
    """Counter-based uniform stream per sample, keyed by (seed, sample index).

    The t-th uniform of sample i is a pure function of (seed, i, t), so any
    batching or parallel schedule draws identical values.
    """

    def __init__(self, seed: int, count: int):
        idx = np.arange(count, dtype=np.uint64)
        self.key = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLD)
        self.pos = np.zeros(count, dtype=np.uint64)

    def draw(self, rows: np.ndarray) -> np.ndarray:
        """One uniform per request; duplicate rows consume consecutive counters."""
        if rows.size == 0:
            return np.empty(0)
        order = np.argsort(rows, kind="stable")
        sr = rows[order]
        new_run = np.empty(len(sr), dtype=bool)
        new_run[0] = True
        new_run[1:] = sr[1:] != sr[:-1]
        run_starts = np.nonzero(new_run)[0]
        occ_sorted = np.arange(len(sr), dtype=np.uint64) \
            - run_starts.astype(np.uint64)[np.cumsum(new_run) - 1]
        occ = np.empty(len(sr), dtype=np.uint64)
        occ[order] = occ_sorted
        counter = self.pos[rows] + occ
        z = _mix64(self.key[rows] + (counter + np.uint64(1)) * _GOLD)
        np.add.at(self.pos, rows, np.uint64(1))
        return (z >> np.uint64(11)).astype(np.float64) * _U53


class _Tables:
    """Per-level decision CDFs built on demand from precomputed log2 arrays.

    Each (kind, size) level is visited at most once per sweep, so CDFs are
    constructed, used for one batched searchsorted, and discarded; memory
    stays O(n) regardless of backbone length.
    """

    def __init__(self, series: WeightedSeries):
        self.params = series.params
        self.lC = series.C.log2()
        self.lS = series.S.log2()
        self.lH = series.hairpin.log2()
        self.lT = series.tail.log2()
        self.lR = series.tail_seq.log2()
        self.lU = series.multi_units.log2()

    def cdf(self, kind: int, size: int) -> np.ndarray:
        cdf = np.cumsum(self._weights(kind, size))
        # Guard against float drift so searchsorted(u < 1) stays in range.
        cdf[-1] = max(cdf[-1], 1.0)
        return cdf

    def _weights(self, kind: int, size: int) -> np.ndarray:
        p = self.params
        if kind == _TOP:
            # outcome 0: last vertex unpaired; outcome i>=1: block of size 4+i.
            if size < 5:
                return np.ones(1)
            w = np.empty(size - 3)
            w[0] = np.exp2(max(self.lS[size - 1] - self.lS[size], -1074))
            idx = np.arange(5, size + 1)
            lw = (self.lC[idx] + self.lS[size - idx]) - self.lS[size]
            w[1:] = np.exp2(np.clip(lw, -1074, 64))
            return w
        if kind == _BLOCK:
            # outcome 0: hairpin; 1..size-6: interior with g = outcome-1;
            # size-5...: multiloop with leading gap g0 = outcome-(size-5).
            total = self.lC[size]
            n_int = max(size - 6, 0)
            n_mul = max(size - 11, 0)
            w = np.zeros(1 + n_int + n_mul)
            w[0] = np.exp2(np.clip(self.lH[size] - total, -1074, 64))
            if n_int:
                g = np.arange(n_int)
                lw = (
                    p.log2_p + p.beta1 * p.log2_v
                    + np.log2(g + 1) + g * (p.beta2 * p.log2_v)
                    + self.lC[size - 2 - g] - total
                )
                w[1 : 1 + n_int] = np.exp2(np.clip(lw, -1074, 64))
            if n_mul:
                g0 = np.arange(n_mul)
                lw = (
                    p.log2_p + (p.gamma1 + p.gamma2) * p.log2_v
                    + self.lU[size - 2 - g0] - total
                )
                w[1 + n_int :] = np.exp2(np.clip(lw, -1074, 64))
            return w
        if kind == _USEQ:
            # first unit of size t = 5..size-5, then >= 1 more units.
            t = np.arange(5, size - 4)
            lw = self.lT[t] + self.lR[size - t] - self.lU[size]
            return np.exp2(np.clip(lw, -1074, 64))
        if kind == _RSEQ:
            # first unit of size t = 5..size; remainder empty when t == size.
            t = np.arange(5, size + 1)
            rest = np.concatenate((self.lR[size - t[:-1]], [0.0]))
            lw = self.lT[t] + rest - self.lR[size]
            return np.exp2(np.clip(lw, -1074, 64))
        if kind == _TUNIT:
            # branch of size b = 5..size, trailing gap absorbs the rest.
            b = np.arange(5, size + 1)
            lw = p.gamma2 * p.log2_v + self.lC[b] - self.lT[size]
            return np.exp2(np.clip(lw, -1074, 64))
        raise AssertionError(kind)


def sample(
    n: int,
    count: int,
    params: EnergyParams,
    seed: int,
    series: Optional[WeightedSeries] = None,
    structures: bool = False,
) -> SampleBatch:
    """Draw ``count`` structures of length ``n`` with probability weight/S[n]."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if series is None:
        series = compute_series(params, n)
    elif series.nmax < n:
        raise ValueError(f"series tables cover nmax={series.nmax} < n={n}")
    tables = _Tables(series)

    X = np.zeros(count, dtype=np.int64)
    G = np.zeros(count, dtype=np.float64)
    arcs = np.zeros(count, dtype=np.int64)
    all_structures: Optional[list[SecondaryStructure]] = [] if structures else None
    _sample_sweep(n, params, seed, count, tables, X, G, arcs, all_structures)
    return SampleBatch(
        params=params, n=n, count=count, seed=seed,
        X=X, G=G, arcs=arcs, structures=all_structures,
    )


def _sample_sweep(n, params, seed, count, tables, X, G, arcs, structures):
    streams = _Streams(seed, count)
    # pending[(kind, size)] -> list of (sample_row, offset[, extra]) arrays
    pending: dict[tuple[int, int], list[np.ndarray]] = {}
    arc_rows: list[np.ndarray] = []
    arc_i: list[np.ndarray] = []
    arc_j: list[np.ndarray] = []

    def push(kind: int, sizes: np.ndarray, rows: np.ndarray, offs: np.ndarray) -> None:
        for size in np.unique(sizes):
            mask = sizes == size
            pending.setdefault((int(size), kind), []).append(
                np.stack((rows[mask], offs[mask]))
            )

    if n >= 1:
        rows0 = np.arange(count, dtype=np.int64)
        pending[(n, _TOP)] = [np.stack((rows0, np.ones(count, dtype=np.int64)))]

    for size in range(n, 0, -1):
        for kind in (_TOP, _USEQ, _RSEQ, _TUNIT, _BLOCK):
            batches = pending.pop((size, kind), None)
            if not batches:
                continue
            req = np.concatenate(batches, axis=1)
            rows, offs = req[0], req[1]
            u = streams.draw(rows)

            cdf = tables.cdf(kind, size)
            pick = np.searchsorted(cdf, u, side="right")
            pick = np.minimum(pick, len(cdf) - 1)

            if kind == _TOP:
                unp = pick == 0
                if unp.any() and size - 1 >= 1:
                    push(_TOP, np.full(int(unp.sum()), size - 1), rows[unp], offs[unp])
                blk = ~unp
                if blk.any():
                    m = pick[blk] + 4  # block size
                    r, o = rows[blk], offs[blk]
                    np.add.at(X, r, 1)
                    # block occupies the LAST m vertices of the open region.
                    push(_BLOCK, m, r, o + (size - m))
                    rest = size - m
                    keep = rest >= 1
                    if keep.any():
                        push(_TOP, rest[keep], r[keep], o[keep])

            elif kind == _BLOCK:
                np.add.at(arcs, rows, 1)
                if structures is not None:
                    arc_rows.append(rows.copy())
                    arc_i.append(offs.copy())
                    arc_j.append(offs + size - 1)
                n_int = max(size - 6, 0)
                hp = pick == 0
                if hp.any():
                    ell = size - 2
                    np.add.at(
                        G, rows[hp],
                        params.alpha1
                        + (params.alpha3 if ell == 4 else params.alpha2 * ell),
                    )
                is_int = (pick >= 1) & (pick <= n_int)
                if is_int.any():
                    g = pick[is_int] - 1
                    r, o = rows[is_int], offs[is_int]
                    np.add.at(G, r, params.beta1 + params.beta2 * g)
                    # split the g unpaired bases; the stack case g == 0 has a
                    # single outcome and consumes no randomness
                    left = np.zeros(len(g), dtype=np.int64)
                    gap = g > 0
                    if gap.any():
                        left[gap] = np.minimum(
                            np.floor(streams.draw(r[gap]) * (g[gap] + 1)).astype(np.int64),
                            g[gap],
                        )
                    push(_BLOCK, size - 2 - g, r, o + 1 + left)
                is_mul = pick > n_int
                if is_mul.any():
                    g0 = pick[is_mul] - 1 - n_int
                    r, o = rows[is_mul], offs[is_mul]
                    # gamma2 for the closing pair; branches add theirs on emit.
                    np.add.at(G, r, params.gamma1 + params.gamma2)
                    push(_USEQ, size - 2 - g0, r, o + 1 + g0)

            elif kind == _USEQ:
                t = pick + 5
                push(_TUNIT, t, rows, offs)
                push(_RSEQ, size - t, rows, offs + t)

            elif kind == _RSEQ:
                t = pick + 5
                push(_TUNIT, t, rows, offs)
                rest = size - t
                keep = rest > 0
                if keep.any():
                    push(_RSEQ, rest[keep], rows[keep], offs[keep] + t[keep])

            elif kind == _TUNIT:
                b = pick + 5
                np.add.at(G, rows, params.gamma2)
                push(_BLOCK, b, rows, offs)

    if structures is not None:
        _materialize(n, count, arc_rows, arc_i, arc_j, structures)


def _materialize(n, count, arc_rows, arc_i, arc_j, out: list) -> None:
    if arc_rows:
        rows = np.concatenate(arc_rows)
        ii = np.concatenate(arc_i)
        jj = np.concatenate(arc_j)
        order = np.argsort(rows, kind="stable")
        rows, ii, jj = rows[order], ii[order], jj[order]
        bounds = np.searchsorted(rows, np.arange(count + 1))
    else:
        bounds = np.zeros(count + 1, dtype=np.int64)
        ii = jj = np.empty(0, dtype=np.int64)
    for s in range(count):
        lo, hi = bounds[s], bounds[s + 1]
        arcs = tuple(zip(ii[lo:hi].tolist(), jj[lo:hi].tolist()))
        out.append(SecondaryStructure(n=n, arcs=arcs))


# ---------------------------------------------------------------------------
# Exact distributions and law fits


def exact_block_pmf(n: int, params: EnergyParams,
                    series: Optional[WeightedSeries] = None,
                    tol: float = 1e-12) -> np.ndarray:
    """P(X_n = k) from the bivariate table; raises on truncated kmax."""
    if series is None or series.Sk is None or series.nmax < n:
        series = compute_series(params, n, kmax="auto")
    pmf = series.block_pmf(n)
    defect = abs(1.0 - pmf.sum())
    if defect > tol:
        raise ValueError(
            f"Sk table truncated: block pmf at n={n} misses {defect:.3e} mass "
            f"(kmax={series.kmax})"
        )
    return pmf


def discrete_limit_pmf(tau_h: float, kmax: int) -> np.ndarray:
    """Limit law q_k = k tau^(k-1) (1-tau)^2 for k >= 1 (index 0 kept at 0)."""
    if not 0.0 < tau_h < 1.0:
        raise ValueError(
            f"discrete limit law requires the subcritical regime (tau_h={tau_h})"
        )
    k = np.arange(kmax + 1, dtype=np.float64)
    q = k * tau_h ** np.maximum(k - 1, 0) * (1.0 - tau_h) ** 2
    q[0] = 0.0
    return q


def rayleigh_pdf(x: np.ndarray, sigma: float) -> np.ndarray:
    """Density (x/sigma^2) exp(-x^2 / (2 sigma^2)) on x >= 0."""
    x = np.asarray(x, dtype=np.float64)
    return (x / sigma**2) * np.exp(-(x**2) / (2.0 * sigma**2))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    size = max(len(p), len(q))
    pp = np.zeros(size)
    qq = np.zeros(size)
    pp[: len(p)] = p
    qq[: len(q)] = q
    return 0.5 * float(np.abs(pp - qq).sum())


@dataclass
class LawFit:
    law: str  # "DiscreteLimit" | "Gaussian" | "Rayleigh"
    params: dict[str, float]
    distance: float  # TV for discrete, KS for continuous
    details: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"law": self.law, "params": self.params, "distance": self.distance,
             "details": self.details},
            indent=2, sort_keys=True,
        )


def _ks_integer_midpoint(values: np.ndarray, cdf) -> float:
    """KS distance for integer-valued data against a continuous CDF.

    The model CDF is evaluated at the half-integer cell boundaries (midpoint
    continuity correction), the standard way to compare a lattice law with its
    continuous limit without the atom-size floor.
    """
    ks = np.arange(values.min(), values.max() + 1)
    counts = np.bincount((values - values.min()).astype(np.int64),
                         minlength=len(ks))
    emp = np.cumsum(counts) / len(values)
    model = cdf(ks + 0.5)
    return float(np.abs(emp - model).max())


def fit_gaussian(batch: SampleBatch) -> LawFit:
    """Standardize X_n and measure the KS distance to the standard normal."""
    x = batch.X.astype(np.float64)
    mu = float(x.mean())
    sd = float(x.std())
    if sd == 0.0:
        raise ValueError("degenerate variance: all samples share one block count")
    ks = _ks_integer_midpoint(
        batch.X, lambda t: stats.norm.cdf((t - mu) / sd)
    )
    return LawFit(
        law="Gaussian",
        params={"mean": mu, "std": sd},
        distance=ks,
        details={
            "mean_over_n": mu / batch.n,
            "var_over_n": sd * sd / batch.n,
            "n": float(batch.n),
            "count": float(batch.count),
        },
    )


def fit_rayleigh(batch: SampleBatch) -> LawFit:
    """Fit sigma by maximum likelihood to X_n/sqrt(n) and report KS distance.

    X_n is lattice-valued, so the KS distance uses the same midpoint
    continuity correction as the Gaussian fit; the two laws are then compared
    on equal footing.
    """
    x = batch.X.astype(np.float64) / math.sqrt(batch.n)
    if not (x > 0).any():
        raise ValueError("degenerate batch: no positive block counts")
    sigma = math.sqrt(float((x**2).mean()) / 2.0)
    root_n = math.sqrt(batch.n)
    ks_stat = _ks_integer_midpoint(
        batch.X, lambda t: stats.rayleigh.cdf(t / root_n, scale=sigma)
    )
    gauss = fit_gaussian(batch)
    return LawFit(
        law="Rayleigh",
        params={"sigma": sigma},
        distance=ks_stat,
        details={
            "gaussian_ks": gauss.distance,
            "zero_fraction": float((x == 0).mean()),
            "n": float(batch.n),
            "count": float(batch.count),
        },
    )


# ---------------------------------------------------------------------------
# Export


def _provenance(params: EnergyParams, **extra) -> list[str]:
    fields = {k: getattr(params, k) for k in (
        "alpha1", "alpha2", "alpha3", "beta1", "beta2", "gamma1", "gamma2", "v", "p",
    )}
    fields.update(extra)
    return [f"# {key}={value!r}" for key, value in fields.items()]


def export_batch_csv(batch: SampleBatch, path: str | Path) -> None:
    lines = _provenance(batch.params, n=batch.n, count=batch.count, seed=batch.seed)
    lines.append("sample_id,X,G,arcs")
    for i in range(batch.count):
        lines.append(f"{i},{batch.X[i]},{float(batch.G[i])!r},{batch.arcs[i]}")
    Path(path).write_text("\n".join(lines) + "\n")


def export_histogram_csv(
    batch: SampleBatch,
    path: str | Path,
    exact: Optional[np.ndarray] = None,
    limit_law: Optional[np.ndarray] = None,
) -> None:
    kmax = int(batch.X.max())
    if exact is not None:
        kmax = max(kmax, len(exact) - 1)
    if limit_law is not None:
        kmax = max(kmax, len(limit_law) - 1)
    emp = np.bincount(batch.X, minlength=kmax + 1) / batch.count
    lines = _provenance(batch.params, n=batch.n, count=batch.count, seed=batch.seed)
    lines.append("k,empirical,exact,limit_law")
    for k in range(kmax + 1):
        ex = "" if exact is None or k >= len(exact) else repr(float(exact[k]))
        ll = "" if limit_law is None or k >= len(limit_law) else repr(float(limit_law[k]))
        lines.append(f"{k},{float(emp[k])!r},{ex},{ll}")
    Path(path).write_text("\n".join(lines) + "\n")
