"""Dominant-singularity analysis and regime classification.

The irreducible-structure series w = C(z) satisfies a quadratic
w2(z) w^2 + w1(z) w + w0(z) = 0 whose coefficients are polynomials in z with
v**score factors.  The branch point rho_r of the discriminant is the radius
of convergence of C; the root rho_p of 1 - z - C(z) = 0 (when it exists at or
before rho_r) is the radius of the full series S.  The composition value
tau_h = C(rho_r) / (1 - rho_r) classifies the regime:

    tau_h < 1   subcritical   (rho_s = rho_r, discrete limit law)
    tau_h > 1   supercritical (rho_s = rho_p < rho_r, Gaussian limit law)
    tau_h = 1   critical      (rho_s = rho_p = rho_r, Rayleigh local law)

All roots are found by sign-change scans plus bisection; every reported root
carries its bracket and residual.  rho_d (the root of w2, a removable
singularity of the closed form) is computed only as a diagnostic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .energy import EnergyParams
from .series import compute_series

__all__ = [
    "WPolynomials",
    "Root",
    "RegimeReport",
    "SingularityError",
    "eval_C_closed",
    "find_rho_r",
    "find_rho_d",
    "find_rho_p",
    "classify",
    "tune_to_critical",
]

SCAN_STEP = 1e-4
BISECT_RTOL = 1e-12
CRITICAL_TOL = 1e-8
TUNE_GAP_TOL = 1e-10
# The closed form carries sqrt(disc) noise of ~1e-7 relative near the branch
# point, so the tau_h-vs-rho_p agreement check is only meaningful outside it.
CROSS_CHECK_FLOOR = 1e-6


class SingularityError(RuntimeError):
    """Root finding or branch selection failed for this parameter set."""


@dataclass(frozen=True)
class Root:
    value: float
    bracket: tuple[float, float]
    residual: float  # |f(root)| relative to the local scale of f's terms


class WPolynomials:
    """Evaluator for (w0, w1, w2, disc) on (0, 1).

    The coefficients are those obtained by clearing denominators in the
    grammar's closed form; the conventional overall factor 16 (and 16*p where
    the pair weight enters) reproduces the printed integer coefficients at
    p = 6/16.
    """

    def __init__(self, params: EnergyParams):
        self.params = params
        v = params.v
        self._va2 = v**params.alpha2
        self._vb2 = v**params.beta2
        self._c_pair = 16.0 * params.p  # 6 at the default p
        self._vg2 = v**params.gamma2
        self._vg13 = v ** (params.gamma1 + 3.0 * params.gamma2)
        self._vb1g2 = v ** (params.beta1 + params.gamma2)
        self._vb1 = v**params.beta1
        self._va1g2a2 = v ** (params.alpha1 + params.gamma2 + 3.0 * params.alpha2)
        self._va1g2 = v ** (params.alpha1 + params.gamma2)
        self._tetra = v ** (4.0 * params.alpha2) - v**params.alpha3  # negative
        self._va1 = v**params.alpha1
        self._va23 = v ** (3.0 * params.alpha2)

    def coefficients(self, z: float) -> tuple[float, float, float]:
        c6 = self._c_pair
        d = 1.0 - z
        a = 1.0 - z * self._va2
        b2 = (1.0 - z * self._vb2) ** 2
        z2 = z * z
        w2 = (16.0 * self._vg2 * d**2 + c6 * z2 * self._vg13) * a * b2 \
            - c6 * z2 * self._vb1g2 * d**2 * a
        w1 = c6 * z2 * self._vb1 * d**3 * a \
            - c6 * self._va1g2a2 * z**5 * b2 * d**2 \
            + c6 * z**6 * self._va1g2 * self._tetra * d**2 * a * b2 \
            - 16.0 * d**3 * a * b2
        w0 = c6 * self._va1 * z**5 * d**3 * b2 * (self._va23 - z * self._tetra * a)
        return w0, w1, w2

    def disc(self, z: float) -> float:
        w0, w1, w2 = self.coefficients(z)
        return w1 * w1 - 4.0 * w2 * w0

    def disc_scale(self, z: float) -> float:
        """Magnitude scale of the discriminant's constituents at z."""
        w0, w1, w2 = self.coefficients(z)
        return max(w1 * w1, abs(4.0 * w2 * w0), 1e-300)

    def eval_grid(self, n: int = 10_000) -> np.ndarray:
        return np.linspace(0.0, 1.0, n + 2)[1:-1]


def _bisect(f: Callable[[float], float], lo: float, hi: float,
            rtol: float = BISECT_RTOL) -> tuple[float, tuple[float, float]]:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo, (lo, lo)
    if fhi == 0.0:
        return hi, (hi, hi)
    if (flo > 0) == (fhi > 0):
        raise SingularityError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid, (lo, hi)
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return 0.5 * (lo + hi), (lo, hi)


def _first_sign_change(f: Callable[[float], float], step: float) -> Optional[tuple[float, float]]:
    zs = np.arange(step, 1.0, step)
    prev_z, prev_f = zs[0], f(zs[0])
    for z in zs[1:]:
        fz = f(z)
        if (fz > 0) != (prev_f > 0) or fz == 0.0:
            return prev_z, z
        prev_z, prev_f = z, fz
    return None


def find_rho_r(params: EnergyParams, step: float = SCAN_STEP) -> Root:
    """Smallest z in (0,1) where the discriminant changes sign (odd-order root)."""
    w = WPolynomials(params)
    bracket = _first_sign_change(w.disc, step)
    if bracket is None:
        raise SingularityError(
            "no branch point in unit interval: the discriminant does not change "
            "sign on (0, 1) for this parameter set"
        )
    root, brk = _bisect(w.disc, *bracket)
    residual = abs(w.disc(root)) / w.disc_scale(root)
    return Root(value=root, bracket=brk, residual=residual)


def find_rho_d(params: EnergyParams, step: float = SCAN_STEP) -> Optional[Root]:
    """Minimum positive root of w2 in (0,1), if any (diagnostic only)."""
    w = WPolynomials(params)

    def w2(z: float) -> float:
        return w.coefficients(z)[2]

    bracket = _first_sign_change(w2, step)
    if bracket is None:
        return None
    root, brk = _bisect(w2, *bracket)
    w0, w1, _ = w.coefficients(root)
    scale = max(abs(w0), abs(w1), abs(w2(bracket[0])), 1e-300)
    return Root(value=root, bracket=brk, residual=abs(w2(root)) / scale)


class _ClosedFormC:
    """Branch-validated evaluator of the closed-form irreducible series.

    Both quadratic-formula branches are compared against the truncated series
    at rho_r / 2 at construction; evaluation then uses the rationalized form
    of the selected branch (2*w0 / (-w1 -+ sqrt(disc))), which stays stable
    across the removable w2 = 0 point.
    """

    SERIES_TERMS = 40
    MATCH_RTOL = 1e-8

    def __init__(self, params: EnergyParams, rho_r: float):
        self.w = WPolynomials(params)
        self.rho_r = rho_r
        series = compute_series(params, self.SERIES_TERMS)
        z0 = rho_r / 2.0
        coeffs = series.C.to_floats()
        ref = float(np.polyval(coeffs[::-1], z0))
        minus = self._branch_value(z0, +1.0)  # 2 w0 / (-w1 + sqrt(d))
        plus = self._branch_value(z0, -1.0)  # 2 w0 / (-w1 - sqrt(d))
        err_minus = abs(minus - ref) / max(abs(ref), 1e-300)
        err_plus = abs(plus - ref) / max(abs(ref), 1e-300)
        if min(err_minus, err_plus) > self.MATCH_RTOL:
            raise SingularityError(
                f"branch validation failure at z={z0}: series {ref}, "
                f"candidates {minus} / {plus}"
            )
        self.sign = +1.0 if err_minus <= err_plus else -1.0

    def _branch_value(self, z: float, sign: float) -> float:
        w0, w1, w2 = self.w.coefficients(z)
        d = w1 * w1 - 4.0 * w2 * w0
        if d < 0.0:
            # Roundoff makes disc dip below zero right at the branch point.
            if abs(d) <= 1e-9 * self.w.disc_scale(z):
                d = 0.0
            else:
                raise SingularityError(f"past branch point: disc({z}) < 0")
        denom = -w1 + sign * math.sqrt(d)
        if denom == 0.0:
            raise SingularityError(f"degenerate branch denominator at z={z}")
        return 2.0 * w0 / denom

    def __call__(self, z: float) -> float:
        if not 0.0 < z <= self.rho_r * (1.0 + 1e-12):
            raise SingularityError(f"z={z} outside (0, rho_r={self.rho_r}]")
        return self._branch_value(min(z, self.rho_r), self.sign)


def eval_C_closed(z: float, params: EnergyParams,
                  rho_r: Optional[float] = None) -> float:
    """Closed-form C(z) on (0, rho_r], branch selected by series agreement."""
    if rho_r is None:
        rho_r = find_rho_r(params).value
    return _ClosedFormC(params, rho_r)(z)


def find_rho_p(params: EnergyParams, rho_r: Optional[float] = None) -> Optional[Root]:
    """Unique root of 1 - z - C(z) in (0, rho_r], or None when F(rho_r) > 0.

    F is strictly decreasing on the interval (C has positive coefficients), so
    a sign check at rho_r decides existence and bisection is safe.
    """
    if rho_r is None:
        rho_r = find_rho_r(params).value
    cf = _ClosedFormC(params, rho_r)

    def f(z: float) -> float:
        return 1.0 - z - cf(z)

    f_at_r = f(rho_r)
    if f_at_r > 0.0:
        return None
    lo = rho_r * 1e-6
    if f(lo) <= 0.0:
        raise SingularityError("1 - z - C(z) not positive near 0; bad parameter set")
    root, brk = _bisect(f, lo, rho_r, rtol=1e-14)
    # Simple-root certificate: F' < 0 (central difference around the root).
    h = max(root * 1e-7, 1e-12)
    hi_pt = min(root + h, rho_r)
    slope = (f(hi_pt) - f(root - h)) / (hi_pt - (root - h))
    if not slope < 0.0:
        raise SingularityError(f"rho_p root at {root} is not simple (F' = {slope})")
    return Root(value=root, bracket=brk, residual=abs(f(root)))


@dataclass
class RegimeReport:
    """Roots, the criticality gap, and the resulting regime label."""

    params: EnergyParams
    rho_r: Root
    rho_d: Optional[Root]
    rho_p: Optional[Root]
    rho_c: float
    rho_s: float
    tau_h: float
    gap: float
    regime: str  # "Subcritical" | "Supercritical" | "Critical"
    tol: float
    C_at_rho_r: float
    w0_positive_on_grid: bool = True
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "params": {k: getattr(self.params, k) for k in (
                "alpha1", "alpha2", "alpha3", "beta1", "beta2",
                "gamma1", "gamma2", "v", "p")},
            "rho_r": _root_dict(self.rho_r),
            "rho_d": _root_dict(self.rho_d),
            "rho_p": _root_dict(self.rho_p),
            "rho_c": self.rho_c,
            "rho_s": self.rho_s,
            "tau_h": self.tau_h,
            "gap": self.gap,
            "regime": self.regime,
            "tol": self.tol,
            "C_at_rho_r": self.C_at_rho_r,
            "w0_positive_on_grid": self.w0_positive_on_grid,
            "notes": self.notes,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _root_dict(root: Optional[Root]):
    if root is None:
        return None
    return {"value": root.value, "bracket": list(root.bracket), "residual": root.residual}


def classify(params: EnergyParams, tol: float = CRITICAL_TOL) -> RegimeReport:
    """Label the parameter set by the sign of gap = tau_h - 1.

    The tau_h test and the existence of rho_p must agree; disagreement means a
    root finder failed and raises rather than guessing.
    """
    w = WPolynomials(params)
    grid = w.eval_grid()
    w0_vals = w.coefficients(grid)[0]  # coefficients() broadcasts over arrays
    w0_ok = bool((w0_vals > 0).all())

    rho_r = find_rho_r(params)
    rho_d = find_rho_d(params)
    w0r, w1r, w2r = w.coefficients(rho_r.value)
    c_at_r = -w1r / (2.0 * w2r)
    tau_h = c_at_r / (1.0 - rho_r.value)
    gap = tau_h - 1.0

    rho_p = find_rho_p(params, rho_r.value)
    if gap < -tol:
        regime = "Subcritical"
    elif gap > tol:
        regime = "Supercritical"
    else:
        regime = "Critical"
    if abs(gap) > CROSS_CHECK_FLOOR and (gap < 0) != (rho_p is None):
        raise SingularityError(
            f"inconsistent classification: gap={gap} but rho_p="
            f"{None if rho_p is None else rho_p.value} (root finding failure)"
        )

    rho_s = rho_r.value if rho_p is None else rho_p.value
    notes = []
    if rho_d is not None and rho_d.value < rho_r.value:
        cf = _ClosedFormC(params, rho_r.value)
        lim = -w.coefficients(rho_d.value)[0] / w.coefficients(rho_d.value)[1]
        eps = rho_d.value * 1e-6
        jump = max(abs(cf(rho_d.value - eps) - lim), abs(cf(rho_d.value + eps) - lim))
        notes.append(f"rho_d={rho_d.value} removable (closed form within {jump} of -w0/w1)")

    return RegimeReport(
        params=params, rho_r=rho_r, rho_d=rho_d, rho_p=rho_p,
        rho_c=rho_r.value, rho_s=rho_s, tau_h=tau_h, gap=gap, regime=regime,
        tol=tol, C_at_rho_r=c_at_r, w0_positive_on_grid=w0_ok, notes=notes,
    )


def tune_to_critical(
    params: EnergyParams,
    free_param: str,
    bracket: tuple[float, float],
    gap_tol: float = TUNE_GAP_TOL,
    max_iter: int = 200,
) -> tuple[EnergyParams, RegimeReport]:
    """Bisect one named parameter until |tau_h - 1| < gap_tol.

    The bracket endpoints must straddle the transition; the gap is checked to
    be monotone along the bisection path and the bracket is rejected outright
    if it is not.
    """

    def gap_at(value: float) -> float:
        return classify(params.with_value(free_param, value), tol=0.0).gap

    lo, hi = bracket
    glo, ghi = gap_at(lo), gap_at(hi)
    if glo == 0.0 or ghi == 0.0:
        winner = lo if glo == 0.0 else hi
        tuned = params.with_value(free_param, winner)
        return tuned, classify(tuned)
    if (glo > 0) == (ghi > 0):
        # user-supplied bracket, not a solver failure
        raise ValueError(
            f"bracket does not straddle the transition: gap({free_param}={lo}) = "
            f"{glo}, gap({free_param}={hi}) = {ghi}"
        )
    prev_gap_lo, prev_gap_hi = glo, ghi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        gmid = gap_at(mid)
        if abs(gmid) < gap_tol:
            tuned = params.with_value(free_param, mid)
            return tuned, classify(tuned)
        # Monotonicity of the gap along the path: the mid value must lie
        # between the current endpoint gaps.
        if not (min(prev_gap_lo, prev_gap_hi) <= gmid <= max(prev_gap_lo, prev_gap_hi)):
            raise SingularityError(
                f"gap is not monotone on the bracket near {free_param}={mid}; "
                "bracket rejected"
            )
        if (gmid > 0) == (prev_gap_lo > 0):
            lo, prev_gap_lo = mid, gmid
        else:
            hi, prev_gap_hi = mid, gmid
    raise SingularityError(
        f"tuner did not reach |gap| < {gap_tol} in {max_iter} bisections "
        f"(best bracket [{lo}, {hi}])"
    )
