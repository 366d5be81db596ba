"""Loop-based combinatorial energy model for RNA secondary structures.

Scores depend only on the diagram (loop types and sizes), never on the
nucleotides.  Sign convention used throughout the package: positive scores are
favorable, weights are v**G with v > 1, so "minimum free energy" means the
structure maximizing G.

The three loop scores:

    hairpin   G = alpha1 + alpha2 * ell        (ell unpaired; at ell == 4 the
                                                 tetra-loop score alpha3
                                                 replaces 4*alpha2)
    interior  G = beta1 + beta2 * ell          (ell = total unpaired; ell == 0
                                                 is the helix/stack case)
    multiloop G = gamma1 + B * gamma2          (B = branches incl. closing
                                                 pair; unpaired bases free)

A structure's weight for sampling is p**arcs * v**G, with p the probability
that a uniformly random ordered nucleotide pair can bond (6/16 by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING, Union

from .scaled import ScaledReal

if TYPE_CHECKING:
    from .structures import SecondaryStructure

__all__ = [
    "DEFAULT_V",
    "DEFAULT_P",
    "SUBCRITICAL_PARAMS",
    "SUPERCRITICAL_PARAMS",
    "EnergyParams",
    "Hairpin",
    "Interior",
    "Multi",
    "Loop",
    "ParamFileError",
    "hairpin_energy",
    "interior_energy",
    "multiloop_energy",
    "structure_energy",
    "structure_weight",
    "read_params_file",
    "write_params_file",
]

DEFAULT_V = 1.843868184  # e**(1/RT) for the model's (dimensionless) RT
DEFAULT_P = 6.0 / 16.0  # 6 bondable ordered pairs out of 16


class ParamFileError(ValueError):
    """Malformed or inconsistent parameter file / parameter set."""


@dataclass(frozen=True)
class EnergyParams:
    """The seven loop scores plus the weight bases v and p.

    Attributes:
        alpha1: hairpin formation score (penalty when negative)
        alpha2: per-unpaired-base score inside a hairpin
        alpha3: tetra-loop score, replacing 4*alpha2 at 4 unpaired bases
        beta1: interior-loop (incl. helix/stack) closing score
        beta2: per-unpaired-base score inside an interior loop
        gamma1: multiloop formation score
        gamma2: per-branch score (closing pair included in the branch count)
        v: weight base, must exceed 1
        p: per-arc pair weight in (0, 1]
    """

    alpha1: float
    alpha2: float
    alpha3: float
    beta1: float
    beta2: float
    gamma1: float
    gamma2: float
    v: float = DEFAULT_V
    p: float = DEFAULT_P

    def __post_init__(self):
        if not self.v > 1.0:
            raise ParamFileError(f"v must exceed 1 (got v={self.v}); weights are v**G")
        if not 0.0 < self.p <= 1.0:
            raise ParamFileError(f"p must lie in (0, 1] (got p={self.p})")
        # The positivity argument behind the series analysis needs
        # v**(4*alpha2) < v**alpha3, i.e. a genuine tetra-loop bonus.
        if not self.alpha2 < 0.0:
            raise ParamFileError(
                f"alpha2 must be negative (got {self.alpha2}): the unpaired-base "
                "score must be a penalty for the weighted series to converge"
            )
        if not self.alpha3 > 0.0:
            raise ParamFileError(
                f"alpha3 must be positive (got {self.alpha3}): the tetra-loop "
                "correction must outweigh 4*alpha2 for coefficient positivity"
            )

    @property
    def log2_v(self) -> float:
        return math.log2(self.v)

    @property
    def log2_p(self) -> float:
        return math.log2(self.p)

    def with_value(self, name: str, value: float) -> "EnergyParams":
        """Copy with one named parameter replaced (used by the critical tuner)."""
        if name not in _PARAM_KEYS:
            raise ParamFileError(f"unknown parameter {name!r}")
        return replace(self, **{name: value})


SUBCRITICAL_PARAMS = EnergyParams(
    alpha1=-5.0, alpha2=-0.01, alpha3=7.53, beta1=4.0, beta2=-1.0,
    gamma1=-3.4, gamma2=-0.6,
)

SUPERCRITICAL_PARAMS = EnergyParams(
    alpha1=-5.0, alpha2=-0.01, alpha3=7.53, beta1=2.0, beta2=-1.0,
    gamma1=-10.0, gamma2=-3.0,
)


@dataclass(frozen=True)
class Hairpin:
    closing: tuple[int, int]
    ell: int  # unpaired bases inside the closing arc


@dataclass(frozen=True)
class Interior:
    outer: tuple[int, int]
    inner: tuple[int, int]
    ell: int  # total unpaired bases (left + right of the inner arc)


@dataclass(frozen=True)
class Multi:
    closing: tuple[int, int]
    branches: int  # B, including the closing pair
    unpaired: int  # U, scored at zero


Loop = Union[Hairpin, Interior, Multi]


def hairpin_energy(ell: int, params: EnergyParams) -> float:
    """Score of a hairpin with ``ell`` unpaired bases (tetra-loop at ell == 4)."""
    if ell < 3:
        raise ValueError(f"hairpin below minimum chord length: ell={ell} < 3")
    if ell == 4:
        return params.alpha1 + params.alpha3
    return params.alpha1 + params.alpha2 * ell


def interior_energy(ell: int, params: EnergyParams) -> float:
    """Score of an interior loop with ``ell`` total unpaired bases (0 = stack)."""
    if ell < 0:
        raise ValueError(f"interior loop unpaired count cannot be negative: {ell}")
    return params.beta1 + params.beta2 * ell


def multiloop_energy(branches: int, unpaired: int, params: EnergyParams) -> float:
    """Score of a multiloop with ``branches`` pairs (incl. closing); unpaired free."""
    if branches < 3:
        raise ValueError(
            f"multiloop requires at least two inner branches: B={branches} < 3"
        )
    if unpaired < 0:
        raise ValueError(f"multiloop unpaired count cannot be negative: {unpaired}")
    return params.gamma1 + branches * params.gamma2


def loop_energy(loop: Loop, params: EnergyParams) -> float:
    if isinstance(loop, Hairpin):
        return hairpin_energy(loop.ell, params)
    if isinstance(loop, Interior):
        return interior_energy(loop.ell, params)
    return multiloop_energy(loop.branches, loop.unpaired, params)


def structure_energy(s: "SecondaryStructure", params: EnergyParams) -> float:
    """Total score: sum over the loop decomposition; exterior bases contribute 0."""
    from .structures import loop_decomposition

    return sum(loop_energy(loop, params) for loop in loop_decomposition(s))


def structure_weight(s: "SecondaryStructure", params: EnergyParams) -> ScaledReal:
    """Sampling weight p**arcs * v**G as a scaled real (always positive)."""
    g = structure_energy(s, params)
    log2_w = len(s.arcs) * params.log2_p + g * params.log2_v
    return ScaledReal.from_log2(log2_w)


_PARAM_KEYS = (
    "alpha1", "alpha2", "alpha3", "beta1", "beta2", "gamma1", "gamma2", "v", "p",
)
_REQUIRED_KEYS = _PARAM_KEYS[:7]


def read_params_file(path: str | Path) -> EnergyParams:
    """Parse a key=value parameter file; missing v/p fall back to the defaults."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParamFileError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _PARAM_KEYS:
            raise ParamFileError(f"{path}:{lineno}: unknown parameter {key!r}")
        if key in values:
            raise ParamFileError(f"{path}:{lineno}: duplicate parameter {key!r}")
        try:
            values[key] = float(val.strip())
        except ValueError as exc:
            raise ParamFileError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    missing = [k for k in _REQUIRED_KEYS if k not in values]
    if missing:
        raise ParamFileError(f"{path}: missing parameters: {', '.join(missing)}")
    try:
        return EnergyParams(**values)
    except ParamFileError as exc:
        raise ParamFileError(f"{path}: {exc}") from exc


def write_params_file(params: EnergyParams, path: str | Path) -> None:
    """Write key=value lines; float repr round-trips bit-exactly."""
    lines = [f"{key}={getattr(params, key)!r}" for key in _PARAM_KEYS]
    Path(path).write_text("\n".join(lines) + "\n")
