"""Combinatorial energy model for RNA secondary structures.

Weighted counting of structures and their irreducible blocks, singularity
analysis of the parameter-dependent phase transition, exact Boltzmann
sampling of the three limit laws, and sparsified vs. full MFE folding
benchmarks.
"""

from .energy import (
    DEFAULT_P,
    DEFAULT_V,
    SUBCRITICAL_PARAMS,
    SUPERCRITICAL_PARAMS,
    EnergyParams,
    Hairpin,
    Interior,
    Multi,
    hairpin_energy,
    interior_energy,
    multiloop_energy,
    read_params_file,
    structure_energy,
    structure_weight,
    write_params_file,
)
from .scaled import ScaledArray, ScaledReal
from .series import (
    WeightedSeries,
    brute_force_enumerate,
    compute_series,
    enumerate_structures,
    ratio_trace,
)
from .structures import (
    SecondaryStructure,
    StructureError,
    block_count,
    irreducible_blocks,
    loop_decomposition,
    parse_dot_bracket,
    serialize,
    to_tree,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_P",
    "DEFAULT_V",
    "SUBCRITICAL_PARAMS",
    "SUPERCRITICAL_PARAMS",
    "EnergyParams",
    "Hairpin",
    "Interior",
    "Multi",
    "ScaledArray",
    "ScaledReal",
    "SecondaryStructure",
    "StructureError",
    "WeightedSeries",
    "block_count",
    "brute_force_enumerate",
    "compute_series",
    "enumerate_structures",
    "hairpin_energy",
    "interior_energy",
    "irreducible_blocks",
    "loop_decomposition",
    "multiloop_energy",
    "parse_dot_bracket",
    "ratio_trace",
    "read_params_file",
    "serialize",
    "structure_energy",
    "structure_weight",
    "to_tree",
    "validate",
    "write_params_file",
]
