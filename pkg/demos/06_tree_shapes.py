#!/usr/bin/env python3
"""Tree portraits of sampled structures in the two regimes.

Nodes are irreducible substructures, edges the nesting relation.  Subcritical
structures concentrate into few, deep trees; supercritical ones shatter into
many shallow trees — the visual counterpart of the limit-law dichotomy.
"""

import numpy as np

from rnaphase import SUBCRITICAL_PARAMS, SUPERCRITICAL_PARAMS, compute_series, to_tree
from rnaphase.sampler import sample
from rnaphase.structures import tree_to_text

N = 700
COUNT = 100

for name, params in [("subcritical", SUBCRITICAL_PARAMS),
                     ("supercritical", SUPERCRITICAL_PARAMS)]:
    series = compute_series(params, N)
    batch = sample(N, COUNT, params, seed=6, series=series, structures=True)
    roots = batch.X
    nodes = batch.arcs  # every arc is the rainbow of one irreducible
    depths = np.array(
        [max((t.depth() for t in to_tree(s)), default=0) for s in batch.structures]
    )
    print(f"{name} (n={N}, {COUNT} samples):")
    print(f"   median top-level blocks: {np.median(roots):.0f}")
    print(f"   median tree nodes:       {np.median(nodes):.0f}")
    print(f"   median max depth:        {np.median(depths):.0f}")
    sample_tree = to_tree(batch.structures[0])
    text = tree_to_text(sample_tree[:1]).splitlines()
    shown = text[:12]
    print("   first tree of sample 0 (truncated):")
    for line in shown:
        print("      " + line)
    if len(text) > len(shown):
        print(f"      ... {len(text) - len(shown)} more nodes")
    print()
