#!/usr/bin/env python3
"""Loop scores, diagram decompositions, and the irreducible tree.

Walks through the energy model on hand-built diagrams: parses dot-bracket
strings, decomposes them into hairpin/interior/multi loops, scores each loop,
and renders the nesting forest.
"""

from rnaphase import (
    SUBCRITICAL_PARAMS,
    irreducible_blocks,
    loop_decomposition,
    parse_dot_bracket,
    structure_energy,
    structure_weight,
    to_tree,
)
from rnaphase.energy import hairpin_energy, interior_energy, multiloop_energy
from rnaphase.structures import serialize, tree_to_text

params = SUBCRITICAL_PARAMS
print("parameters:", params, "\n")

print("individual loop scores")
print("  hairpin, 3 unpaired:      ", hairpin_energy(3, params))
print("  hairpin, 4 unpaired (tetra):", hairpin_energy(4, params))
print("  stack (interior, 0 unpaired):", interior_energy(0, params))
print("  interior, 2 unpaired:     ", interior_energy(2, params))
print("  multiloop, 3 branches:    ", multiloop_energy(3, 5, params))
print()

for text in ["(...)", "((...))", "(..((...))..((....)).)", "(...)(...)..(....)"]:
    s = parse_dot_bracket(text)
    print(f"structure {serialize(s)}  (n={s.n}, {len(s.arcs)} arcs)")
    for loop in loop_decomposition(s):
        print("   ", loop, "->", round(structure_energy(s, params), 4) if False else "")
    print("    total score G =", round(structure_energy(s, params), 4))
    w = structure_weight(s, params)
    print(f"    sampling weight p^arcs * v^G = {w.to_float():.6g}")
    blocks, exterior = irreducible_blocks(s)
    print(f"    irreducible blocks: {[(b.start, b.end) for b in blocks]}, "
          f"exterior unpaired: {exterior}")
    print("    nesting forest:")
    for line in tree_to_text(to_tree(s)).splitlines():
        print("      " + line)
    print()
