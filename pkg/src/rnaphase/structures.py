"""Secondary structures as non-crossing arc diagrams with minimum chord length 4.

Vertices are 1-indexed.  A structure decomposes left to right into maximal
intervals covered by an outermost arc (irreducible blocks, each spanned by its
own rainbow) and exterior unpaired vertices; nesting of arcs within a block
yields the irreducible tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .energy import Hairpin, Interior, Loop, Multi

__all__ = [
    "MIN_CHORD",
    "StructureError",
    "SecondaryStructure",
    "IrreducibleBlock",
    "TreeNode",
    "validate",
    "loop_decomposition",
    "irreducible_blocks",
    "block_count",
    "to_tree",
    "parse_dot_bracket",
    "serialize",
    "tree_to_text",
    "tree_to_json",
]

MIN_CHORD = 4


class StructureError(ValueError):
    """Raised when arcs violate a diagram invariant."""


@dataclass(frozen=True)
class SecondaryStructure:
    n: int
    arcs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(sorted(tuple(a) for a in self.arcs)))

    def partner(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, j in self.arcs:
            out[i] = j
            out[j] = i
        return out


@dataclass(frozen=True)
class IrreducibleBlock:
    start: int
    end: int
    arcs: tuple[tuple[int, int], ...]  # all arcs of the parent inside [start, end]


@dataclass
class TreeNode:
    """One irreducible substructure; children are the blocks nested inside it."""

    start: int
    end: int
    children: list["TreeNode"] = field(default_factory=list)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)


def validate(n: int, arcs) -> SecondaryStructure:
    """Check the three diagram invariants and return the structure.

    Reports the first violation found: a vertex in two arcs, a crossing pair,
    or an arc shorter than the minimum chord length.
    """
    arcs = sorted(tuple(a) for a in arcs)
    seen: dict[int, tuple[int, int]] = {}
    for arc in arcs:
        i, j = arc
        if not (1 <= i < j <= n):
            raise StructureError(f"arc {arc} outside backbone [1, {n}]")
        if j - i < MIN_CHORD:
            raise StructureError(f"short arc: {arc} has chord length {j - i} < {MIN_CHORD}")
        for v in (i, j):
            if v in seen:
                raise StructureError(f"duplicate vertex {v} in arcs {seen[v]} and {arc}")
            seen[v] = arc
    # arcs sorted by (i, j); a crossing shows up as i < k < j < l.
    stack: list[tuple[int, int]] = []
    for arc in arcs:
        i, j = arc
        while stack and stack[-1][1] < i:
            stack.pop()
        if stack and not (j < stack[-1][1]):
            raise StructureError(f"crossing arcs: {stack[-1]} and {arc}")
        stack.append(arc)
    return SecondaryStructure(n=n, arcs=tuple(arcs))


def _children_map(s: SecondaryStructure) -> tuple[list[tuple[int, int]], dict]:
    """Top-level arcs and the directly-nested-children map of the nesting forest."""
    roots: list[tuple[int, int]] = []
    children: dict[tuple[int, int], list[tuple[int, int]]] = {a: [] for a in s.arcs}
    stack: list[tuple[int, int]] = []
    for arc in s.arcs:  # sorted by start; nesting == containment for non-crossing arcs
        while stack and stack[-1][1] < arc[0]:
            stack.pop()
        if stack:
            children[stack[-1]].append(arc)
        else:
            roots.append(arc)
        stack.append(arc)
    return roots, children


def loop_decomposition(s: SecondaryStructure) -> list[Loop]:
    """One loop per arc: hairpin (0 nested), interior (1), or multiloop (>= 2)."""
    roots, children = _children_map(s)
    loops: list[Loop] = []
    for arc in s.arcs:
        i, j = arc
        kids = children[arc]
        inside = j - i - 1
        covered = sum(q - p + 1 for p, q in kids)
        if not kids:
            loops.append(Hairpin(closing=arc, ell=inside))
        elif len(kids) == 1:
            loops.append(Interior(outer=arc, inner=kids[0], ell=inside - covered))
        else:
            loops.append(
                Multi(closing=arc, branches=len(kids) + 1, unpaired=inside - covered)
            )
    return loops


def irreducible_blocks(s: SecondaryStructure) -> tuple[list[IrreducibleBlock], list[int]]:
    """Maximal rainbow-covered intervals plus the exterior unpaired positions.

    Every top-level arc is the rainbow of its own interval, so the blocks are
    exactly the top-level arcs in left-to-right order.
    """
    roots, _ = _children_map(s)
    blocks = []
    for a, b in roots:
        inner = tuple(arc for arc in s.arcs if a <= arc[0] and arc[1] <= b)
        blocks.append(IrreducibleBlock(start=a, end=b, arcs=inner))
    covered = set()
    for blk in blocks:
        covered.update(range(blk.start, blk.end + 1))
    exterior = [v for v in range(1, s.n + 1) if v not in covered]
    return blocks, exterior


def block_count(s: SecondaryStructure) -> int:
    """X(s): the number of irreducible blocks."""
    roots, _ = _children_map(s)
    return len(roots)


def to_tree(s: SecondaryStructure) -> list[TreeNode]:
    """Irreducible forest: one root per block, children = blocks nested inside."""
    roots, children = _children_map(s)

    def build(arc: tuple[int, int]) -> TreeNode:
        return TreeNode(start=arc[0], end=arc[1],
                        children=[build(c) for c in children[arc]])

    return [build(r) for r in roots]


def parse_dot_bracket(text: str) -> SecondaryStructure:
    """Parse a dot-bracket string; rejects unbalanced or short-arc input."""
    text = text.strip()
    arcs = []
    stack = []
    for pos, ch in enumerate(text, start=1):
        if ch == "(":
            stack.append(pos)
        elif ch == ")":
            if not stack:
                raise StructureError(f"unbalanced ')' at position {pos}")
            arcs.append((stack.pop(), pos))
        elif ch != ".":
            raise StructureError(f"unexpected character {ch!r} at position {pos}")
    if stack:
        raise StructureError(f"unbalanced '(' at position {stack[-1]}")
    return validate(len(text), arcs)


def serialize(s: SecondaryStructure) -> str:
    chars = ["."] * s.n
    for i, j in s.arcs:
        chars[i - 1] = "("
        chars[j - 1] = ")"
    return "".join(chars)


def tree_to_text(forest: list[TreeNode]) -> str:
    """Indented text rendering of the irreducible forest."""
    lines: list[str] = []

    def walk(node: TreeNode, depth: int) -> None:
        lines.append("  " * depth + f"[{node.start}, {node.end}]")
        for child in node.children:
            walk(child, depth + 1)

    for root in forest:
        walk(root, 0)
    return "\n".join(lines)


def tree_to_json(forest: list[TreeNode]) -> str:
    """JSON adjacency document (node = interval, children array)."""

    def as_dict(node: TreeNode) -> dict:
        return {
            "interval": [node.start, node.end],
            "children": [as_dict(c) for c in node.children],
        }

    return json.dumps({"roots": [as_dict(r) for r in forest]}, indent=2, sort_keys=True)
