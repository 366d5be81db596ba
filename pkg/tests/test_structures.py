"""Tests for diagram validation, decompositions, trees, and dot-bracket I/O."""

import json

import pytest
from hypothesis import given, settings, strategies as st

from rnaphase.energy import Hairpin, Interior, Multi
from rnaphase.series import enumerate_structures
from rnaphase.structures import (
    StructureError,
    block_count,
    irreducible_blocks,
    loop_decomposition,
    parse_dot_bracket,
    serialize,
    to_tree,
    tree_to_json,
    tree_to_text,
    validate,
)


class TestValidate:
    def test_minimal_chord(self):
        s = validate(5, [(1, 5)])
        assert s.arcs == ((1, 5),)

    def test_short_arc(self):
        with pytest.raises(StructureError, match="short arc"):
            validate(6, [(1, 4)])

    def test_crossing(self):
        with pytest.raises(StructureError, match="crossing"):
            validate(10, [(1, 6), (4, 10)])

    def test_duplicate_vertex(self):
        with pytest.raises(StructureError, match="duplicate vertex"):
            validate(12, [(1, 6), (6, 12)])

    def test_out_of_range(self):
        with pytest.raises(StructureError, match="outside backbone"):
            validate(5, [(1, 6)])


class TestLoopDecomposition:
    def test_hairpin(self):
        loops = loop_decomposition(validate(5, [(1, 5)]))
        assert loops == [Hairpin(closing=(1, 5), ell=3)]

    def test_interior(self):
        loops = loop_decomposition(validate(9, [(1, 9), (3, 7)]))
        assert loops[0] == Interior(outer=(1, 9), inner=(3, 7), ell=2)
        assert loops[1] == Hairpin(closing=(3, 7), ell=3)

    def test_multiloop(self):
        loops = loop_decomposition(validate(14, [(1, 14), (2, 6), (8, 12)]))
        assert loops[0] == Multi(closing=(1, 14), branches=3, unpaired=2)
        assert [type(l) for l in loops[1:]] == [Hairpin, Hairpin]

    def test_every_arc_closes_one_loop(self):
        for s in enumerate_structures(12):
            loops = loop_decomposition(s)
            closings = sorted(
                l.closing if not isinstance(l, Interior) else l.outer for l in loops
            )
            assert closings == sorted(s.arcs)

    def test_unpaired_accounting(self):
        # loop unpaired + exterior unpaired + 2*arcs == n, on every diagram
        for s in enumerate_structures(11):
            loops = loop_decomposition(s)
            in_loops = sum(
                l.ell if not isinstance(l, Multi) else l.unpaired for l in loops
            )
            _, exterior = irreducible_blocks(s)
            assert in_loops + len(exterior) + 2 * len(s.arcs) == s.n


class TestBlocks:
    def test_empty(self):
        blocks, exterior = irreducible_blocks(validate(6, []))
        assert blocks == [] and exterior == [1, 2, 3, 4, 5, 6]

    def test_single_block_with_tail(self):
        blocks, exterior = irreducible_blocks(validate(7, [(1, 5)]))
        assert [(b.start, b.end) for b in blocks] == [(1, 5)]
        assert exterior == [6, 7]

    def test_two_blocks(self):
        blocks, _ = irreducible_blocks(validate(10, [(1, 5), (6, 10)]))
        assert [(b.start, b.end) for b in blocks] == [(1, 5), (6, 10)]

    def test_block_count_equals_tree_roots(self):
        for s in enumerate_structures(12):
            assert block_count(s) == len(to_tree(s))


class TestTree:
    def test_single_node(self):
        forest = to_tree(validate(5, [(1, 5)]))
        assert len(forest) == 1 and forest[0].children == []

    def test_chain(self):
        forest = to_tree(validate(9, [(1, 9), (3, 7)]))
        assert len(forest) == 1
        assert forest[0].depth() == 2
        assert forest[0].node_count() == 2

    def test_two_children(self):
        forest = to_tree(validate(14, [(1, 14), (2, 6), (8, 12)]))
        assert len(forest[0].children) == 2

    def test_text_and_json(self):
        forest = to_tree(validate(14, [(1, 14), (2, 6), (8, 12)]))
        text = tree_to_text(forest)
        assert text.splitlines()[0] == "[1, 14]"
        assert text.splitlines()[1].startswith("  ")
        doc = json.loads(tree_to_json(forest))
        assert doc["roots"][0]["interval"] == [1, 14]
        assert len(doc["roots"][0]["children"]) == 2


class TestDotBracket:
    def test_parse_simple(self):
        s = parse_dot_bracket("(...)")
        assert s.arcs == ((1, 5),)

    def test_parse_all_dots(self):
        s = parse_dot_bracket(".....")
        assert s.n == 5 and s.arcs == ()

    def test_short_arc_rejected(self):
        with pytest.raises(StructureError, match="short arc"):
            parse_dot_bracket("(..)")

    @pytest.mark.parametrize("text", ["(((", "())", "(a)"])
    def test_malformed(self, text):
        with pytest.raises(StructureError):
            parse_dot_bracket(text)

    def test_roundtrip_enumerated(self):
        for s in enumerate_structures(10):
            assert parse_dot_bracket(serialize(s)) == s

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=60, max_value=100), st.integers(min_value=0, max_value=10**6))
    def test_roundtrip_sampled(self, n, seed):
        from rnaphase.energy import SUPERCRITICAL_PARAMS
        from rnaphase.sampler import sample

        batch = sample(n, 1, SUPERCRITICAL_PARAMS, seed, structures=True)
        s = batch.structures[0]
        assert parse_dot_bracket(serialize(s)) == s
