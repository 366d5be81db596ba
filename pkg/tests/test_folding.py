"""Tests for full and candidate-pruned MFE folding."""

import numpy as np
import pytest

from rnaphase.energy import SUBCRITICAL_PARAMS, SUPERCRITICAL_PARAMS, structure_energy
from rnaphase.folding import (
    QUANT,
    Sequence,
    brute_force_fold,
    count_candidates_sweep,
    fold_full,
    fold_sparse,
    random_sequence,
)
from rnaphase.structures import serialize, validate


class TestSequence:
    def test_alphabet_checked(self):
        with pytest.raises(ValueError, match="non-ACGU"):
            Sequence("ACGT")

    def test_random_sequence_reproducible(self):
        a = random_sequence(50, seed=1, stream=3)
        b = random_sequence(50, seed=1, stream=3)
        assert a.text == b.text
        assert random_sequence(50, seed=2, stream=3).text != a.text


class TestFoldFull:
    def test_no_pairs_possible(self):
        r = fold_full("AAAAAAAAAA", SUBCRITICAL_PARAMS)
        assert r.structure.arcs == ()
        assert r.score == 0.0
        assert r.intervals == 0
        assert r.table_cells <= 12  # O(n) early-out, no quadratic tables

    def test_stem_loop(self):
        r = fold_full("GGGGAAAACCCC", SUBCRITICAL_PARAMS)
        assert serialize(r.structure) == "((((....))))"
        # three stacks at beta1=4 plus a tetra-loop hairpin
        assert r.score == pytest.approx(3 * 4 + 2.53)

    def test_structure_energy_matches_score(self):
        for t in range(6):
            seq = random_sequence(60, seed=77, stream=t)
            r = fold_full(seq, SUBCRITICAL_PARAMS)
            validate(r.structure.n, r.structure.arcs)
            assert structure_energy(r.structure, SUBCRITICAL_PARAMS) == \
                pytest.approx(r.score, abs=1e-9)
            assert r.score_units == round(r.score * QUANT)

    def test_empty_sequence_rejected_pairing(self):
        r = fold_full("", SUBCRITICAL_PARAMS)
        assert r.structure.n == 0 and r.score == 0.0

    @pytest.mark.parametrize("params", [SUBCRITICAL_PARAMS, SUPERCRITICAL_PARAMS])
    def test_oracle_small_n(self, params):
        """DP optimum equals exhaustive maximization on random sequences."""
        for t in range(40):
            n = 5 + (t * 7) % 12
            seq = random_sequence(n, seed=99, stream=t)
            f = fold_full(seq, params, uncapped=True)
            bf = brute_force_fold(seq, params)
            assert f.score_units == bf.score_units, seq.text
            if bf.score_units > 0:
                assert structure_energy(f.structure, params) == \
                    pytest.approx(structure_energy(bf.structure, params), abs=1e-9)

    def test_lmax_cap_binds_only_long_interiors(self):
        seq = random_sequence(80, seed=13, stream=0)
        full = fold_full(seq, SUBCRITICAL_PARAMS, lmax=30)
        uncapped = fold_full(seq, SUBCRITICAL_PARAMS, uncapped=True)
        # the cap may only lower the score
        assert full.score_units <= uncapped.score_units

    def test_uncapped_size_limit(self):
        with pytest.raises(ValueError, match="O\\(n\\^4\\)"):
            fold_full(random_sequence(200, 1), SUBCRITICAL_PARAMS, uncapped=True)


class TestFoldSparse:
    @pytest.mark.parametrize("n", [40, 90, 150])
    def test_identical_to_full(self, n):
        for t in range(3):
            seq = random_sequence(n, seed=31, stream=(n << 8) | t)
            f = fold_full(seq, SUBCRITICAL_PARAMS)
            s, stats = fold_sparse(seq, SUBCRITICAL_PARAMS)
            assert s.score_units == f.score_units
            assert s.structure == f.structure  # same arcs, not just score
            assert 0.0 <= stats.fraction_pruned <= 1.0
            assert stats.candidates <= stats.intervals

    def test_brute_force_guard(self):
        with pytest.raises(ValueError, match="refusing"):
            brute_force_fold(random_sequence(17, 1), SUBCRITICAL_PARAMS)

    def test_single_pair_decision(self):
        """One valid distant pair: paired iff the hairpin score is positive."""
        seq = "GAAAAAAAC"  # only (1, 9) can pair; hairpin ell = 7
        lo = fold_full(seq, SUBCRITICAL_PARAMS)  # alpha1 + 7*alpha2 < 0
        assert lo.structure.arcs == ()
        bonus = SUBCRITICAL_PARAMS.with_value("alpha1", 5.0)
        hi = fold_full(seq, bonus)
        assert hi.structure.arcs == ((1, 9),)
        assert hi.score == pytest.approx(5 - 0.07)


@pytest.fixture(scope="module")
def sweep():
    return count_candidates_sweep(
        [60, 120, 240], trials=3, params=SUBCRITICAL_PARAMS, seed=17,
        bootstrap=50,
    )


class TestSweep:
    def test_rows_complete(self, sweep):
        assert len(sweep.rows) == 9
        assert all(r.t_full_ms > 0 and r.t_sparse_ms > 0 for r in sweep.rows)

    def test_candidate_means_monotone(self, sweep):
        means = sweep.slopes["candidates"]["means"]
        assert means[60] < means[120] < means[240]

    def test_slope_fields(self, sweep):
        s = sweep.slopes["candidates"]
        assert s["ci_low"] <= s["slope"] <= s["ci_high"]
        assert 1.0 < s["slope"] < 2.5

    def test_wallclock_slope_superlinear(self, sweep):
        # Column-vectorized DP amortizes the cubic split loops at these sizes,
        # so wall clock grows clearly superlinearly but below the element-op
        # exponent of 3.
        assert 1.0 < sweep.slopes["t_full_ms"]["slope"] < 3.3

    def test_workers_do_not_change_counts(self):
        a = count_candidates_sweep([50, 100], 2, SUBCRITICAL_PARAMS, seed=3,
                                   bootstrap=10)
        b = count_candidates_sweep([50, 100], 2, SUBCRITICAL_PARAMS, seed=3,
                                   workers=2, bootstrap=10)
        assert [(r.n, r.trial, r.candidates, r.intervals) for r in a.rows] == \
            [(r.n, r.trial, r.candidates, r.intervals) for r in b.rows]

    def test_lengths_must_ascend(self):
        with pytest.raises(ValueError, match="ascending"):
            count_candidates_sweep([100, 50], 1, SUBCRITICAL_PARAMS, seed=1)


class TestAgnosticCrossCheck:
    @pytest.mark.parametrize("n", [8, 11, 14])
    def test_agnostic_fold_matches_diagram_enumeration(self, n):
        """All-pairs-allowed DP equals the exhaustive diagram optimum.

        This ties the folding recurrences to the same structure space the
        counting grammar enumerates, with no sequence constraint in the way.
        """
        from rnaphase.series import enumerate_structures

        best = max(
            structure_energy(s, SUBCRITICAL_PARAMS) for s in enumerate_structures(n)
        )
        r = fold_full("A" * n, SUBCRITICAL_PARAMS, uncapped=True, agnostic=True)
        assert r.score == pytest.approx(best, abs=1e-9)
