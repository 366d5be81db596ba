"""End-to-end tests of the command-line interface."""

import json

import pytest

from rnaphase.cli import main
from rnaphase.energy import SUBCRITICAL_PARAMS, write_params_file


def run(argv):
    return main(argv)


class TestCount:
    def test_count_csv_row_count(self, tmp_path, capsys):
        out = tmp_path / "series.csv"
        assert run(["count", "--preset", "subcritical", "--nmax", "40",
                    "--out", str(out)]) == 0
        body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert len(body) == 42  # header + nmax+1 rows

    def test_default_v_p_in_header(self, tmp_path):
        out = tmp_path / "series.csv"
        run(["count", "--preset", "supercritical", "--nmax", "10", "--out", str(out)])
        header = out.read_text()
        assert "# v=1.843868184" in header
        assert "# p=0.375" in header

    def test_oracle_check(self, tmp_path, capsys):
        out = tmp_path / "series.csv"
        assert run(["count", "--preset", "subcritical", "--nmax", "14",
                    "--out", str(out), "--oracle-check", "10"]) == 0
        report = (tmp_path / "series.oracle.csv").read_text().splitlines()
        assert report[0] == "n,S_rel_err,C_rel_err"
        worst = max(float(x) for ln in report[1:] for x in ln.split(",")[1:])
        assert worst < 1e-9

    def test_params_file(self, tmp_path):
        pfile = tmp_path / "p.params"
        write_params_file(SUBCRITICAL_PARAMS, pfile)
        out = tmp_path / "series.csv"
        assert run(["count", "--params", str(pfile), "--nmax", "8",
                    "--out", str(out)]) == 0

    def test_missing_params_is_config_error(self, tmp_path, capsys):
        assert run(["count", "--nmax", "5", "--out", str(tmp_path / "x.csv")]) == 2
        assert "error:" in capsys.readouterr().err


class TestClassify:
    def test_subcritical(self, capsys):
        assert run(["classify", "--preset", "subcritical"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["regime"] == "Subcritical"

    def test_supercritical(self, capsys):
        assert run(["classify", "--preset", "supercritical"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["regime"] == "Supercritical"

    def test_tune_writes_params(self, tmp_path, capsys):
        tuned = tmp_path / "critical.params"
        assert run(["classify", "--preset", "subcritical", "--tune", "gamma1",
                    "--bracket", "-10", "-3.4", "--tuned-out", str(tuned)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["regime"] == "Critical"
        assert abs(doc["gap"]) < 1e-10
        assert run(["classify", "--params", str(tuned)]) == 0
        doc2 = json.loads(capsys.readouterr().out)
        assert doc2["regime"] == "Critical"

    def test_tune_subcommand(self, tmp_path, capsys):
        assert run(["tune", "--preset", "subcritical", "gamma1",
                    "--bracket", "-10", "-3.4"]) == 0
        assert json.loads(capsys.readouterr().out)["regime"] == "Critical"

    def test_bad_bracket_exit_code(self, capsys):
        # a non-straddling bracket is user input, hence a config error
        assert run(["tune", "--preset", "subcritical", "gamma1",
                    "--bracket", "-4", "-3.4"]) == 2
        assert "straddle" in capsys.readouterr().err


class TestSample:
    def test_artifacts_written(self, tmp_path, capsys):
        prefix = tmp_path / "run"
        assert run(["sample", "--preset", "supercritical", "--n", "80",
                    "--count", "500", "--seed", "3",
                    "--out-prefix", str(prefix), "--exact-pmf"]) == 0
        batch = (tmp_path / "run.batch.csv").read_text().splitlines()
        assert "# seed=3" in batch
        assert len([ln for ln in batch if not ln.startswith("#")]) == 501
        fit = json.loads((tmp_path / "run.lawfit.json").read_text())
        assert fit["law"] == "Gaussian"
        hist = (tmp_path / "run.hist.csv").read_text().splitlines()
        assert [ln for ln in hist if not ln.startswith("#")][0] == \
            "k,empirical,exact,limit_law"

    def test_byte_identical_across_runs_and_threads(self, tmp_path):
        outs = []
        for name, threads in (("a", "1"), ("b", "4")):
            prefix = tmp_path / name
            assert run(["--threads", threads, "sample", "--preset", "subcritical",
                        "--n", "60", "--count", "400", "--seed", "9",
                        "--out-prefix", str(prefix), "--law", "discrete"]) == 0
            outs.append((tmp_path / f"{name}.batch.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_law_auto_dispatch(self, tmp_path):
        prefix = tmp_path / "auto"
        assert run(["sample", "--preset", "subcritical", "--n", "60",
                    "--count", "300", "--seed", "1",
                    "--out-prefix", str(prefix)]) == 0
        fit = json.loads((tmp_path / "auto.lawfit.json").read_text())
        assert fit["law"] == "DiscreteLimit"


class TestFold:
    def test_fold_prints_dot_bracket(self, capsys):
        assert run(["fold", "--preset", "subcritical",
                    "--seq", "GGGGAAAACCCC"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "((((....))))"
        assert out[1].startswith("score: 14.53")

    def test_sparse_matches_default(self, capsys):
        argv = ["fold", "--preset", "subcritical", "--seq",
                "GGCGCAAAAAGCGCCAAAGGGCAAAACCCGA", "--json"]
        assert run(argv) == 0
        full = json.loads(capsys.readouterr().out)
        assert run(argv + ["--sparse"]) == 0
        sparse = json.loads(capsys.readouterr().out)
        assert sparse["score"] == full["score"]
        assert sparse["dot_bracket"] == full["dot_bracket"]

    def test_fasta_input(self, tmp_path, capsys):
        fasta = tmp_path / "seq.fa"
        fasta.write_text(">test\nGGGG\nAAAACCCC\n")
        assert run(["fold", "--preset", "subcritical", "--fasta", str(fasta)]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "((((....))))"

    def test_bad_sequence(self, capsys):
        assert run(["fold", "--preset", "subcritical", "--seq", "GGXX"]) == 2


class TestBench:
    def test_sweep_artifacts(self, tmp_path):
        prefix = tmp_path / "sweep"
        assert run(["bench", "--preset", "supercritical", "--lengths", "40,80",
                    "--trials", "2", "--seed", "7",
                    "--out-prefix", str(prefix)]) == 0
        sweep = (tmp_path / "sweep.sweep.csv").read_text().splitlines()
        header = [ln for ln in sweep if not ln.startswith("#")][0]
        assert header == \
            "n,trial,candidates,intervals,t_full_ms,t_sparse_ms,cells_full,cells_sparse"
        slopes = json.loads((tmp_path / "sweep.slopes.json").read_text())
        assert "candidates" in slopes

    def test_counts_csv_byte_identical(self, tmp_path):
        blobs = []
        for name, threads in (("s1", "1"), ("s2", "3")):
            prefix = tmp_path / name
            assert run(["--threads", threads, "bench", "--preset", "subcritical",
                        "--lengths", "40,80", "--trials", "2", "--seed", "5",
                        "--out-prefix", str(prefix)]) == 0
            blobs.append((tmp_path / f"{name}.counts.csv").read_bytes())
        assert blobs[0] == blobs[1]


class TestTree:
    def test_single_hairpin(self, capsys):
        assert run(["tree", "(....)"]) == 0
        assert capsys.readouterr().out.strip() == "[1, 6]"

    def test_json_output(self, capsys):
        assert run(["tree", "--json", "((((....))))"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["roots"][0]["interval"] == [1, 12]

    def test_invalid_input_exit_2(self, capsys):
        assert run(["tree", "((..)"]) == 2

    def test_sampled_tree_stats(self, capsys):
        assert run(["tree", "--preset", "supercritical", "--sample-n", "150",
                    "--count", "40", "--seed", "2"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["median_nodes"] > 0
        assert doc["median_depth"] >= 1

    def test_regime_tree_shapes_differ(self, capsys):
        """Subcritical trees are few and deep, supercritical many and shallow."""
        stats = {}
        for preset in ("subcritical", "supercritical"):
            assert run(["tree", "--preset", preset, "--sample-n", "400",
                        "--count", "60", "--seed", "4"]) == 0
            stats[preset] = json.loads(capsys.readouterr().out)
        assert stats["subcritical"]["mean_blocks"] < stats["supercritical"]["mean_blocks"]
        assert stats["subcritical"]["median_depth"] > 2 * stats["supercritical"]["median_depth"]
