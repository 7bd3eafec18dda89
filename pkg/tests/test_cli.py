"""Command-line tests driven through click's CliRunner"""

import json

import pytest
import yaml
from click.testing import CliRunner

from entropy_clustering import __version__
from entropy_clustering.cli import cli

TRIANGLE = "0,0\n1,0\n0.5,0.8660254\n"
LINE = "0\n10\n20\n30\n"
BLOBS = "0,0,0\n0.5,0,0\n0,0.5,0\n10,10,1\n10.5,10,1\n10,10.5,1\n"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write


class TestPartitionCommand:

    def test_triangle(self, runner, write, tmp_path):
        """Test a plain flag run writes the report and the tree"""
        out = tmp_path / "out"
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-p", "2", "-o", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads((out / "partition.json").read_text())
        assert report["n"] == 3 and report["p"] == 2
        assert report["n_modules"] == 2
        assert len(report["assignments"]) == 3
        assert report["metrics"] == {}
        assert report["config"]["graph"]["p"] == 2
        assert (out / "partition_tree.nwk").exists()
        assert (out / "partition_tree.json").exists()

    def test_plain_flags_keep_defaults(self, runner, write, tmp_path):
        """Options left unset without a config file fall back to the defaults"""
        saved = tmp_path / "effective.json"
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-p", "2",
                                     "-o", str(tmp_path / "out"), "--save-config", str(saved)])
        assert result.exit_code == 0, result.output
        effective = json.loads(saved.read_text())
        assert effective["graph"]["kernel"] == {"kind": "gaussian", "sigma": 10.0}
        assert effective["optimizer"]["phi"] == 2.0
        assert effective["optimizer"]["t_max"] == 100
        assert effective["repeats"] == 1

    def test_generated_constraints_with_labels(self, runner, write, tmp_path):
        """Test constraints sampled from the label column"""
        out = tmp_path / "out"
        args = ["partition", str(write("b.csv", BLOBS)), "--labels", "-p", "2",
                "--generate", "pairwise", "--amount", "0.34", "--seed", "3", "-o", str(out)]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        report = json.loads((out / "partition.json").read_text())
        assert report["constraint_seed"] == 3
        assert report["constraints"]["must_link"] >= 2
        assert report["metrics"]["ari"] == pytest.approx(1.0)
        assert "ari" in result.output

    def test_auto_p_needs_labels_or_k(self, runner, write, tmp_path):
        """p=auto needs labels or a cluster count"""
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-o", str(tmp_path)])
        assert result.exit_code == 2
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-k", "2", "-o", str(tmp_path)])
        assert result.exit_code == 0, result.output

    def test_bad_p(self, runner, write, tmp_path):
        """Test rejection of a non-numeric p"""
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-p", "lots"])
        assert result.exit_code == 2

    def test_malformed_csv(self, runner, write, tmp_path):
        """Test exit code on an unreadable CSV"""
        result = runner.invoke(cli, ["partition", str(write("x.csv", "1,2\n3,oops\n")), "-p", "1",
                                     "-o", str(tmp_path)])
        assert result.exit_code == 2
        assert "Error" in result.output

    def test_generation_without_labels(self, runner, write, tmp_path):
        """Test generation on unlabeled input"""
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-p", "2",
                                     "--generate", "label", "-o", str(tmp_path)])
        assert result.exit_code == 2

    def test_conflicting_constraints(self, runner, write, tmp_path):
        """Contradictory constraint files exit with 3"""
        constraints = write("c.txt", "ML 0 1\nML 1 2\nCL 0 2\n")
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-p", "2",
                                     "--constraints", str(constraints), "-o", str(tmp_path)])
        assert result.exit_code == 3
        assert "conflict" in result.output

    def test_non_convergence_still_writes(self, runner, write, tmp_path, monkeypatch):
        """Test exit code 4 still leaves the report behind"""
        monkeypatch.setattr("entropy_clustering.flat_optimizer.moving_stage", lambda *a, **k: (0, 1, False))
        out = tmp_path / "out"
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-p", "2", "-o", str(out)])
        assert result.exit_code == 4
        assert json.loads((out / "partition.json").read_text())["converged"] is False

    def test_config_file_and_overrides(self, runner, write, tmp_path):
        """Flags win over the config file, which wins over defaults"""
        out = tmp_path / "out"
        config = write("run.yaml", yaml.safe_dump({
            "graph": {"p": 1, "kernel": {"kind": "cosine"}},
            "optimizer": {"phi": 0.5, "t_max": 7},
        }))
        saved = tmp_path / "saved.yaml"
        result = runner.invoke(cli, ["partition", str(write("t.csv", TRIANGLE)), "-c", str(config),
                                     "-p", "2", "-o", str(out), "--save-config", str(saved)])
        assert result.exit_code == 0, result.output
        effective = yaml.safe_load(saved.read_text())
        assert effective["graph"]["p"] == 2
        assert effective["graph"]["kernel"]["kind"] == "cosine"
        assert effective["optimizer"]["phi"] == 0.5
        assert effective["optimizer"]["t_max"] == 7

    def test_repeats(self, runner, write, tmp_path):
        """Test repeated runs and their summary file"""
        out = tmp_path / "out"
        args = ["partition", str(write("b.csv", BLOBS)), "--labels", "-p", "2",
                "--generate", "pairwise", "--repeats", "3", "-o", str(out)]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        summary = json.loads((out / "partition_repeats.json").read_text())
        assert summary["repeats"] == 3
        assert summary["constraint_seeds"] == [0, 1, 2]
        assert set(summary["metrics"]) == {"ari", "nmi"}

    def test_repeats_reuse_first_run(self, runner, write, tmp_path, monkeypatch):
        """The primary report counts as repeat 0 instead of running it twice"""
        from entropy_clustering.clusterer import Clusterer

        offsets = []
        original = Clusterer.run

        def counting_run(self, command, offset=0):
            offsets.append(offset)
            return original(self, command, offset)

        monkeypatch.setattr(Clusterer, "run", counting_run)
        out = tmp_path / "out"
        args = ["partition", str(write("b.csv", BLOBS)), "--labels", "-p", "2",
                "--generate", "pairwise", "--repeats", "3", "-o", str(out)]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        assert offsets == [0, 1, 2]
        report = json.loads((out / "partition.json").read_text())
        summary = json.loads((out / "partition_repeats.json").read_text())
        assert summary["runs"][0]["objective"] == report["objective"]


class TestHierarchyCommand:

    def test_path(self, runner, write, tmp_path):
        """Test the hierarchy outputs on a path graph"""
        out = tmp_path / "out"
        result = runner.invoke(cli, ["hierarchy", str(write("line.csv", LINE)), "-p", "1", "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "binary_tree.nwk").read_text() == "((0,1),(2,3));\n"
        tree_k = json.loads((out / "tree_k.json").read_text())
        assert tree_k["height"] <= 3
        report = json.loads((out / "hierarchy.json").read_text())
        assert report["assignments"] == [0, 0, 1, 1]
        assert report["binary_height"] == 2

    def test_dendrogram_purity_reported(self, runner, write, tmp_path):
        """Test dendrogram purity in the hierarchy report"""
        out = tmp_path / "out"
        result = runner.invoke(cli, ["hierarchy", str(write("b.csv", BLOBS)), "--labels", "-p", "2",
                                     "-K", "2", "-o", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads((out / "hierarchy.json").read_text())
        assert report["metrics"]["dendrogram_purity"] == pytest.approx(1.0)
        assert report["tree_height"] <= 2


class TestGenConstraintsCommand:

    def test_writes_file(self, runner, write, tmp_path):
        """Test writing sampled constraints"""
        out = tmp_path / "c.txt"
        result = runner.invoke(cli, ["gen-constraints", str(write("l.txt", "0\n0\n1\n1\n")),
                                     "--amount", "0.25", "-o", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 2
        assert {line.split()[0] for line in lines} == {"ML", "CL"}

    def test_output_required(self, runner, write):
        """Test that -o is mandatory"""
        result = runner.invoke(cli, ["gen-constraints", str(write("l.txt", "0\n1\n"))])
        assert result.exit_code == 2


class TestEvalCommand:

    def test_labels(self, runner, write):
        """Test evaluation of a label file"""
        truth = write("truth.txt", "0\n0\n1\n1\n")
        pred = write("pred.txt", "1\n1\n0\n0\n")
        result = runner.invoke(cli, ["eval", "--truth", str(truth), "--pred", str(pred)])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["metrics"]["ari"] == pytest.approx(1.0)
        assert report["metrics"]["nmi"] == pytest.approx(1.0)

    def test_tree_and_report(self, runner, write, tmp_path):
        """Test tree evaluation and the JSON report"""
        truth = write("truth.txt", "0\n0\n1\n1\n")
        tree = write("tree.json", json.dumps({"tree": {"children": [
            {"children": [{"vertex": 0}, {"vertex": 2}]},
            {"children": [{"vertex": 1}, {"vertex": 3}]},
        ]}}))
        out = tmp_path / "metrics.json"
        result = runner.invoke(cli, ["eval", "--truth", str(truth), "--tree", str(tree), "-m", "dp", "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["metrics"]["dendrogram_purity"] == pytest.approx(0.5)

    def test_partition_report_as_prediction(self, runner, write, tmp_path):
        """A partition.json works as the prediction"""
        out = tmp_path / "out"
        runner.invoke(cli, ["partition", str(write("b.csv", BLOBS)), "--labels", "-p", "2", "-o", str(out)])
        truth = write("truth.txt", "0\n0\n0\n1\n1\n1\n")
        result = runner.invoke(cli, ["eval", "--truth", str(truth), "--pred", str(out / "partition.json"),
                                     "-m", "ari"])
        assert result.exit_code == 0, result.output
        assert "ari" in json.loads(result.output)["metrics"]

    def test_nothing_to_evaluate(self, runner, write):
        """Test eval without prediction or tree"""
        result = runner.invoke(cli, ["eval", "--truth", str(write("truth.txt", "0\n1\n"))])
        assert result.exit_code == 2

    def test_length_mismatch(self, runner, write):
        """Test eval on inputs of different lengths"""
        result = runner.invoke(cli, ["eval", "--truth", str(write("truth.txt", "0\n1\n")),
                                     "--pred", str(write("pred.txt", "0\n1\n1\n"))])
        assert result.exit_code == 2


class TestSweepCommand:

    def test_rows(self, runner, write, tmp_path):
        """Test one sweep row per amount"""
        out = tmp_path / "out"
        result = runner.invoke(cli, ["sweep", str(write("b.csv", BLOBS)), "--labels", "-p", "2",
                                     "--amounts", "0.2,0.4", "-o", str(out)])
        assert result.exit_code == 0, result.output
        sweep = json.loads((out / "sweep.json").read_text())
        assert [row["amount"] for row in sweep["rows"]] == [0.2, 0.4]
        assert sweep["kind"] == "pairwise"

    def test_bad_amounts(self, runner, write, tmp_path):
        """Test rejection of malformed amounts"""
        result = runner.invoke(cli, ["sweep", str(write("b.csv", BLOBS)), "--labels", "-p", "2",
                                     "--amounts", "a,b", "-o", str(tmp_path)])
        assert result.exit_code == 2


def test_version(runner):
    """Test version command"""
    result = runner.invoke(cli, ["version"])
    assert result.exit_code == 0
    assert __version__ in result.output
