import json

import pytest
from click.testing import CliRunner

from poncelet_rings.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def polygon_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("scenes") / "p10.scene.json"
    result = CliRunner().invoke(main, [
        "poncelet", "build", "--axes", "4,1", "--m", "10",
        "--t0", "0.3", "--out", str(path)])
    assert result.exit_code == 0, result.output
    return str(path)


class TestPonceletBuild:
    def test_build_summary(self, runner, tmp_path):
        out = tmp_path / "p.scene.json"
        result = runner.invoke(main, [
            "poncelet", "build", "--axes", "4,1", "--m", "8",
            "--t0", "0.1", "--out", str(out)])
        assert result.exit_code == 0
        assert "closure residual" in result.output
        doc = json.loads(out.read_bytes())
        assert doc["m"] == 8
        assert len(doc["rings"][0]["elements"]) == 8

    def test_json_stdout_deterministic(self, runner):
        args = ["poncelet", "build", "--axes", "4,1", "--m", "9",
                "--t0", "0.2", "--json"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.exit_code == 0
        assert a.output == b.output

    def test_bad_axes_syntax(self, runner):
        result = runner.invoke(main, [
            "poncelet", "build", "--axes", "banana", "--m", "8"])
        assert result.exit_code == 2

    def test_impossible_winding(self, runner):
        result = runner.invoke(main, [
            "poncelet", "build", "--axes", "4,1", "--m", "8",
            "--winding", "2"])
        assert result.exit_code == 1


class TestCelestial:
    def test_construct_gr(self, runner):
        result = runner.invoke(main, [
            "celestial", "construct", "--symbol", "7#(3,1;2,3;1,2)",
            "--axes", "2,1", "--t0", "0.37"])
        assert result.exit_code == 0, result.output
        assert "proper-(n4)" in result.output
        assert "21" in result.output

    def test_construct_from_file(self, runner, polygon_file, tmp_path):
        svg = tmp_path / "s.svg"
        result = runner.invoke(main, [
            "celestial", "construct", "--symbol", "10#(2,3;4,2;3,4)",
            "--from", polygon_file, "--svg", str(svg)])
        assert result.exit_code == 0, result.output
        assert svg.read_bytes().startswith(b"<?xml")

    def test_construct_nontrivial_fails(self, runner):
        result = runner.invoke(main, [
            "celestial", "construct", "--symbol", "9#(2,3;4,1)",
            "--axes", "4,1"])
        assert result.exit_code == 1

    def test_validate_trivial(self, runner):
        result = runner.invoke(main, [
            "celestial", "validate", "--symbol", "7#(3,1;2,3;1,2)",
            "--json"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["trivial"] is True and doc["m"] == 7

    def test_validate_grammar_exit_2(self, runner):
        result = runner.invoke(main, [
            "celestial", "validate", "--symbol", "7#(3;1)"])
        assert result.exit_code == 2

    def test_validate_constraint_exit_3(self, runner):
        result = runner.invoke(main, [
            "celestial", "validate", "--symbol", "9#(3,3;1,2)"])
        assert result.exit_code == 3
        result = runner.invoke(main, [
            "celestial", "validate", "--symbol", "8#(4,1;2,3)"])
        assert result.exit_code == 3


class TestGrid:
    def test_primal(self, runner, polygon_file):
        result = runner.invoke(main, ["grid", "--from", polygon_file,
                                      "--json"])
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert doc["rank"] == 2
        assert [r["ring"] for r in doc["rings"]] == [1, 2, 3, 4]

    def test_ring_subset(self, runner, polygon_file):
        result = runner.invoke(main, [
            "grid", "--from", polygon_file, "--rings", "2,3", "--json"])
        doc = json.loads(result.output)
        assert [r["ring"] for r in doc["rings"]] == [2, 3]

    def test_dual(self, runner, polygon_file):
        result = runner.invoke(main, ["grid", "dual", "--from",
                                      polygon_file, "--json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["rank"] == 2

    def test_missing_file_exit_2(self, runner):
        result = runner.invoke(main, ["grid", "--from", "/nope.json"])
        assert result.exit_code == 2


class TestCertify:
    def test_polynomial(self, runner):
        result = runner.invoke(main, ["certify", "polynomial"])
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert doc["verdict"] == "zero"
        assert doc["term_counts"]["det_q_final"] == 0

    def test_lemma1_seeded(self, runner):
        a = runner.invoke(main, ["certify", "lemma1", "--samples", "25",
                                 "--seed", "42"])
        b = runner.invoke(main, ["certify", "lemma1", "--samples", "25",
                                 "--seed", "42"])
        assert a.exit_code == 0, a.output
        assert a.output == b.output
        assert json.loads(a.output)["verdict"] == "pass"

    def test_special_cases(self, runner):
        for case in ("mirror-x", "swap-mirror", "point-mirror",
                     "point-swap"):
            result = runner.invoke(main, ["certify", "special",
                                          "--case", case])
            assert result.exit_code == 0, (case, result.output)
            assert json.loads(result.output)["verdict"] == "verified"


class TestPentagramSweep:
    def test_commute_on_poncelet(self, runner, polygon_file):
        result = runner.invoke(main, [
            "pentagram", "--from", polygon_file, "--k", "2",
            "--check-commute", "3", "--json"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["commute_residual"] < 1e-7

    def test_sweep_outputs(self, runner, tmp_path):
        prefix = str(tmp_path / "sw")
        result = runner.invoke(main, [
            "sweep", "--symbol", "7#(3,1;2,3;1,2)", "--t0-grid", "6",
            "--lambda-grid", "1", "--out", prefix])
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "sw.csv").read_text().splitlines()
        assert lines[0] == "t0,lambda,residual,verdict"
        assert len(lines) == 7
        assert all(row.split(",")[3] == "proper-(n4)" for row in lines[1:])
        png = (tmp_path / "sw.png").read_bytes()
        assert png[:8] == b"\x89PNG\r\n\x1a\n"

    def test_help_everywhere(self, runner):
        for args in (["--help"], ["poncelet", "--help"],
                     ["poncelet", "build", "--help"],
                     ["celestial", "construct", "--help"],
                     ["celestial", "validate", "--help"],
                     ["grid", "--help"], ["grid", "dual", "--help"],
                     ["incircles", "--help"], ["certify", "--help"],
                     ["certify", "lemma1", "--help"],
                     ["pentagram", "--help"], ["sweep", "--help"],
                     ["serve", "--help"]):
            result = runner.invoke(main, args)
            assert result.exit_code == 0, args


class TestIncircles:
    def test_centers_audit(self, runner, polygon_file):
        result = runner.invoke(main, [
            "incircles", "--from", polygon_file, "--shifts", "2,3,4"])
        assert result.exit_code == 0, result.output
        assert "collinearity" in result.output

    def test_bad_shifts_syntax(self, runner, polygon_file):
        result = runner.invoke(main, [
            "incircles", "--from", polygon_file, "--shifts", "2;3;4"])
        assert result.exit_code == 2
