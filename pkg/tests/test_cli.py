import json
import subprocess
import sys

import pytest

from nullstring_lab import cli

WALKER = """\
mode = real
family = walker-pk

[functions]
A = "x^3 + q*x^2"
B = "y^3 + p*y^2"
"""

BAD_CONGRUENCE = """\
mode = real
family = weak-hh

[functions]
A = "0"
Q = "x*y"
B = "0"

[congruences]
mprime = ASD "0" "1" n
"""


@pytest.fixture
def walker_file(tmp_path):
    path = tmp_path / "walker.metric"
    path.write_text(WALKER)
    return str(path)


def run_json(capsys, *argv):
    code = cli.main([*argv, "--json", "-"])
    return code, json.loads(capsys.readouterr().out)


def test_classify_walker(capsys, walker_file):
    code, rep = run_json(capsys, "classify", walker_file, "--points", "5")
    assert code == 0
    assert rep["schemaVersion"] == 1
    assert rep["inputDigest"].startswith("sha256:")
    assert rep["aggregate"]["symbol"] == "[II]^{n} ⊗ [D]^{nn}"
    assert rep["claimed"]["fractionMatching"] == 1.0
    assert len(rep["perPoint"]) == rep["pointsSampled"] == 5


def test_json_is_deterministic(capsys, walker_file):
    cli.main(["classify", walker_file, "--points", "4", "--json", "-"])
    a = capsys.readouterr().out
    cli.main(["classify", walker_file, "--points", "4", "--json", "-"])
    assert capsys.readouterr().out == a


def test_seed_from_environment(capsys, walker_file, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "17")
    _, rep = run_json(capsys, "classify", walker_file, "--points", "2")
    assert rep["seed"] == 17
    _, rep2 = run_json(capsys, "classify", walker_file, "--points", "2", "--seed", "17")
    assert rep2["perPoint"][0]["point"] == rep["perPoint"][0]["point"]
    _, rep3 = run_json(capsys, "classify", walker_file, "--points", "2", "--seed", "3")
    assert rep3["perPoint"][0]["point"] != rep["perPoint"][0]["point"]


def test_bad_seed_environment(capsys, walker_file, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "abc")
    assert cli.main(["classify", walker_file]) == cli.EXIT_INPUT


def test_verify_passes(capsys, tmp_path):
    path = tmp_path / "pke.metric"
    path.write_text("family = pkE-D\n")
    code, rep = run_json(capsys, "verify", str(path), "--points", "4",
                         "--check", "killing", "--check", "einstein", "--check", "master",
                         "--check", "congruences")
    assert code == 0, rep
    assert all(c["passed"] for c in rep["checks"].values())


def test_verify_type3(capsys, tmp_path):
    path = tmp_path / "t3.metric"
    path.write_text("family = sd-III-ne-ii\n")
    code, rep = run_json(capsys, "verify", str(path), "--points", "4", "--check", "type3")
    assert code == 0
    assert rep["checks"]["type3"]["maxRelativeResidual"] < 1e-10


def test_verify_failing_congruence_exits_one(capsys, tmp_path):
    path = tmp_path / "bad.metric"
    path.write_text(BAD_CONGRUENCE)
    code, rep = run_json(capsys, "verify", str(path), "--points", "3", "--check", "congruences")
    assert code == cli.EXIT_FAIL
    assert rep["checks"]["congruences"]["failures"]


def test_verify_without_data_fails(capsys, walker_file):
    code, _ = run_json(capsys, "verify", walker_file, "--points", "2", "--check", "killing")
    assert code == cli.EXIT_FAIL


def test_flat_metric(capsys, tmp_path):
    path = tmp_path / "flat.metric"
    path.write_text('[functions]\nA = "0"\nQ = "0"\nB = "0"\n')
    code, rep = run_json(capsys, "classify", str(path), "--points", "3")
    assert code == 0
    assert rep["aggregate"]["symbol"] == "[O]^{n} ⊗ [O]"


def test_missing_file(capsys, tmp_path):
    assert cli.main(["classify", str(tmp_path / "nope.metric")]) == cli.EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_malformed_file(capsys, tmp_path):
    path = tmp_path / "bad.metric"
    path.write_text('[functions]\nA = "x^"\n')
    assert cli.main(["classify", str(path)]) == cli.EXIT_INPUT


def test_all_points_singular(capsys, tmp_path):
    path = tmp_path / "sing.metric"
    path.write_text('family = typeD-ne\n[functions]\nF = "q"\n')
    assert cli.main(["classify", str(path), "--points", "2"]) == cli.EXIT_SAMPLING


def test_scan_finds_the_diagonal(capsys, tmp_path):
    # A = x^3, B = -y^3: the SD type degenerates where x = y
    path = tmp_path / "scan.metric"
    path.write_text('family = walker-pk\n[functions]\nA = "x^3"\nB = "-y^3"\n')
    code, rep = run_json(capsys, "scan", str(path), "--grid", "q=0.3,p=0.2,x=-1:1:9,y=-1:1:9")
    assert code == 0
    assert rep["shape"] == [1, 1, 9, 9]
    diagonal = {c["sd"] for c in rep["cells"] if c["index"][2] == c["index"][3]}
    off = {c["sd"] for c in rep["cells"] if abs(c["index"][2] - c["index"][3]) > 1}
    assert diagonal.isdisjoint(off)
    assert rep["boundaryCells"] > 0


def test_scan_grid_errors(capsys, walker_file):
    assert cli.main(["scan", walker_file, "--grid", "q=0,p=0,x=0"]) == cli.EXIT_INPUT
    assert cli.main(["scan", walker_file, "--grid", "q=0,p=0,x=0,y=0:1:2.5"]) == cli.EXIT_INPUT
    assert cli.main(["scan", walker_file, "--grid", "q=0,q=1,x=0,y=0"]) == cli.EXIT_INPUT


def test_parse_grid():
    axes = cli.parse_grid("q=0.5,p=1,x=-1:1:3,y=2", ("q", "p", "x", "y"))
    assert [a.tolist() for a in axes] == [[0.5], [1.0], [-1.0, 0.0, 1.0], [2.0]]


def test_families_and_template(capsys):
    assert cli.main(["families"]) == 0
    out = capsys.readouterr().out
    assert out.count("\n") == 16
    assert cli.main(["template", "sd-N"]) == 0
    assert 'Sigma = "q*p + p^3"' in capsys.readouterr().out
    assert cli.main(["template", "nope"]) == cli.EXIT_INPUT


def test_plain_complex():
    assert cli._plain({"a": 1 + 2j, "b": float("inf")}) == {"a": [1.0, 2.0], "b": "inf"}


def test_console_entry_point(walker_file):
    out = subprocess.run([sys.executable, "-m", "nullstring_lab.cli", "classify", walker_file, "--points", "2"],
                         capture_output=True, text=True, check=True)
    assert "symbol" in out.stdout
