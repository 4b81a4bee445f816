import json
import math

import pytest

from ssflow.cli import main


@pytest.fixture
def cantor_toml(tmp_path):
    path = tmp_path / "cantor.toml"
    path.write_text(f'name = "cantor"\nweights = [{math.log(3)!r}, {math.log(3)!r}]\n')
    return str(path)


def test_dimension(cantor_toml, capsys):
    assert main(["dimension", cantor_toml]) == 0
    out = capsys.readouterr().out
    assert "D  = 0.63092975" in out
    assert f"lattice with w={math.log(3)!r}" in out


def test_orbits_empty_census(cantor_toml, capsys):
    assert main(["orbits", cantor_toml, "--cutoff", "0.5"]) == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    assert captured.out == "length,total_weight,representative\n"


def test_out_dir_and_manifest(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["--out", str(out), "--digits17", "dims-window", "fibonacci", "--T", "20"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["files"] == ["dims.csv"]
    assert manifest["parameters"]["T"] == 20.0
    assert {"numpy", "scipy", "python", "ssflow"} <= set(manifest["versions"])
    first = (out / "dims.csv").read_text().splitlines()[1].split(",")
    assert len(first[0].lstrip("-").replace(".", "")) >= 17


def test_byte_identical(tmp_path):
    texts = []
    for name in ("a", "b"):
        assert main(["--out", str(tmp_path / name), "psi", "golden", "--logx-grid", "1,9,12", "--jump", "half"]) == 0
        texts.append((tmp_path / name / "counting.csv").read_bytes())
    assert texts[0] == texts[1]


def test_zeta_json(capsys):
    assert main(["zeta", "eval", "cantor", "--s", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["zeta"] == [-1.0, 0.0]


def test_dioph(capsys):
    assert main(["dioph", "profile", "golden", "--q-max", "5"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "q,max_error,ratio"
    assert main(["dioph", "cf", "golden", "--depth", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split(",")[3] for l in lines[1:]] == ["1", "1", "2", "3", "5"]


def test_explicit_compare(capsys):
    assert main(["explicit", "compare", "fibonacci", "--T", "50", "--logx-grid", "3,8,4"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 5


@pytest.mark.parametrize(
    "argv, code",
    [
        (["dimension", "/nonexistent/flow.toml"], 2),
        (["zeta", "eval", "cantor", "--s", "abc"], 2),
        (["--max-records", "10", "psi", "cantor", "--logx-grid", "1,40,3"], 3),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code
    assert capsys.readouterr().err.startswith("error:")


def test_bad_document(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"weights": [1.0], "ratios": [0.5]}))
    assert main(["dimension", str(bad)]) == 2
    assert "weights" in capsys.readouterr().err


def test_unwritable_out(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--out", str(blocker / "sub"), "dimension", "cantor"]) == 2


def test_reproduce_golden(tmp_path, capsys):
    code = main(["--out", str(tmp_path), "reproduce", "golden-flow"])
    summary = json.loads((tmp_path / "golden_summary.json").read_text())
    assert summary["checks"]["D"] and summary["checks"]["series"]
    assert (tmp_path / "golden_dims.csv").exists()
    assert code == (0 if all(summary["checks"].values()) else 1)
