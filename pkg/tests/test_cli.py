import json
import subprocess
import sys

from perfolab.cli import main
from perfolab.logic import parse


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_and_eval(tmp_path, capsys):
    path = tmp_path / "g.json"
    code, _, _ = run(capsys, "sample", "--n", "20", "--seed", "3", "--out", str(path))
    assert code == 0
    obj = json.loads(path.read_text())
    assert obj["n"] == 20 and obj["orientation"] in ("unipolar", "co-unipolar")
    graph_path = path
    code, out, _ = run(capsys, "eval", str(graph_path), "exists x : x = x")
    assert (code, out.strip()) == (0, "true")
    sentence = tmp_path / "s.fo"
    sentence.write_text("forall x : x ~ x\n")
    code, out, _ = run(capsys, "eval", str(graph_path), str(sentence))
    assert out.strip() == "false"
    code, out, _ = run(capsys, "eval", str(graph_path), "x = y", "--env", "x=1", "--env", "y=1")
    assert out.strip() == "true"
    code, _, err = run(capsys, "eval", str(graph_path), "x = y")
    assert code == 2 and "unbound" in err


def test_sample_is_deterministic(capsys):
    _, a, _ = run(capsys, "sample", "--n", "40", "--seed", "1", "--unipolar")
    _, b, _ = run(capsys, "sample", "--n", "40", "--seed", "1", "--unipolar")
    assert a == b and "parts" in json.loads(a)


def test_formulas(capsys):
    for kind in ("InC0", "CN", "Hedge", "Bigger", "unip", "relativize", "psi", "theorem1"):
        code, out, _ = run(capsys, "formulas", kind)
        assert code == 0
        parse(out)
    _, out, _ = run(capsys, "formulas", "CN", "--interpreted")
    assert "InC0(x)" in out


def test_spectrum_and_errors(capsys):
    tri = "exists x y z : x ~ y & x ~ z & y ~ z"
    assert run(capsys, "spectrum", tri, "3")[1].strip() == "true"
    assert run(capsys, "spectrum", tri, "2")[1].strip() == "false"
    code, _, err = run(capsys, "spectrum", tri, "7")
    assert code == 2 and "error" in err
    code, _, err = run(capsys, "spectrum", "exists x :", "2")
    assert code == 2 and "line 1" in err


def test_experiment_and_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    csv_path = tmp_path / "r.csv"
    code, _, _ = run(capsys, "experiment", "criterion", "--n", "100", "--trials", "3", "--seed", "2",
                     "--out", str(out), "--csv", str(csv_path))
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["experiment"] == "criterion" and len(rep["trials"]) == 3
    code, text, _ = run(capsys, "report", str(out))
    assert text == csv_path.read_text()
    phi = tmp_path / "phi.fo"
    phi.write_text("exists a : !(a = a)")
    code, text, _ = run(capsys, "experiment", "dichotomy", "--n", "500", "--trials", "2", "--phi", str(phi))
    assert json.loads(text)["metrics"]["psi"]["count"] == 0
    code, _, err = run(capsys, "experiment", "criterion", "--n", "10", "--trials", "1")
    assert code == 2 and "n >= 16" in err


def test_pmf(capsys):
    code, out, _ = run(capsys, "pmf", "--n", "2")
    lines = out.strip().splitlines()
    assert lines[0] == "m,probability"
    assert [float(x.split(",")[1]) for x in lines[1:]] == [0.8, 0.2]


def test_max_n_guard(capsys, monkeypatch):
    code, _, err = run(capsys, "sample", "--n", "100001")
    assert code == 2 and "PERFOLAB_MAX_N" in err
    monkeypatch.setenv("PERFOLAB_MAX_N", "10")
    assert run(capsys, "sample", "--n", "11")[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "perfolab.cli", "formulas", "InC0"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("exists x1")
