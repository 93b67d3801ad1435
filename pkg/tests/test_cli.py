import json
import shutil
import subprocess
import sys

import pytest

from hnfil.cli import main
from hnfil.selftest import default_corpus


@pytest.fixture
def files(tmp_path, examples):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    out = {name: write(f"{name}.json", X.to_json()) for name, X in examples.items()}
    out["a"] = write("a.json", {"breakpoints": [["0", "0"], ["1", "1"], ["2", "1"]]})
    out["b"] = write("b.json", {"breakpoints": [["0", "0"], ["2", "1"]]})
    out["ss"] = write("ss.json", {"components": [[1, 2]]})
    out["ord"] = write("ord.json", {"components": [[0, 1], [1, 1]]})
    out["pts"] = write("pts.json", {"points": [["0", "0"], ["1", "1"], ["2", "1"], ["1", "3/10"]]})
    out["dir"] = tmp_path
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_polygon_conv_with_svg(capsys, files):
    svg = files["dir"] / "out.svg"
    code, out, _ = run(capsys, "polygon", "conv", files["a"], files["b"], "--svg", svg)
    assert code == 0
    assert json.loads(out)["breakpoints"] == [["0", "0"], ["1", "1"], ["3", "2"], ["4", "2"]]
    assert svg.read_text().startswith("<svg")


def test_polygon_csv(capsys, files):
    code, out, _ = run(capsys, "polygon", "conv", files["a"], files["b"], "--csv")
    assert out == "0,0\n1,1\n3,2\n4,2\n"


def test_polygon_verbs(capsys, files):
    assert json.loads(run(capsys, "polygon", "legendre", files["a"], "--lam", "1/2")[1])["value"] == "1/2"
    assert json.loads(run(capsys, "polygon", "dual", files["a"])[1])["breakpoints"] == [["0", "0"], ["1", "1"], ["2", "1"]]
    assert json.loads(run(capsys, "polygon", "envelope", files["pts"])[1])["breakpoints"][-1] == ["2", "1"]
    assert json.loads(run(capsys, "polygon", "cmp", files["a"], files["b"])[1]) == {"relation": "geq"}
    code, out, _ = run(capsys, "polygon", "plot", files["a"], "--title", "t")
    assert code == 0 and "<title>t</title>" in out


def test_module_verbs(capsys, files):
    code, out, _ = run(capsys, "module", "validate", files["X2"])
    assert code == 0 and json.loads(out)["valid"]
    assert json.loads(run(capsys, "module", "metrics", files["X2"])[1]) == {"dim": 1, "ht": 2, "mu": "1/2"}
    assert json.loads(run(capsys, "module", "hn", files["X4"])[1])["breakpoints"] == [["0", "0"], ["1", "1"], ["2", "1"]]
    assert json.loads(run(capsys, "module", "semistable", files["X1"])[1]) == {"semistable": True}


def test_torsion_module_input(capsys, files, examples):
    from hnfil.htmod import truncate

    path = files["dir"] / "t.json"
    path.write_text(json.dumps(truncate(examples["X2"], 1).to_json()))
    assert json.loads(run(capsys, "module", "hn", path)[1])["breakpoints"] == [["0", "0"], ["1", "1"], ["2", "1"]]
    assert json.loads(run(capsys, "module", "metrics", path)[1]) == {"deg": "1", "ht": 2, "mu": "1/2"}


def test_invalid_module_exits_2(capsys, files):
    path = files["dir"] / "bad.json"
    path.write_text(json.dumps({"field": {"p": 2, "k": 2}, "rank": 2, "omega_rank": 1, "alpha": [[{"coeffs": ["0", "1"]}, {"coeffs": ["2", "0"]}]]}))
    code, out, _ = run(capsys, "module", "validate", path)
    assert code == 2 and not json.loads(out)["valid"]


def test_descent_with_trace(capsys, files):
    trace = files["dir"] / "t.json"
    code, out, _ = run(capsys, "descent", files["X2"], "--horizon", 32, "--trace", trace)
    assert code == 0
    assert json.loads(out)["steps"] == ["isogeny", "done"]
    data = json.loads(trace.read_text())
    assert [s["kind"] for s in data["steps"]] == ["isogeny", "done"]


def test_descent_horizon_exit_3(capsys, files):
    trace = files["dir"] / "partial.json"
    code, _, err = run(capsys, "descent", files["X4"], "--horizon", 2, "--trace", trace)
    assert code == 3
    assert "Traceback" not in err
    assert trace.exists()


def test_newton_verbs(capsys, files):
    code, out, _ = run(capsys, "newton", "flip", files["ss"])
    assert json.loads(out)["breakpoints"] == [["0", "0"], ["2", "1"]]
    assert run(capsys, "newton", "check", files["a"], "--slopes", files["ord"])[0] == 0
    code, out, _ = run(capsys, "newton", "check", files["a"], "--slopes", files["ss"])
    assert code == 1 and json.loads(out)["ok"] is False


def test_strata_verbs(capsys, files):
    assert run(capsys, "strata", "dim", "-n", 2, "-d", 1, "--nu", "1/2,1/2")[1] == "1\n"
    assert run(capsys, "strata", "dim", "-n", 4, "-d", 2, "--nu", "1,1/2,1/2,0")[1] == "1\n"
    assert json.loads(run(capsys, "strata", "enum", "-n", 2, "-d", 1)[1]) == [["1", "0"], ["1/2", "1/2"]]
    assert json.loads(run(capsys, "strata", "levi", "--nu", "1,0")[1])["omega_ranks"] == [0, 1]
    labels = json.loads(run(capsys, "strata", "hecke", "--height", 2, "--bound", 4, "--window")[1])
    assert [x["a"] for x in labels] == [[3, 0], [4, 0]]
    code, out, _ = run(capsys, "strata", "classify", files["X2"], "--claimed", files["ss"])
    assert code == 0 and json.loads(out)["relation"] == "equal"
    assert run(capsys, "strata", "classify", files["X4"], "--claimed", files["ss"])[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["polygon", "conv", "missing.json"],
        ["strata", "dim", "-n", "2", "-d", "1", "--nu", "1/2,x"],
        ["strata", "dim", "-n", "2", "-d", "1", "--nu", "1,1/2"],
        ["strata", "enum", "-n", "2", "-d", "3"],
        ["module", "frobnicate", "x.json"],
        [],
    ],
)
def test_user_errors_exit_2_without_traceback(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as e:  # argparse usage errors
        code = e.code
    assert code == 2
    assert "Traceback" not in capsys.readouterr().err


def test_malformed_json_reports_pointer(capsys, files):
    path = files["dir"] / "p.json"
    path.write_text(json.dumps({"breakpoints": [["0", "0"], ["1", "1.5"]]}))
    code, _, err = run(capsys, "polygon", "plot", path)
    assert code == 2 and "/breakpoints/1/1" in err


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 11 and all(": PASS " in line for line in lines)


def test_selftest_empty_corpus(capsys, tmp_path):
    code, _, err = run(capsys, "selftest", "--corpus", tmp_path)
    assert code == 2 and "no corpus files" in err


def test_selftest_names_corrupted_fixture(capsys, tmp_path):
    corpus = tmp_path / "corpus"
    shutil.copytree(default_corpus(), corpus)
    blob = json.loads((corpus / "x2.json").read_text())
    blob["module"]["alpha"][0][1]["coeffs"] = ["1", "0"]
    (corpus / "x2.json").write_text(json.dumps(blob))
    code, out, _ = run(capsys, "selftest", "--corpus", corpus)
    assert code == 1
    assert "criterion 3: FAIL" in out and "X2: step kinds" in out


def test_entry_point_is_deterministic(files):
    cmd = [sys.executable, "-m", "hnfil.cli", "descent", files["X4"]]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
