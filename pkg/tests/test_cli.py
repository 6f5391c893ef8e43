import json
import math

import pytest

from dichospec.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from dichospec.io import dumps, fmt_float, to_jsonable, write_csv

AUTO = ["--corpus", "autonomous", "--params", "c=0.25", "--window", "-100", "100",
        "--gamma-range", "-1", "1.5", "--grid-step", "0.1"]


def run(argv, tmp_path, name="out"):
    out = tmp_path / name
    code = main(list(argv) + ["--out", str(out)])
    return code, out


def test_fmt_float_and_jsonable():
    assert fmt_float(0.1 + 0.2) == "0.3"
    assert fmt_float(-0.0) == "0" and fmt_float(math.inf) == "inf" and fmt_float(math.nan) == "nan"
    assert to_jsonable({"a": (1, 2.0000000000001), "b": math.inf}) == {"a": [1, 2.0], "b": "inf"}
    text = dumps({"x": 1.0}, kind="demo")
    assert json.loads(text) == {"schema_version": 1, "kind": "demo", "x": 1.0}
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_write_csv_cells(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["a", "b", "c"], [(1.5, None, True), (2, "x", False)])
    assert p.read_text() == "a,b,c\n1.5,,true\n2,x,false\n"


def test_spectrum_command(tmp_path, capsys):
    code, out = run(["spectrum", *AUTO, "--class", "uniform"], tmp_path)
    assert code == EXIT_OK
    data = json.loads((out / "spectrum.json").read_text())
    assert data["schema_version"] == 1 and data["kind"] == "spectrum"
    (lo, hi, *_), = data["spectrum"]["intervals"]
    assert lo == pytest.approx(0.25, abs=0.02) and hi == pytest.approx(0.25, abs=0.02)
    assert data["config"]["class"] == "uniform" and data["config"]["system"]["params"] == {"c": 0.25}
    assert data["reference"]["intervals"] == [[0.25, 0.25, False, False]]
    rows = (out / "spectrum_grid.csv").read_text().splitlines()
    assert rows[0] == "gamma,member,margin,rank" and len(rows) > 20
    assert "uniform spectrum" in capsys.readouterr().out


def test_byte_identical_reruns_and_jobs(tmp_path):
    argv = ["spectrum", *AUTO, "--class", "nonuniform"]
    _, a = run(argv, tmp_path, "a")
    _, b = run(argv, tmp_path, "b")
    _, c = run(argv + ["--jobs", "4"], tmp_path, "c")
    for f in ("spectrum.json", "spectrum_grid.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()
    strip = lambda p: {k: v for k, v in json.loads(p.read_text()).items() if k != "config"}
    assert strip(a / "spectrum.json") == strip(c / "spectrum.json")
    assert (a / "spectrum_grid.csv").read_bytes() == (c / "spectrum_grid.csv").read_bytes()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\ncorpus = autonomous\nparams = c=0.5\nclass = nonuniform\n"
                   "window = -80 80\ngamma_range = -1, 2\ngrid_step = 0.1\n")
    code, out = run(["spectrum", "--config", str(cfg)], tmp_path, "f")
    assert code == EXIT_OK
    d = json.loads((out / "spectrum.json").read_text())
    assert d["config"]["window"] == [-80, 80] and d["config"]["class"] == "nonuniform"
    code, out = run(["spectrum", "--config", str(cfg), "--class", "uniform", "--window", "-60", "60"],
                    tmp_path, "g")
    d = json.loads((out / "spectrum.json").read_text())
    assert code == EXIT_OK and d["config"]["class"] == "uniform" and d["config"]["window"] == [-60, 60]
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(["spectrum", "--config", str(bad)], tmp_path)[0] == EXIT_USAGE
    bad.write_text("window = 1\n")
    assert run(["spectrum", "--config", str(bad)], tmp_path)[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["spectrum", "--corpus", "nope"],
    ["spectrum", "--corpus", "ex731", "--params", "b=1"],
    ["spectrum", "--corpus", "ex731", "--class", "bogus"],
    ["spectrum", "--corpus", "ex731", "--logK-cap", "-1"],
    ["spectrum"],
    ["frobnicate"],
    ["corpus", "show", "ex999"],
])
def test_usage_errors(argv, tmp_path):
    assert run(argv, tmp_path)[0] == EXIT_USAGE


def test_verify_exit_codes(tmp_path):
    base = ["verify", "--corpus", "autonomous", "--params", "c=0", "--window", "-100", "100"]
    ok = json.dumps({"class": "nonuniform", "projector": "Id", "alpha": -0.5, "theta": 0.1, "gamma": 1.0})
    code, out = run(base + [ok], tmp_path)
    assert code == EXIT_OK
    assert json.loads((out / "verify.json").read_text())["kind"] == "verify"
    bad = json.dumps({"class": "nonuniform", "projector": "Id", "alpha": -0.5, "theta": 1.0})
    assert run(base + [bad], tmp_path)[0] == EXIT_USAGE
    tight = json.dumps({"class": "uniform", "projector": "Id", "alpha": -2.0, "gamma": 1.0})
    assert run(base + [tight], tmp_path)[0] == EXIT_NUMERIC
    assert run(base + ["{not json"], tmp_path)[0] == EXIT_USAGE


def test_ratios_command(tmp_path):
    code, out = run(["ratios", *AUTO, "--gammas", "1,2,3", "--gap", "1"], tmp_path)
    assert code == EXIT_OK
    rows = (out / "ratios_gap1.csv").read_text().splitlines()
    assert rows[0] == "gamma,st,un,feasible_st,feasible_un"
    st = [float(r.split(",")[1]) for r in rows[1:]]
    assert st == pytest.approx([0.25 - g for g in (1, 2, 3)], abs=0.05)
    assert run(["ratios", *AUTO, "--gap", "7"], tmp_path)[0] == EXIT_USAGE


def test_similarity_command(tmp_path):
    base = ["similarity", "--corpus", "autonomous", "--params", "c=0.5", "--window", "-80", "80",
            "--gamma-range", "-1", "2", "--grid-step", "0.1"]
    code, out = run(base + ["--map", "exp:0.5"], tmp_path)
    assert code == EXIT_OK
    d = json.loads((out / "similarity.json").read_text())
    assert d["kind"] == "similarity" and d["nondegeneracy"]["passed"]
    code, out = run(base + ["--map", "exp:0.5", "--map-theta", "0.1"], tmp_path, "bad")
    assert code == EXIT_NUMERIC
    assert json.loads((out / "similarity.json").read_text())["nondegeneracy"]["passed"] is False
    assert run(base + ["--map", "rot:1"], tmp_path)[0] == EXIT_USAGE


def test_diagnose_command(tmp_path):
    code, out = run(["diagnose", "--corpus", "ex708", "--window", "-100", "100"], tmp_path)
    assert code == EXIT_OK
    d = json.loads((out / "diagnose.json").read_text())
    assert d["kind"] == "diagnose" and "growth" in d


def test_corpus_commands(capsys):
    assert main(["corpus", "list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ex731" in out and "autonomous" in out
    assert main(["corpus", "show", "ex708", "--params", "omega=2,a=0.8"]) == EXIT_OK
    assert "slow" in capsys.readouterr().out


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    assert "0.1.0" in capsys.readouterr().out
