import json

import pytest

from rtlic import cli
from rtlic.pipeline import RunConfig


@pytest.fixture
def gen(ram_path, tmp_path):
    def _gen(*extra, out=None):
        out = out or tmp_path / "runs"
        code = cli.main(["gen", "--design", ram_path, "--target", "line:37", "--out", str(out), *extra])
        return code, out
    return _gen


def _report(out):
    (runid,) = [p for p in out.iterdir()]
    return runid, json.loads((runid / "report.json").read_text())


def test_gen_incremental(gen, capsys):
    code, out = gen()
    assert code == 0
    root, rep = _report(out)
    assert root.name == RunConfig(rep["config"]["design"], "line:37").runid
    assert rep["schema_version"] == 1
    assert rep["sequence"] == ["B3", "B8"]
    assert [t["marker"] for t in rep["targets"]] == ["Target1", "Target2", "Target"]
    assert all(t["solved"] for t in rep["targets"]) and rep["replay"]
    assert {q["marker"]: q["constraints"] for q in rep["queue"]} == {
        "Target1": {"r_en": "0x0", "w_en": "0x1", "addr": "0x4", "w_data": "0xab"},
        "Target2": {"r_en": "0x1", "w_en": "0x0", "addr": "0x4", "r_data": "0xab"},
    }
    assert sorted(p.name for p in root.iterdir()) == [
        "cfg.dot", "instrumented.v", "manifest.json", "report.json", "tests.json", "trace.log"]
    assert "replay on original design: pass" in capsys.readouterr().out


def test_gen_baseline_miss(gen, capsys):
    code, out = gen("--mode", "baseline", "--seed", "1")
    assert code == 1
    _, rep = _report(out)
    assert rep["verdict"] == "target not activated within limit"
    assert rep["queue"] == [] and not rep["replay"]
    assert "not activated" in capsys.readouterr().err


def test_gen_reproducible(gen, tmp_path):
    _, a = gen(out=tmp_path / "a")
    _, b = gen(out=tmp_path / "b")
    ra, rb = _report(a)[0], _report(b)[0]
    for name in ("report.json", "tests.json", "manifest.json", "trace.log"):
        assert (ra / name).read_bytes() == (rb / name).read_bytes()


def test_replay(gen, ram_path, tmp_path, capsys):
    _, out = gen()
    root, _ = _report(out)
    args = ["replay", "--design", ram_path, "--target", "line:37"]
    assert cli.main(args + ["--tests", str(root / "tests.json"), "--trace", str(tmp_path / "t.log")]) == 0
    assert "M Target" in (tmp_path / "t.log").read_text()
    zero = tmp_path / "zero.json"
    zero.write_text(json.dumps([{"cycle": c, "inputs": {}} for c in range(1, 11)]))
    assert cli.main(args + ["--tests", str(zero)]) == 1
    cut = tmp_path / "cut.json"
    cut.write_text((root / "tests.json").read_text()[:40])
    assert cli.main(args + ["--tests", str(cut)]) == 3
    assert "[replay]" in capsys.readouterr().err


def test_seq(ram_path, capsys):
    assert cli.main(["seq", "--design", ram_path, "--target", "line:37"]) == 0
    assert capsys.readouterr().out == "S = <B3, B8>\n"
    assert cli.main(["seq", "--design", ram_path, "--target", "line:37", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["sequence"] == ["B3", "B8"]


def test_dump(ram_path, tmp_path, capsys):
    assert cli.main(["dump", "cfg-dot", "--design", ram_path]) == 0
    dot = capsys.readouterr().out
    assert dot.count("subgraph cluster_") == 3 and "style=dashed" in dot
    f = tmp_path / "i.v"
    assert cli.main(["dump", "instrumented", "--design", ram_path, "--target", "line:37",
                     "--out", str(f)]) == 0
    assert '$display("Target2");' in f.read_text()
    assert cli.main(["dump", "seq", "--design", ram_path]) == 2


def test_cfg_and_instrument(ram_path, capsys):
    assert cli.main(["cfg", "--design", ram_path]) == 0
    text = capsys.readouterr().out
    assert "CFG3 (comb)" in text and "B3 => B8 (mem)" in text
    assert cli.main(["instrument", "--design", ram_path, "--target", "marker:Target"]) == 0
    assert "always @(*)" in capsys.readouterr().out


def test_smt_export(ram_path, tmp_path):
    out = tmp_path / "smt"
    assert cli.main(["smt", "--design", ram_path, "--target", "line:37", "--out", str(out)]) == 0
    index = json.loads((out / "index.json").read_text())
    assert index and all((out / q["file"]).exists() for q in index)
    assert all(q["internal"] in ("sat", "unsat") for q in index)


def test_usage_errors(ram_path):
    assert cli.main(["gen", "--design", ram_path, "--target", "line:37", "--unroll", "0"]) == 2
    assert cli.main(["gen", "--design", ram_path, "--target", "line:37", "--limit", "0"]) == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["gen", "--design", ram_path])
    assert e.value.code == 2


def test_stage_errors(ram_path, tmp_path, capsys):
    bad = tmp_path / "bad.v"
    bad.write_text("module m(a);\n input a;\n")
    assert cli.main(["seq", "--design", str(bad), "--target", "line:1"]) == 3
    assert "[frontend]" in capsys.readouterr().err
    assert cli.main(["seq", "--design", ram_path, "--target", "line:2"]) == 3
    assert "no branch at line 2" in capsys.readouterr().err
    assert cli.main(["seq", "--design", str(tmp_path / "missing.v"), "--target", "line:1"]) == 3
