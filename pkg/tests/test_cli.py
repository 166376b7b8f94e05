import io
import json
import os
import subprocess
import sys

import pytest

from llv.cli import main
from llv.corpus import fig3_derivation
from llv.derivation import to_json
from llv.semantics import ogre_types
from llv.typesys import print_type


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def fig3_file(tmp_path):
    path = tmp_path / "fig3.json"
    path.write_text(json.dumps(to_json(fig3_derivation())))
    return str(path)


def test_parse_resolves_corpus_names():
    code, out = run("parse", "II")
    assert code == 0 and out == "(\\x.x) (\\x.x)\n"
    code, out = run("parse", r"\x.y", "--json")
    assert json.loads(out) == {"term": r"\x.y", "size": 2, "value": True, "free": ["y"]}


def test_parse_error_is_a_usage_error(capsys):
    code, _ = run("parse", r"\x.(x")
    assert code == 2
    assert "position" in capsys.readouterr().err


def test_unknown_command_and_suite_are_usage_errors(capsys):
    assert run("frobnicate")[0] == 2
    assert run("verify", "--suite", "nope")[0] == 2


def test_reduce_writes_the_graph(tmp_path):
    graph = tmp_path / "g.json"
    code, out = run("reduce", "SumDup", "--graph", str(graph))
    assert code == 0 and out.startswith("Converges")
    g = json.loads(graph.read_text())
    assert set(g) == {"nodes", "edges", "exhausted"} and g["exhausted"]
    assert set(g["nodes"][0]) == {"id", "term", "normal", "layer"}
    assert set(g["edges"][0]) == {"src", "rule", "path", "dst"}


def test_reduce_reports_divergence_and_fuel():
    assert json.loads(run("reduce", "Omega", "--json")[1])["verdict"] == "Diverges"
    out = json.loads(run("reduce", r"(\x.x x x) (\x.x x x)", "--fuel", "5", "--json")[1])
    assert out["verdict"] == "Unknown" and not out["exhausted"]


def test_check_prints_judgment_and_measure(fig3_file):
    code, out = run("check", fig3_file)
    assert code == 0 and out.endswith("measure 5\n")


def test_check_reports_the_failing_node(tmp_path):
    data = to_json(fig3_derivation())
    data["premises"][1]["judgment"]["type"] = "1"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, out = run("--json", "check", str(path))
    assert code == 1
    report = json.loads(out)
    assert report["valid"] is False and report["path"] == [1]


def test_check_rejects_malformed_files(tmp_path):
    path = tmp_path / "junk.json"
    path.write_text("{not json")
    assert run("check", str(path))[0] == 2
    path.write_text("{}")
    assert run("check", str(path))[0] == 2
    assert run("check", str(tmp_path / "missing.json"))[0] == 2


def test_run_and_expand_round_trip(tmp_path, fig3_file):
    code, out = run("run", "--guided", fig3_file)
    assert code == 0
    trace = json.loads(out)
    assert len(trace["steps"]) == 5 and set(trace["steps"][0]) == {"rule", "path", "result"}
    path = tmp_path / "trace.json"
    path.write_text(out)
    code, out = run("expand", "--trace", str(path))
    assert code == 0
    d = json.loads(out)
    assert d["judgment"]["type"] == "1 % 1"
    rebuilt = tmp_path / "rebuilt.json"
    rebuilt.write_text(out)
    assert run("check", str(rebuilt)) == (0, run("check", fig3_file)[1])


def test_expand_rejects_a_bad_trace(tmp_path):
    path = tmp_path / "trace.json"
    path.write_text(json.dumps({"start": "II", "steps": [{"rule": "PlusL", "path": [], "result": "I"}]}))
    assert run("expand", "--trace", str(path))[0] == 1


def test_infer_modes():
    code, out = run("infer", "Fig3", "--k", "2")
    assert code == 0 and "1 % 1" in out and "measure 5" in out
    code, out = run("infer", "I", "--type", "(1 -o 1) -o (1 -o 1)", "--json")
    data = json.loads(out)
    assert data["typable"] and data["measures"] == [0]
    code, out = run("infer", "Omega", "--type-size", "2")
    assert code == 1 and "within bounds" in out
    assert run("infer", "I", "--type", "1 %")[0] == 2
    assert run("infer", "x")[0] == 2
    assert run("infer", "I", "--type", "1", "--k", "1")[0] == 2


def test_interp_json():
    code, out = run("interp", "Ystar", "--type-size", "2", "--json")
    data = json.loads(out)
    assert code == 0 and data["bound"]["max_type_size"] == 2
    assert set(data["types"]) == {print_type(t) for t in ogre_types(2)}


def test_obs_with_a_pool_file(tmp_path):
    pool = tmp_path / "pool.txt"
    pool.write_text("# a pool\nDelta\n\\x.x;\n")
    code, out = run("obs", "I", "Delta", "--args", "1", "--pool", str(pool), "--json")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "Separated" and data["witness"] == [r"\x.x x"]
    pool.write_text("y\n")
    assert run("obs", "I", "Delta", "--pool", str(pool))[0] == 2


def test_custom_corpus(tmp_path):
    c = tmp_path / "c.llv"
    c.write_text("let K = \\x y.x;\n")
    assert run("--corpus", str(c), "parse", "K") == (0, "\\x.\\y.x\n")
    assert run("--corpus", str(c), "parse", "I")[0] == 2


def test_verify_properties_small():
    code, out = run("verify", "--suite", "properties", "--size", "4", "--seed", "1", "--json")
    data = json.loads(out)
    assert code == 0 and data["ok"]
    assert [r["id"] for r in data["results"]] == ["C4", "C5", "C8", "P1"]


@pytest.mark.parametrize(
    "argv",
    [
        ("infer", "XIXP", "--k", "2", "--json"),
        ("reduce", "Fig3", "--json"),
        ("interp", "Delta", "--type-size", "3", "--json"),
        ("obs", "I", "Ystar", "--json"),
    ],
)
def test_json_output_is_byte_identical(argv):
    assert run(*argv)[1] == run(*argv)[1]


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "llv.cli", "parse", "Omega"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "(\\x.x x) (\\x.x x)\n"


@pytest.mark.parametrize("argv", [("interp", "Ystar", "--type-size", "3", "--json"), ("infer", "SumDup", "--k", "2", "--json")])
def test_json_output_survives_hash_randomization(argv):
    outs = set()
    for seed in ("1", "2", "3"):
        env = {**os.environ, "PYTHONHASHSEED": seed}
        r = subprocess.run([sys.executable, "-m", "llv.cli", *argv], capture_output=True, text=True, env=env)
        assert r.returncode == 0
        outs.add(r.stdout)
    assert len(outs) == 1
