import json
import random
import subprocess
import sys

import pytest

from pogames.cli import REPORT_SCHEMA, dispatch, main, strip_timing
from pogames.corpus import random_four, random_stochastic, random_three
from pogames.hardness import curated_machines
from pogames.io import parse_game, serialize_game

from conftest import g1_document


@pytest.fixture
def files(tmp_path, G0, G1, G2):
    out = {}
    for name, g in [("g0", G0), ("g1", G1), ("g2", G2)]:
        p = tmp_path / f"{name}.game"
        p.write_text(serialize_game(g))
        out[name] = str(p)
    doc = g1_document()
    doc["obs2"] = [["s", "w"], ["w", "l"]]
    p = tmp_path / "broken.game"
    p.write_text(json.dumps(doc))
    out["broken"] = str(p)
    return out


def test_solve_exit_codes(files):
    assert dispatch(["solve", files["g0"]])[0] == 0
    assert dispatch(["solve", files["g1"]])[0] == 1
    code, rep = dispatch(["solve", files["g2"]])
    assert code == 0 and rep["verdict"]["answer"] == "YES"


def test_validate_names_overlap(files):
    code, rep = dispatch(["validate", files["broken"]])
    assert code == 3
    assert "w" in rep["error"]["message"] and "overlap" in rep["error"]["message"]
    assert dispatch(["validate", files["g1"]])[0] == 0


def test_usage_errors(files):
    assert dispatch(["solve", files["g0"], "--bogus"])[0] == 3
    assert dispatch(["frobnicate"])[0] == 3
    assert dispatch(["solve", "/nonexistent.game"])[0] == 3


def test_report_shape(files):
    code, rep = dispatch(["solve", files["g0"]])
    assert rep["schema_version"] == REPORT_SCHEMA
    assert rep["command"] == ["solve", files["g0"]]
    assert rep["exit_code"] == code
    assert set(rep["inputs"]) == {files["g0"]} and len(rep["inputs"][files["g0"]]) == 64
    assert "wall_seconds" in rep["timing"]


def test_reports_are_deterministic(files, tmp_path):
    for argv in (["solve", files["g2"]], ["oracle", files["g1"]], ["solve", files["g0"], "--method", "bounded"]):
        a = strip_timing(dispatch(argv)[1])
        b = strip_timing(dispatch(argv)[1])
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_methods(files):
    assert dispatch(["solve", files["g1"], "--method", "bounded", "--m1", "1"])[0] == 1
    assert dispatch(["solve", files["g0"], "--method", "knowledge"])[0] == 0


def test_counting_method_and_tree(tmp_path, G0):
    from pogames.game import Partition, Safe

    g = G0.with_observations(Partition.perfect(2, 1), G0.obs2).with_objective(Safe(frozenset({0, 1})))
    p = tmp_path / "safe.game"
    p.write_text(serialize_game(g))
    tree = tmp_path / "tree.dot"
    code, rep = dispatch(["solve", str(p), "--method", "counting", "--tree", str(tree)])
    assert code == 0 and tree.read_text().startswith("digraph")


def test_oracle_expect(files, tmp_path):
    exp = tmp_path / "exp.json"
    exp.write_text(json.dumps({"answer": "NO"}))
    assert dispatch(["oracle", files["g1"], "--expect", str(exp)])[0] == 0
    assert dispatch(["oracle", files["g0"], "--expect", str(exp)])[0] == 1


def test_witness_round_trip(files, tmp_path):
    w = tmp_path / "w.json"
    assert dispatch(["solve", files["g2"], "--witness", str(w)])[0] == 0
    code, rep = dispatch(["verify", files["g2"], str(w)])
    assert code == 0 and rep["winning"] is True
    dot = tmp_path / "g2.dot"
    assert dispatch(["export", files["g2"], "--witness", str(w), "-o", str(dot)])[0] == 0
    assert "penwidth" in dot.read_text()


def _corpus(tmp_path):
    r = random.Random(77)
    out = []
    for i in range(12):
        g = [random_three, random_four, random_stochastic][i % 3](r) if i % 3 != 2 else random_stochastic(r, cyclic=False)
        p = tmp_path / f"c{i}.game"
        p.write_text(serialize_game(g))
        out.append((str(p), g))
    return out


def test_reduce_then_solve_conserves_verdict(tmp_path):
    for path, g in _corpus(tmp_path):
        direct = dispatch(["solve", path])[0]
        kind = type(g).__name__
        chains = {"ThreePlayerGame": [["visible"], ["uniform", "support"]],
                  "FourPlayerGame": [["four-to-three"]],
                  "StochasticGame": [["support"]]}[kind]
        for chain in chains:
            cur = path
            for i, step in enumerate(chain):
                out = f"{path}.{step}{i}.game"
                assert dispatch(["reduce", cur, "--to", step, "-o", out])[0] == 0
                cur = out
            assert dispatch(["solve", cur])[0] == direct, (path, chain)


def test_reduce_records_provenance(files, tmp_path):
    out = tmp_path / "v.game"
    dispatch(["reduce", files["g1"], "--to", "visible", "-o", str(out)])
    doc = json.loads(out.read_text())
    assert doc["provenance"]["reduction"] == "visible"
    assert parse_game(out.read_text()).n == 6
    assert dispatch(["reduce", files["g1"], "--to", "support"])[0] == 3


def test_gen_tm_manifest(tmp_path):
    m, w, n = curated_machines()["nd-accept"]
    mp = tmp_path / "m.json"
    mp.write_text(json.dumps(m.to_doc()))
    game, man = tmp_path / "g.game", tmp_path / "man.json"
    code, rep = dispatch(["gen-tm", str(mp), "--word", w, "--space-exp", str(n), "-o", str(game),
                          "--manifest", str(man)])
    assert code == 0
    manifest = json.loads(man.read_text())
    assert manifest["expected"] == "YES"
    g = parse_game(game.read_text())
    assert manifest["sizes"]["states"] == g.n
    assert sum(manifest["phase_map"].values()) == g.n
    st = tmp_path / "s.game"
    assert dispatch(["gen-tm", str(mp), "--word", w, "--space-exp", "1", "--stochastic", "-o", str(st)])[0] == 0
    assert type(parse_game(st.read_text())).__name__ == "StochasticGame"
    assert dispatch(["gen-tm", str(mp), "--space-exp", "0"])[0] == 3


def test_budget_environment(files, monkeypatch):
    monkeypatch.setenv("POGAMES_BUDGET", "1")
    code, rep = dispatch(["solve", files["g2"]])
    assert code == 2 and rep["error"]["kind"] == "budget"
    monkeypatch.setenv("POGAMES_BUDGET", "many")
    assert dispatch(["solve", files["g2"]])[0] == 3
    monkeypatch.delenv("POGAMES_BUDGET")
    assert dispatch(["solve", files["g2"], "--budget", "1"])[0] == 2


def test_sample_is_seeded(tmp_path):
    a = strip_timing(dispatch(["--seed", "3", "sample", "--count", "5", "--check"])[1])
    b = strip_timing(dispatch(["--seed", "3", "--jobs", "2", "sample", "--count", "5", "--check"])[1])
    assert a["instances"] == b["instances"] and a["all_agree"]
    dispatch(["sample", "--count", "2", "--outdir", str(tmp_path / "out")])
    assert len(list((tmp_path / "out").iterdir())) == 2


def test_main_writes_report(files, tmp_path, capsys):
    rp = tmp_path / "r.json"
    assert main(["--report", str(rp), "solve", files["g1"]]) == 1
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads(rp.read_text())


def test_document_goes_to_stdout_report_to_stderr(files, capsys):
    assert main(["export", files["g0"], "--format", "json"]) == 0
    out, err = capsys.readouterr()
    assert parse_game(out).n == 2
    assert json.loads(err)["subcommand"] == "export"


def test_console_module(files):
    proc = subprocess.run([sys.executable, "-m", "pogames", "solve", files["g1"]], capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["verdict"]["answer"] == "NO"
