import json

import numpy as np
import pytest

from ggc import catalog, io
from ggc.cli import Result, emit_report, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else io.dumps(doc))
    return p


def test_verify_dense_learning(tmp_path, capsys):
    code, out = run(capsys, "catalog", "dense_learning", "-n", 3)
    assert code == 0
    p = write(tmp_path, "dl3.json", out)
    code, out = run(capsys, "verify", p, "--format", "json")
    assert code == 0
    rep = json.loads(out)
    rows = rep["results"][0]["table"]["rows"]
    assert len(rows) == 8
    for _, plus, minus in rows:
        assert plus == pytest.approx(3.0) and minus == pytest.approx(3.0)


def test_wdt_single_leaf(tmp_path, capsys):
    p = write(tmp_path, "leaf.json", {"kind": "tree", "root": "r", "alphabet": [0, 1], "n": 1,
                                      "nodes": [{"id": "r", "output": "a"}]})
    code, out = run(capsys, "wdt", p, "--format", "json")
    assert code == 0
    assert json.loads(out)["results"][0]["value"] == 0.0


def test_resistance_parallel_edges(tmp_path, capsys):
    p = write(tmp_path, "g.json", {"kind": "graph", "vertices": ["s", "t"],
                                   "edges": [["s", "t", 1.0], ["s", "t", 1.0]]})
    code, out = run(capsys, "resistance", p, "--source", "s", "--sink", "t", "--format", "json")
    assert code == 0
    res = json.loads(out)["results"][0]
    assert res["resistance"] == pytest.approx(0.5)
    assert [r[3] for r in res["table"]["rows"]] == pytest.approx([0.5, 0.5])


def test_empty_report():
    doc = json.loads(emit_report("verify", [], "json"))
    assert doc == {"command": "verify", "ok": True, "results": []}
    assert emit_report("verify", [], "text").startswith(b"verify: PASS")


def test_empty_instance_verifies(tmp_path, capsys):
    p = write(tmp_path, "e.json", {"kind": "instance", "vertices": ["s"], "boundary": ["s"], "hyperedges": [],
                                   "builder": "compose"})
    code, out = run(capsys, "verify", p, "--format", "json")
    assert code == 0
    assert json.loads(out)["ok"]


def test_same_seed_same_bytes(tmp_path, capsys):
    p = write(tmp_path, "q.json", {
        "kind": "qwalk", "domain": ["x0", "x1"], "marked": [["c"], []],
        "graph": {"kind": "graph", "vertices": ["a", "b", "c"],
                  "edges": [["a", "b", 6], ["b", "c", 6], ["c", "a", 6]]}})
    for mode in ("detection", "variable", "mnrs", "unified"):
        a = run(capsys, "qwalk", p, "--mode", mode, "--format", "json", "--seed", 5)
        b = run(capsys, "qwalk", p, "--mode", mode, "--format", "json", "--seed", 5)
        assert a == b and a[0] == 0


def test_failed_verdict_reports_location(tmp_path, capsys):
    r = catalog.dense_learning(2).result
    W = type(r.witnesses)(r.witnesses.plus * 1.5, r.witnesses.minus)
    p = write(tmp_path, "bad.json", io.problem_to_json(r.problem, W))
    code, out = run(capsys, "verify", p, "--format", "json")
    assert code == 1
    res = json.loads(out)["results"][0]
    assert not res["ok"] and res["max_violation"] > 1e-2
    assert len(res["max_violation_at"]) == 4
    code, out = run(capsys, "verify", p)
    assert code == 1 and "max violation at" in out


def test_schema_error_exit_two(tmp_path, capsys):
    p = write(tmp_path, "bad.json", '{"kind": "graph", "vertices": ["a"]')
    code, out = run(capsys, "resistance", p, "--format", "json")
    assert code == 2
    err = json.loads(out)["error"]
    assert err["type"] == "SchemaError"
    code, _ = run(capsys, "wdt", tmp_path / "missing.json")
    assert code == 2
    assert main(["nonsense"]) == 2


def test_transduce_sweep(tmp_path, capsys):
    r = catalog.dense_learning(2).result
    p = write(tmp_path, "t.json", io.problem_to_json(r.problem, r.witnesses))
    code, out = run(capsys, "transduce", p, "-K", 1, "-K", 16, "--format", "json")
    assert code == 0
    emu = json.loads(out)["results"][1]
    errors = {}
    for x, K, err, *_ in emu["table"]["rows"]:
        errors.setdefault(x, []).append(err)
    assert all(e[1] <= e[0] for e in errors.values())


def test_qwalk_finding_fraction(tmp_path, capsys):
    doc = {"kind": "qwalk", "domain": ["x"], "marked": [["a", "b", "c"]], "finding": "fraction", "eps": 1.0,
           "graph": {"kind": "graph", "vertices": ["a", "b", "c"],
                     "edges": [["a", "b", 6], ["b", "c", 6], ["c", "a", 6]]}}
    code, out = run(capsys, "qwalk", write(tmp_path, "f.json", doc), "--mode", "finding", "--format", "json")
    assert code == 0
    assert json.loads(out)["results"][0]["consistency"] <= 1e-12


def test_catalog_all_fixtures(capsys):
    code, out = run(capsys, "catalog")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["fixtures"]) == len(catalog.standard_fixtures())
    inst, builder, expected = io.instance_from_json(doc["fixtures"][0])
    np.testing.assert_allclose(io.build(inst, builder).sizes_plus, expected[0], atol=1e-9)


def test_text_table_alignment():
    out = emit_report("x", [Result("r", True, {"a": 1.0}, ["k", "value"], [["p", 1.5], ["long", 2.0]])]).decode()
    lines = [ln for ln in out.splitlines() if ln.startswith("  ") and ("value" in ln or "1.5" in ln or "long" in ln)]
    assert len({len(ln) for ln in lines}) == 1
