import json
import subprocess
import sys

import pytest

from builders import L, example_config, roots, six_four_aligned
from cremona_voronoi.classes import PMClass
from cremona_voronoi.cli import run
from cremona_voronoi.config import Configuration
from cremona_voronoi.maps import apply, jonquieres, quadratic, symmetric


def dump(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def call(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = run([*argv, "--out", str(out)])
    return code, json.loads(out.read_text())


@pytest.fixture
def example_files(tmp_path):
    cfg = example_config()
    a = PMClass(7, {"p0": 4, "p1": 2, "p2": 2})
    b = PMClass(7, {"p0": 4, "p1": 3, "p2": 1})
    return (
        dump(tmp_path / "config.json", cfg.to_json()),
        dump(tmp_path / "a.json", a.to_json()),
        dump(tmp_path / "b.json", b.to_json()),
    )


def test_validate_config(tmp_path, example_files):
    code, rep = call(tmp_path, "validate-config", "--config", example_files[0])
    assert code == 0 and rep["points"] == 3 and rep["curves"] == 1


def test_check_matrix_symmetric_quintic(tmp_path):
    cfg = Configuration()
    s = symmetric(cfg, roots(cfg, 6))
    assert s.characteristic() == (5, (2,) * 6)
    code, rep = call(tmp_path, "check-matrix", "--matrix", dump(tmp_path / "m.json", s.to_json()))
    assert code == 0 and rep["ok"] and rep["failing"] == []
    assert all(c["ok"] for c in rep["checks"] if c["index"] <= 8)
    assert {c["index"] for c in rep["checks"]} >= set(range(1, 9))


def test_check_matrix_failing_characteristic(tmp_path):
    code, rep = call(tmp_path, "check-matrix", "--matrix", dump(tmp_path / "m.json", {"d": 3, "m": [2, 2, 1]}))
    assert code == 1 and not rep["ok"]
    assert rep["failing"] and 1 in rep["failing"] and 2 in rep["failing"]


def test_check_class_examples(tmp_path, example_files):
    cfg, a, b = example_files
    code, rep = call(tmp_path, "check-class", "--config", cfg, "--class", a)
    assert code == 0 and rep["special"] is True and rep["inVId"] is True
    assert rep["self_intersection"] == "25"
    code, rep = call(tmp_path, "check-class", "--config", cfg, "--class", b)
    assert code == 0 and rep["special"] and len(rep["owning_cells"]) == 2


def test_check_class_false_verdicts(tmp_path):
    cfg = Configuration()
    pts = roots(cfg, 4)
    cfg.declare_curve(1, {p: 1 for p in pts})
    cfile = dump(tmp_path / "c.json", cfg.to_json())
    code, rep = call(tmp_path, "check-class", "--config", cfile, "--class", dump(tmp_path / "x.json", PMClass(7, dict.fromkeys(pts, 2)).to_json()))
    assert code == 1 and rep["in_E"]["violated"] == "Bezout"
    code, rep = call(tmp_path, "check-class", "--config", cfile, "--class", dump(tmp_path / "y.json", PMClass(3, dict.fromkeys(pts[:3], 1)).to_json()))
    assert code == 0 and rep["in_V_id"]["verdict"]
    gen = Configuration()
    qs = roots(gen, 3)
    gfile = dump(tmp_path / "g.json", gen.to_json())
    code, rep = call(tmp_path, "check-class", "--config", gfile, "--class", dump(tmp_path / "z.json", PMClass(2, dict.fromkeys(qs, 1)).to_json()))
    assert code == 1 and rep["in_V_id"]["violated"] == "TopTriple"
    assert sorted(rep["in_V_id"]["witness"]) == sorted(qs)


def test_check_class_boundary(tmp_path):
    cfg = Configuration()
    nine = roots(cfg, 9)
    cfile = dump(tmp_path / "c.json", cfg.to_json())
    code, rep = call(tmp_path, "check-class", "--config", cfile, "--class", dump(tmp_path / "b.json", PMClass(3, dict.fromkeys(nine, 1)).to_json()))
    assert code == 0 and rep["boundary"] == "NineSymmetricPure"


def test_act_and_inverse(tmp_path):
    cfg = Configuration()
    q = quadratic(cfg, *roots(cfg, 3))
    cfile = dump(tmp_path / "c.json", cfg.to_json())
    mfile = dump(tmp_path / "m.json", q.to_json())
    lfile = dump(tmp_path / "l.json", L.to_json())
    code, rep = call(tmp_path, "act", "--config", cfile, "--matrix", mfile, "--class", lfile)
    assert code == 0 and PMClass.from_json(rep["class"]) == apply(q, L, cfg)
    code, rep = call(tmp_path, "act", "--config", cfile, "--matrix", mfile, "--class", lfile, "--inverse")
    assert code == 0 and PMClass.from_json(rep["class"]).degree == 2


def test_classify(tmp_path):
    cfg, G = six_four_aligned()
    code, rep = call(tmp_path, "classify", "--config", dump(tmp_path / "c.json", cfg.to_json()), "--matrix", dump(tmp_path / "m.json", G.to_json()))
    assert code == 1 and rep["adjacency"] == "NotAdjacent" and rep["quasi_adjacency"] == "NotQuasiAdjacent"
    assert rep["characteristic"] == [6, [4, 2, 2, 2, 2, 1, 1, 1]]
    cfg = Configuration()
    q = quadratic(cfg, *roots(cfg, 3))
    code, rep = call(tmp_path, "classify", "--config", dump(tmp_path / "c2.json", cfg.to_json()), "--matrix", dump(tmp_path / "q.json", q.to_json()))
    assert code == 0 and rep["adjacent"] and rep["adjacency"] == "JonquieresCharacteristic"


def test_witness(tmp_path):
    cfg = Configuration()
    s7 = symmetric(cfg, roots(cfg, 7))
    s8 = symmetric(cfg, roots(cfg, 8))
    cfile = dump(tmp_path / "c.json", cfg.to_json())
    f7 = dump(tmp_path / "s7.json", s7.to_json())
    f8 = dump(tmp_path / "s8.json", s8.to_json())
    code, rep = call(tmp_path, "witness", "--config", cfile, "--matrix", f7)
    assert code == 0 and rep["kind"] == "intersection"
    assert PMClass.from_json(rep["witness"]) == PMClass(3, dict.fromkeys(s7.inv_base, 1))
    code, rep = call(tmp_path, "witness", "--config", cfile, "--matrix", f7, "--matrix", f8)
    assert code == 1 and rep["witness"] is None


def test_reduce_command(tmp_path):
    cfg = Configuration()
    P = roots(cfg, 5)
    c = apply(jonquieres(cfg, P[0], P[1:]), L, cfg)
    cfile = dump(tmp_path / "c.json", cfg.to_json())
    code, rep = call(tmp_path, "reduce", "--config", cfile, "--class", dump(tmp_path / "x.json", c.to_json()))
    assert code == 0 and [s["value"] for s in rep["steps"]] == ["2", "1"]
    assert rep["terminal"]["degree"] == "1"
    assert rep["new_points"] and not any(p["id"] in cfg for p in rep["new_points"])


def test_scan_command(tmp_path):
    cfg = Configuration()
    P = roots(cfg, 5)
    c = apply(jonquieres(cfg, P[0], P[1:]), L, cfg)
    cfile = dump(tmp_path / "c.json", cfg.to_json())
    argv = ["scan", "--config", cfile, "--class", dump(tmp_path / "l.json", L.to_json()), "--class", dump(tmp_path / "x.json", c.to_json()), "--samples", "9"]
    code, rep = call(tmp_path, *argv)
    assert code == 0 and len(rep["samples"]) == 9
    assert [(r["from"], r["to"]) for r in rep["regions"]] == [("0", "3/8"), ("1/2", "1/2"), ("5/8", "1")]


def test_input_errors(tmp_path, example_files):
    cfg, a, _ = example_files
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, rep = call(tmp_path, "check-class", "--config", str(bad), "--class", a)
    assert code == 2 and rep["error"] == "ParseError" and "bad.json:1:2" in rep["message"]
    code, rep = call(tmp_path, "check-class", "--config", cfg, "--class", dump(tmp_path / "u.json", {"degree": 1, "mults": {"zz": 1}}))
    assert code == 2 and rep["error"] == "SchemaError" and "u.json" in rep["message"]
    code, rep = call(tmp_path, "check-class", "--class", a)
    assert code == 2
    code, rep = call(tmp_path, "check-class", "--config", cfg, "--class", str(tmp_path / "missing.json"))
    assert code == 2 and rep["error"] == "ParseError"
    code, rep = call(tmp_path, "check-class", "--config", cfg, "--class", dump(tmp_path / "neg.json", {"degree": 1, "mults": {"p0": 2}}))
    assert code == 2 and rep["error"] == "NonPositiveClass"
    code, rep = call(tmp_path, "check-matrix", "--matrix", dump(tmp_path / "m.json", {"d": "x", "m": []}))
    assert code == 2


def test_deterministic_reports(tmp_path, example_files):
    cfg, a, b = example_files
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        run(["scan", "--config", cfg, "--class", a, "--class", b, "--samples", "5", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_text_format_and_module_entry(tmp_path, example_files):
    cfg, a, _ = example_files
    proc = subprocess.run(
        [sys.executable, "-m", "cremona_voronoi", "check-class", "--config", cfg, "--class", a, "--format", "text"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "special: true" in proc.stdout and "in_V_id.verdict: true" in proc.stdout
