import json

import pytest

from qhplanes.cli import main, model_from_doc, model_to_doc
from qhplanes.qhp import construct_nonextendable, analyze
from fractions import Fraction


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip().startswith("{") else out), err


def test_analyze_chain_shorthand_as_fiber(capsys):
    code, doc, _ = run(capsys, "analyze", "[2,1,2]", "--fiber")
    assert code == 0
    g = doc["graphs"]["input"]
    assert g["discriminant"] == 0
    assert g["fiber"]["multiplicities"] == [1, 2, 1] and g["fiber"]["passed"]


def test_analyze_with_oracle(capsys):
    code, doc, _ = run(capsys, "analyze", "[2,2,2]", "--oracle")
    assert code == 0 and doc["graphs"]["input"]["discriminant"] == 4


def test_balance_blows_down(capsys):
    code, doc, _ = run(capsys, "balance", "[3,1,3]")
    res = doc["graphs"]["input"]
    assert code == 0 and res["flow"] == [{"op": "blowdown", "vertex": 1}]
    assert [v["weight"] for v in res["standard"]["vertices"]] == [-2, -2]
    assert not res["identity"]


def test_balance_of_standard_input_is_identity(capsys):
    code, doc, _ = run(capsys, "balance", "[0,0,3]")
    assert code == 0 and doc["graphs"]["input"]["identity"] and doc["graphs"]["input"]["input_standard"]


def test_construct_nonextendable(capsys):
    code, doc, _ = run(capsys, "construct", "nonextendable", "N=3", "g=0", "e=1/2,1/2,1/2")
    r = doc["report"]
    assert code == 0 and (r["dD"], r["dE"], r["h1_order"]) == (-12, 12, 1)
    assert r["alpha"] == "-1/2"


def test_construct_shorthand_defaults_to_halves(capsys):
    _, a, _ = run(capsys, "construct", "nonextendable", "N=3", "n=3")
    _, b, _ = run(capsys, "construct", "nonextendable", "N=3", "e=1/2,1/2,1/2")
    assert a == b


def test_construct_precondition_error(capsys):
    code, _, err = run(capsys, "construct", "nonextendable", "N=1", "e=1/2,1/2,1/2")
    assert code == 2 and json.loads(err)["clause"] == "SUM_TILDE_E_BELOW_N"


def test_construct_cstar(capsys):
    code, doc, _ = run(capsys, "construct", "untwisted-c1", "f0=subdiv:D1,0")
    assert code == 0 and doc["report"]["f0_type"] == "B.i"


def test_construct_affine_ruled(capsys):
    code, doc, _ = run(capsys, "construct", "affine-ruled", "fibers=[2,1,2]@0")
    assert code == 0 and doc["report"]["dD"] == -2 and doc["report"]["h1_order"] == 1


def test_enumerate_nonextendable(capsys):
    code, doc, _ = run(capsys, "enumerate", "nonextendable", "--bounds", "n=3,N=3,denom=4")
    assert code == 0 and doc["count"] == len(doc["records"]) == 68
    assert sum(1 for r in doc["records"] if r["alpha"] == "0/1") == 12
    assert all(r["passed"] for r in doc["records"])


def test_enumerate_affine_ruled(capsys):
    code, doc, _ = run(capsys, "enumerate", "affine-ruled", "--bounds", "fibers=2,vertices=5")
    assert code == 0 and doc["count"] == 76
    assert all(r["dD"] * r["dE"] < 0 for r in doc["records"])


def test_enumerate_empty_bounds(capsys):
    code, doc, _ = run(capsys, "enumerate", "nonextendable", "--bounds", "n=0,N=0")
    assert code == 0 and doc["count"] == 0


def test_fiber_tilde_e(capsys):
    code, doc, _ = run(capsys, "fiber", "--tilde-e", "1/3")
    assert code == 0 and doc["mu_C"] == 3 and doc["passed"]
    assert sorted([doc["A"], doc["B"]]) == [[2, 2], [3]]


def test_fiber_needs_input(capsys):
    code, _, err = run(capsys, "fiber")
    assert code == 2 and "error" in json.loads(err)


def test_table_format(capsys):
    code, out, _ = run(capsys, "analyze", "[2]", "--format", "table")
    assert code == 0
    lines = dict(line.split("\t") for line in out.strip().splitlines())
    assert lines["graphs.input.discriminant"] == "2"


def test_output_file_under_env_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QHPLANES_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "balance", "[3,1,3]", "--output", "report.json")
    assert code == 0 and out == ""
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["graphs"]["input"]["flow"][0]["op"] == "blowdown"


def test_bad_json_exits_two(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "analyze", str(p))
    assert code == 2 and "error" in json.loads(err)


def test_unknown_subcommand_exits_two(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_model_document_round_trip(capsys, tmp_path):
    m = construct_nonextendable(2, 0, [Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)])
    doc = model_to_doc(m)
    again = model_from_doc(json.loads(json.dumps(doc)))
    assert again.surface == m.surface and again.boundary == m.boundary
    assert analyze(again).dD == analyze(m).dD
    p = tmp_path / "model.json"
    p.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "analyze", str(p))
    assert code == 0 and out["report"]["h1_order"] == 1


@pytest.mark.parametrize("argv", [["construct", "twisted"], ["enumerate", "kodaira", "--bounds", "n=2,N=2"]])
def test_output_is_deterministic(capsys, argv):
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
