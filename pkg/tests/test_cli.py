import json

import pytest

from costcluster.cli import main
from costcluster.document import EXAMPLE_1, dump_model, build_model
from costcluster.generate import random_model


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "ex1.json"
    dump_model(build_model(EXAMPLE_1), path)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def machine(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "machine")
    assert code == 0, err
    return json.loads(out)


def test_plan_example1(capsys, model_file):
    d = machine(capsys, "plan", "--model", model_file)
    assert d["sequence"] == ["g1", "g2", "a1", "a2", "b1", "b2"]
    assert d["ecr"] == pytest.approx(4.71, abs=1e-9)
    assert d["algorithm"] == "flat"
    assert d["steps"][0]["opens"] == ["Kg"]
    assert d["steps"][-1]["cumulative_ecr"] == pytest.approx(d["ecr"], abs=1e-12)


def test_plan_human(capsys, model_file):
    code, out, _ = run(capsys, "plan", "--model", model_file, "--algorithm", "tree")
    assert code == 0 and "ECR = 4.71" in out


def test_plan_exact(capsys, model_file):
    d = machine(capsys, "plan", "--model", model_file, "--exact")
    assert d["ecr_exact"] == "471/100"


def test_plan_then_eval_round_trip(capsys, tmp_path):
    path = tmp_path / "deep.json"
    dump_model(random_model(4, 7, 4, max_depth=3), path)
    plan = machine(capsys, "plan", "--model", str(path))
    ev = machine(capsys, "eval", "--model", str(path), "--sequence", ",".join(plan["sequence"]))
    assert ev["ecr"] == pytest.approx(plan["ecr"], abs=1e-12)
    oracle = machine(capsys, "oracle", "--model", str(path))
    assert oracle["best_ecr"] == pytest.approx(plan["ecr"], abs=1e-9)


def test_root_only_plan(capsys, tmp_path):
    path = tmp_path / "root.json"
    path.write_text(json.dumps({"clusters": [{"id": "r"}], "actions": [
        {"id": "x", "cluster": "r", "cost": 2, "p": 0.2}, {"id": "y", "cluster": "r", "cost": 1, "p": 0.3}]}))
    assert machine(capsys, "plan", "--model", str(path))["sequence"] == ["y", "x"]


def test_eval_s2(capsys, model_file):
    d = machine(capsys, "eval", "--model", model_file, "--sequence", "a1,g1,a2,g2,b1,b2")
    assert d["ecr"] == pytest.approx(4.83, abs=1e-9)
    rev = machine(capsys, "eval", "--model", model_file, "--sequence", "b2,b1,a2,a1,g2,g1")
    assert rev["ecr"] >= 4.71


def test_eval_errors(capsys, model_file):
    assert run(capsys, "eval", "--model", model_file, "--sequence", "a1,a1")[0] == 2
    assert run(capsys, "eval", "--model", model_file, "--sequence", "a1,zz")[0] == 2
    assert run(capsys, "eval", "--model", model_file, "--sequence", "a1")[0] == 2


def test_oracle_and_check(capsys, model_file):
    assert machine(capsys, "oracle", "--model", model_file)["best_ecr"] == pytest.approx(4.71)
    assert machine(capsys, "check", "--model", model_file, "--sequence", "g1,g2,a1,a2,b1,b2")["total"] == 0
    assert machine(capsys, "check", "--model", model_file, "--sequence", "b1,g1,g2,a1,a2,b2")["total"] > 0


def test_oracle_too_large(capsys, tmp_path):
    path = tmp_path / "big.json"
    dump_model(random_model(0, 12, 2), path)
    assert run(capsys, "oracle", "--model", str(path))[0] == 3


def test_dispatch_mismatch(capsys, tmp_path):
    path = tmp_path / "deep.json"
    dump_model(build_model({"clusters": [{"id": "r"}, {"id": "A", "parent": "r", "open_cost": 1, "close_cost": 0},
                                         {"id": "B", "parent": "A", "open_cost": 1, "close_cost": 0}],
                            "actions": [{"id": "x", "cluster": "B", "cost": 1, "p": 0.5}]}), path)
    assert run(capsys, "plan", "--model", str(path), "--algorithm", "flat")[0] == 3


def test_invalid_model(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"clusters": [{"id": "r"}], "actions": [
        {"id": "x", "cluster": "r", "cost": -1, "p": 0.5}]}))
    code, _, err = run(capsys, "plan", "--model", str(path), "--format", "machine")
    assert code == 2
    assert json.loads(err)["issues"][0]["code"] == "action_cost"


def test_non_strict(capsys, tmp_path):
    doc = json.loads(json.dumps(EXAMPLE_1))
    doc["note"] = "extra"
    path = tmp_path / "extra.json"
    path.write_text(json.dumps(doc))
    assert run(capsys, "plan", "--model", str(path))[0] == 2
    assert run(capsys, "plan", "--model", str(path), "--no-strict")[0] == 0


def test_usage_errors(capsys, model_file):
    with pytest.raises(SystemExit) as exc:
        main(["plan"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    assert run(capsys, "bench", "--sizes", "1,10")[0] == 1
    assert run(capsys, "simulate", "--model", model_file, "--trials", "0")[0] == 1


def test_simulate(capsys, model_file):
    d = machine(capsys, "simulate", "--model", model_file, "--trials", "50000", "--seed", "2")
    assert abs(d["mean_cost"] - 4.71) <= 4 * d["std_error"]
    assert d["analytic_ecr"] == pytest.approx(4.71)
    assert machine(capsys, "simulate", "--model", model_file, "--trials", "50000", "--seed", "2") == d


def test_bench(capsys):
    d = machine(capsys, "bench", "--sizes", "100,1000", "--repeats", "1")
    assert {r["n"] for r in d["rows"]} == {100, 1000}
    e1 = [r["ecr"] for r in d["rows"] if r["n"] == 1000]
    assert e1 == pytest.approx([e1[0]] * len(e1), abs=1e-9)
