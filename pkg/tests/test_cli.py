import json
import subprocess
import sys

import jsonschema
import pytest
from conftest import schema

from singcensus.cli import main
from singcensus.polycore import MultiPoly, PolyMap, dumps, random_map


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def valid(text, name):
    obj = json.loads(text)
    jsonschema.validate(obj, schema(name))
    return obj


def test_invariants(capsys):
    code, out, _ = run(capsys, "invariants", 2, 2, 3)
    assert code == 0
    assert '"countA3":68' in out
    assert valid(out, "invariants")["countA1cube"] == 400


def test_invariants_non_admissible_fraction(capsys):
    code, out, _ = run(capsys, "invariants", 1, 3, 3)
    obj = valid(out, "invariants")
    assert code == 0 and obj["countA1cube"] is None and obj["A1cube_bracket"] == 736


def test_gate(capsys):
    code, out, _ = run(capsys, "gate", 3, 3, 5)
    assert code == 1 and valid(out, "gate")["reason"] == "gcd(d1,d2)=3>2"
    code, out, _ = run(capsys, "gate", 2, 3, 4)
    assert code == 0 and valid(out, "gate")["admissible"] is True


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["census", "--degrees", 1, 2, 2, "--bogus"], "--bogus"),
        (["census", "--degrees", 1, 2, "x"], "--degrees"),
        (["census", "--degrees", 1, 2, 2, "--classes", "A3,A9"], "--classes"),
        (["invariants", 0, 1, 1], "--degrees"),
        (["frobnicate"], "frobnicate"),
        (["census", "--degrees", 1, 2, 2, "--parallelism", 0], "parallelism"),
    ],
)
def test_usage_errors_exit_2(capsys, argv, needle):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert needle in err


def test_schema_violation_names_json_path(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nvars":3,"components":[{"terms":[{"e":[1,0],"c":[1,0]}]},{"terms":[]},{"terms":[]}]}')
    code, _, err = run(capsys, "census", "--map", bad)
    assert code == 2 and "$.components[0].terms[0].e" in err
    code, _, err = run(capsys, "census", "--map", tmp_path / "missing.json")
    assert code == 2 and "--map" in err


def test_random_map_roundtrip(capsys, tmp_path):
    out_file = tmp_path / "m.json"
    code, out, _ = run(capsys, "random-map", "--degrees", 2, 2, 3, "--homogeneous", "--seed", 4, "-o", out_file)
    assert code == 0 and out == ""
    text = out_file.read_text()
    valid(text, "polymap")
    assert text.strip() == dumps(random_map((2, 2, 3), homogeneous=True, seed=4).to_json_obj())


def test_census_command(capsys):
    code, out, _ = run(capsys, "census", "--degrees", 1, 2, 2, "--classes", "A3", "--seed", 7)
    obj = valid(out, "census")
    assert code == 0
    assert obj["classes"]["A3"]["match"] is True and obj["classes"]["A3"]["final_count"] == 2


def test_census_blocked_without_override(capsys):
    code, out, err = run(capsys, "census", "--degrees", 2, 2, 2, "--classes", "A3")
    assert code == 1 and out == "" and "not admissible" in err
    code, out, _ = run(capsys, "census", "--degrees", 2, 2, 2, "--classes", "A3", "--override-gate")
    obj = valid(out, "census")
    assert obj["supported_by_theorem"] is False and code == 0


def test_check_germ_commands(capsys, tmp_path):
    x, y, z = MultiPoly.variables(3)
    m = tmp_path / "f0.json"
    m.write_text(dumps(PolyMap([x**2, y**2, z**3]).to_json_obj()))
    code, out, _ = run(capsys, "check-germ", "--map", m)
    obj = valid(out, "germ")
    assert code == 1 and obj["verdict"] == "counterexample-found"
    code, out, _ = run(capsys, "check-germ", "--degrees", 3, 3, 5)
    assert code == 1 and valid(out, "germ")["gate_reason"] == "gcd(d1,d2)=3>2"
    code, out, _ = run(capsys, "check-germ", "--degrees", 1, 1, 1)
    assert code == 0 and valid(out, "germ")["verdict"] == "finitely-determined-evidence"
    aff = tmp_path / "aff.json"
    aff.write_text(dumps(random_map((1, 1, 1), seed=0).to_json_obj()))
    code, _, err = run(capsys, "check-germ", "--map", aff)
    assert code == 2 and "homogeneous" in err


def test_solve_command(capsys, tmp_path):
    x, y, z = MultiPoly.variables(3)
    sys_file = tmp_path / "sys.json"
    sys_file.write_text(dumps(PolyMap([x**2 - 1, y - 2, z + x]).to_json_obj()))
    code, out, _ = run(capsys, "solve", "--system", sys_file)
    obj = valid(out, "solve")
    assert code == 0 and obj["total_paths"] == 2 and len(obj["solutions"]) == 2


def test_deform_command(capsys, tmp_path):
    m = tmp_path / "m.json"
    m.write_text(dumps(random_map((1, 2, 2), seed=5).to_json_obj()))
    code, out, _ = run(capsys, "deform", "--map", m, "--t", "1", "0.5", "0.25+0j")
    obj = valid(out, "deform")
    assert code == 0 and [r["count"] for r in obj["rows"]] == [2, 2, 2]
    code, _, err = run(capsys, "deform", "--map", m, "--t", "zero")
    assert code == 2 and "--t" in err


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "singcensus", "invariants", "1", "2", "3"], capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["countA1cube"] == 4


def test_parallelism_does_not_change_bytes(capsys):
    argv = ["census", "--degrees", 1, 2, 2, "--classes", "A3,A2", "--seed", 2]
    _, a, _ = run(capsys, *argv, "--parallelism", 1)
    _, b, _ = run(capsys, *argv, "--parallelism", 4)
    assert a == b and a
