import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from orthomeasure import io
from orthomeasure.algebra import identity, zero
from orthomeasure.cli import main
from orthomeasure.constructor import build_vector_measure
from orthomeasure.errors import InputError

HERE = Path(__file__).parent
DATA = {name: str(io.bundled_path(name)) for name in io.BUNDLED}
REGISTRY2 = str(HERE / "data" / "registry2.json")
GOLDEN = HERE / "golden" / "artifact_state_2dir.json"


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# parsing


def test_parse_errors_are_input_errors(space):
    with pytest.raises(InputError):
        io.parse_space({"atoms": []})
    with pytest.raises(InputError):
        io.parse_space({"atoms": [{"id": "a", "weight": -1.0}]})
    with pytest.raises(InputError):
        io.parse_projection({"pi1": ["zz"]}, space)
    with pytest.raises(InputError):
        io.parse_projection({"off": [{"atom": "a", "x": 1.0, "v": {"re": 1, "im": 0}}]}, space)
    with pytest.raises(InputError):
        io.parse_projection({"off": [{"atom": "a", "x": 0.5, "v": {"re": 2, "im": 0}}]}, space)
    with pytest.raises(InputError):
        io.parse_measure({"type": "nope"}, space)
    with pytest.raises(InputError):
        io.parse_registry({"directions": [{"index": True}]}, space)


def test_projection_round_trip(space):
    p = io.parse_projection(
        {"pi1": ["a"], "pi2": ["a", "d"], "off": [{"atom": "b", "x": 0.25, "v": {"re": 0.0, "im": 1.0}}]}, space
    )
    assert io.parse_projection(io.projection_to_json(p), space) == p
    assert io.parse_projection({"pi1": ["a"]}, space).pi1.members == ("a",)


def test_registry_and_artifact_round_trip(measures, registry, space):
    assert io.parse_registry(io.registry_to_json(registry), space).directions[3].x == registry[4].x
    mu = build_vector_measure(measures["state"], registry)
    spec = io.read_json(DATA["state"])
    mu2, m = io.parse_artifact(json.loads(io.dumps(io.artifact_to_json(mu, spec))))
    assert m.total() == measures["state"].total()
    assert io.parse_artifact(json.loads(io.dumps(io.artifact_to_json(mu))))[1] is None
    for d in registry:
        np.testing.assert_array_equal(mu2.solutions[d.index], mu.solutions[d.index])


# validate


def test_validate_bundled(capsys):
    for name in ("state", "frame_abs_nz", "table"):
        code, out, _ = run(capsys, "validate", DATA["space"], DATA[name])
        assert code == 0, name
        assert json.loads(out)["valid"] is True


def test_validate_broken_frame_names_atom(tmp_path, capsys):
    table = {
        "a": [
            {"n": [0, 0, 1], "value": 1.0},
            {"n": [0, 0, -1], "value": 1.0},
            {"n": [0.6, 0, 0.8], "value": 0.8},
            {"n": [-0.6, 0, -0.8], "value": 0.8},
        ]
    }
    for other in "bcd":
        table[other] = [{"n": [0, 0, 1], "value": 1.0}, {"n": [0, 0, -1], "value": 1.0}]
    spec = {"type": "frame", "family": "custom_table", "constants": {a: 2.0 for a in "abcd"}, "params": {"table": table}}
    code, out, err = run(capsys, "validate", DATA["space"], write(tmp_path, "m.json", spec))
    assert code == 1
    report = json.loads(out)
    assert report["valid"] is False
    assert {v["atom"] for v in report["violations"]} == {"a"}
    assert "atom a" in err


def test_malformed_json_exit_2(tmp_path, capsys):
    bad = write(tmp_path, "bad.json", "{not json")
    assert run(capsys, "validate", DATA["space"], bad)[0] == 2
    assert run(capsys, "validate", bad, DATA["state"])[0] == 2
    assert run(capsys, "validate", DATA["space"], str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_bad_flags_exit_2(capsys):
    base = ["verify", DATA["space"], DATA["state"], DATA["registry"]]
    assert run(capsys, *base, "--tolerance-norm", "1e-6")[0] == 2
    assert run(capsys, *base, "--sign", "2")[0] == 2
    assert run(capsys, *base, "--trials", "-1")[0] == 2
    assert run(capsys, *base, "--seed", "-1")[0] == 2
    assert run(capsys, *base, "--seed", str(2**64))[0] == 2


# build


def test_build_matches_golden(tmp_path, capsys):
    out = tmp_path / "art.json"
    code, _, _ = run(capsys, "build", DATA["space"], DATA["state"], REGISTRY2, "--out", str(out))
    assert code == 0
    assert out.read_bytes() == GOLDEN.read_bytes()
    assert len(json.loads(out.read_text())["directions"]) == 2


def test_build_empty_registry(tmp_path, capsys):
    reg = write(tmp_path, "r.json", {"directions": []})
    code, out, _ = run(capsys, "build", DATA["space"], DATA["state"], reg)
    assert code == 0
    art = json.loads(out)
    assert art["directions"] == []
    assert set(art["base"]) == {"h0", "k0"}


def test_build_duplicate_subalgebra_exit_2(tmp_path, capsys):
    reg = io.read_json(REGISTRY2)
    dup = json.loads(json.dumps(reg["directions"][0]))
    dup["index"] = 3
    reg["directions"].append(dup)
    code, _, err = run(capsys, "build", DATA["space"], DATA["state"], write(tmp_path, "r.json", reg))
    assert code == 2
    assert "same subalgebra" in err


def test_build_non_measure_names_location(tmp_path, capsys, space):
    from orthomeasure.algebra import bloch_vector

    reg = io.parse_registry(io.read_json(REGISTRY2), space)
    table = {}
    for i, a in enumerate(space.ids):
        rows = [{"n": [0, 0, 1], "value": 1.0}, {"n": [0, 0, -1], "value": 1.0}]
        for d in reg:
            n = bloch_vector(d.x[i], d.v[i]).tolist()
            bad = 0.5 if (a, d.index) == ("c", 2) else 1.0
            rows += [{"n": n, "value": bad}, {"n": [-t for t in n], "value": 1.0}]
        table[a] = rows
    spec = {"type": "frame", "family": "custom_table", "constants": {a: 2.0 for a in space.ids}, "params": {"table": table}}
    code, _, err = run(capsys, "build", DATA["space"], write(tmp_path, "m.json", spec), REGISTRY2)
    assert code == 1
    assert "atom 'c'" in err and "direction 2" in err


# eval


def test_eval_identity_zero_and_registered(tmp_path, capsys, space, measures):
    art = str(GOLDEN)
    m = measures["state"]
    code, out, _ = run(capsys, "eval", art, write(tmp_path, "one.json", {"pi1": list("abcd"), "pi2": list("abcd")}))
    assert code == 0
    res = json.loads(out)
    mu, _ = io.parse_artifact(io.read_json(art))
    assert res["first"] == {a: mu.base.h[i] for i, a in enumerate(space.ids)}
    assert abs(res["norm2"] - m.total()) <= 1e-9 * max(1.0, m.total())
    assert res["m"] == m(identity(space))
    code, out, _ = run(capsys, "eval", art, write(tmp_path, "zero.json", {}))
    res = json.loads(out)
    assert code == 0 and set(res["first"].values()) == {0.0} and res["norm2"] == 0.0 and res["m"] == m(zero(space)) == 0.0
    d = io.read_json(REGISTRY2)["directions"][1]
    proj = {"off": [{"atom": a, "x": 1.0 - d["x"][a], "v": {"re": -d["v"][a]["re"], "im": -d["v"][a]["im"]}} for a in "abcd"]}
    code, out, _ = run(capsys, "eval", art, write(tmp_path, "p.json", proj))
    res = json.loads(out)
    assert code == 0
    assert abs(res["norm2"] - res["m"]) <= 1e-9 * max(1.0, m.total())


def test_eval_unregistered_exit_1(tmp_path, capsys):
    proj = {"off": [{"atom": "a", "x": 0.5, "v": {"re": 1.0, "im": 0.0}}]}
    code, _, err = run(capsys, "eval", str(GOLDEN), write(tmp_path, "p.json", proj))
    assert code == 1
    assert "not registered" in err


# verify


def test_verify_jsonl(tmp_path, capsys):
    out = tmp_path / "rep.jsonl"
    code, _, err = run(capsys, "verify", DATA["space"], DATA["frame_abs_nz"], DATA["registry"], "--trials", "100", "--out", str(out))
    assert code == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(r["pass"] for r in recs)
    names = {r["check"] for r in recs}
    assert {"norm_law", "orthogonality_law", "additivity_law", "splitting_oracle_match", "sum_matrix_oracle"} <= names
    assert "linear-fit relative residual" in err


def test_verify_zero_trials(capsys):
    code, out, _ = run(capsys, "verify", DATA["space"], DATA["state"], DATA["registry"], "--trials", "0")
    assert code == 0
    assert all(json.loads(line)["pass"] for line in out.splitlines())


def test_verify_corrupt_exit_1(capsys):
    code, out, err = run(capsys, "verify", DATA["space"], DATA["state"], DATA["registry"], "--trials", "100", "--corrupt")
    assert code == 1
    assert "FAILED" in err
    assert any(not json.loads(line)["pass"] for line in out.splitlines())


def test_verify_other_sign(capsys):
    code, _, _ = run(capsys, "verify", DATA["space"], DATA["table"], DATA["registry"], "--trials", "100", "--sign", "-1")
    assert code == 0


def test_verify_deterministic(capsys):
    argv = ["verify", DATA["space"], DATA["state"], DATA["registry"], "--trials", "50", "--seed", "9"]
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "orthomeasure", "validate", DATA["space"], DATA["state"]],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["valid"] is True
