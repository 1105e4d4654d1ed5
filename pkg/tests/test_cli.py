import json

import pytest
from click.testing import CliRunner

from artifact import pinwheel
from artifact.cli import cli
from artifact.exactalg import Zmod


@pytest.fixture
def run():
    runner = CliRunner()
    return lambda *args: runner.invoke(cli, [str(a) for a in args])


def test_catalog_a_has_twelve_generators(run):
    res = run("catalog", "a", "--p", 3)
    assert res.exit_code == 0
    assert len(json.loads(res.output)["generators"]) == 12


def test_unknown_flag_and_bad_values_exit_2(run):
    assert run("catalog", "a", "--p", 3, "--bogus").exit_code == 2
    assert run("catalog", "a", "--p", 2).exit_code == 2
    assert run("catalog", "a", "--p", 3, "--ring", "R").exit_code == 2
    assert run("verify", "all", "--only", "13").exit_code == 2
    assert run("pinwheel", "search", "--p", 3, "--ranks", "x").exit_code == 2


def test_dga_round_trip_through_files(run, tmp_path):
    path = tmp_path / "ce.json"
    path.write_text(run("catalog", "ce", "--p", 3, "--ring", "Z").output)
    assert run("dga", "check-d2", path).exit_code == 0
    dumped = run("--json", "dga", "dump", path)
    assert json.loads(dumped.output) == json.loads(path.read_text())


def test_check_d2_failure_exits_1(run, tmp_path):
    data = json.loads(run("catalog", "a", "--p", 3, "--ring", "Z").output)
    data["d"]["x[2]"] = [[1, []]]  # d x₂ = 1 gives d² x₃ ≠ 0
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data))
    assert run("dga", "check-d2", path).exit_code == 1


def test_malformed_json_exits_2(run, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run("dga", "check-d2", path).exit_code == 2
    path.write_text('{"generators": 3}')
    assert run("dga", "check-d2", path).exit_code == 2


def test_stabilize_and_substitute(run, tmp_path):
    dga = tmp_path / "a.json"
    dga.write_text(run("catalog", "a", "--p", 3, "--ring", "Z").output)
    pairs = tmp_path / "pairs.json"
    pairs.write_text(json.dumps([[{"family": "s", "indices": [1], "degree": 0},
                                  {"family": "t", "indices": [1], "degree": 1}]]))
    res = run("--json", "dga", "stabilize", dga, "--pairs", pairs)
    assert res.exit_code == 0 and len(json.loads(res.output)["generators"]) == 14
    images = {k: [[1, [k]]] for k in json.loads(dga.read_text())["d"]}
    images["x[2]"] = [[1, ["x[2]"]], [1, ["x[1]", "x[1]", "x[1]"]]]
    path = tmp_path / "images.json"
    path.write_text(json.dumps(images))
    res = run("--json", "dga", "substitute", dga, "--images", path)
    assert res.exit_code == 0, res.output


def test_quiver_commands(run, tmp_path):
    assert run("quiver", "verify-powers", "--n", 3, "--count", 2).exit_code == 0
    assert run("quiver", "verify-injectives", "--n", 4).exit_code == 0


def test_pinwheel_monodromy_modes(run, tmp_path):
    obj = pinwheel.random_simplified_object(3, Zmod(2), 4)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(obj.to_json()))
    res = run("--json", "pinwheel", "monodromy", "--p", 3, "--object", path, "--mode", "both")
    assert res.exit_code == 0
    assert json.loads(res.output)["agree"] is True
    assert run("pinwheel", "monodromy", "--p", 4, "--object", path).exit_code == 2


def test_pinwheel_simplify_validate_search(run, monkeypatch):
    monkeypatch.setenv("PINWHEEL_SEED", "3")
    assert run("pinwheel", "simplify", "--p", 3).exit_code == 0
    assert run("pinwheel", "validate", "--p", 3).exit_code == 0
    res = run("--json", "pinwheel", "search", "--p", 3, "--ranks", "0,0")
    assert res.exit_code == 0 and json.loads(res.output)["solutions"] == 1


def test_verify_report_is_deterministic(run, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("--report", a, "verify", "all", "--only", "1,12", "--seed", 5, "--scale", 0.2).exit_code == 0
    run("--report", b, "verify", "all", "--only", "1,12", "--seed", 5, "--scale", 0.2)
    assert a.read_bytes() == b.read_bytes()


def test_verify_failure_exits_1(run):
    assert run("verify", "all", "--only", "11", "--scale", 0.05).exit_code == 1
