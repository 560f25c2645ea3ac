import json
from pathlib import Path

import pytest

from cegprop import io
from cegprop.cli import main
from cegprop.oracle import random_tree
from cegprop.positions import build_transporter_ceg
from cegprop.propagation import conditional_atom_probability, propagate
from cegprop.reference import example1_tree

DATA = Path(__file__).resolve().parents[1] / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_shipped_data_matches_code(example_ceg, example_obs):
    assert io.read_json(DATA / "example1.json") == io.tree_to_json(
        example1_tree(), "Treatment regime for a serious medical condition")
    assert io.read_json(DATA / "example2_observation.json") == io.observation_to_json(
        example_ceg, example_obs)


def test_tree_round_trip_bytes():
    for tree in (example1_tree(), random_tree(5, merge_bias=0.5)):
        text = io.dumps(io.tree_to_json(tree))
        again = io.dumps(io.tree_to_json(io.model_from_json(json.loads(text))))
        assert text == again


def test_ceg_round_trip_bytes(example_ceg):
    text = io.dumps(io.ceg_to_json(example_ceg))
    parsed = io.model_from_json(json.loads(text))
    assert parsed == example_ceg
    assert io.dumps(io.ceg_to_json(parsed)) == text


def test_result_round_trip_bytes(example_ceg, example_obs):
    r = propagate(example_ceg, example_obs)
    text = io.dumps(io.result_to_json(r))
    back = io.result_from_json(json.loads(text), example_ceg)
    assert back.pi_hat == r.pi_hat and back.phi == r.phi and back.counters == r.counters
    assert io.dumps(io.result_to_json(back)) == text


def test_decimal_strings_parse_exactly():
    assert io.parse_prob("0.1", "x") == 0.1
    with pytest.raises(io.ValidationError):
        io.parse_prob("zero point one", "x")


def test_observation_forms(example_ceg, example_obs):
    per = io.observation_to_json(example_ceg, example_obs, per_position=True)
    assert io.observation_from_json(per, example_ceg) == example_obs
    paths = {"format": "cegprop-observation", "version": 1,
             "paths": [["e1", "e5", "e10"], ["e2", "e6", "e11"]]}
    with pytest.raises(io.IncompatibleObservationError) as info:
        io.observation_from_json(paths, example_ceg)
    assert info.value.witness is not None


def test_cli_build(tmp_path, capsys):
    out = tmp_path / "ceg.json"
    code, stdout, _ = run(capsys, "build", DATA / "example1.json", "-o", out)
    assert code == 0
    assert "positions: 8 (incl. sink), edges: 16, atoms: 16" in stdout
    again = tmp_path / "again.json"
    code, stdout2, _ = run(capsys, "build", out, "-o", again)
    assert code == 0 and stdout2 == stdout
    assert io.model_from_json(io.read_json(again)) == io.model_from_json(io.read_json(out))


def test_cli_build_bad_sum(tmp_path, capsys):
    data = io.tree_to_json(example1_tree())
    data["tree"]["edges"][3]["prob"] = "0.7"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "build", path, "-o", tmp_path / "x.json")
    assert code == 2
    assert err.startswith("error[validation]:") and "v1" in err
    assert err.count("\n") == 1


def test_cli_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "build", tmp_path / "nope.json")
    assert code == 5 and err.startswith("error[io]:")


def test_cli_propagate(tmp_path, capsys):
    ceg = tmp_path / "ceg.json"
    run(capsys, "build", DATA / "example1.json", "-o", ceg)
    prefix = tmp_path / "res"
    code, stdout, _ = run(capsys, "propagate", ceg, DATA / "example2_observation.json",
                          "-o", prefix, "--reduce", "--dot", "--counts")
    assert code == 0
    assert "backward edge ops: 16" in stdout and "forward edge ops: 10" in stdout
    reduced = io.model_from_json(io.read_json(f"{prefix}.reduced.json"))
    assert len(reduced.edges) == 10 and "w3" not in reduced.positions
    assert Path(f"{prefix}.dot").read_text().count("->") == 16

    code, stdout, _ = run(capsys, "propagate", ceg, DATA / "example2_observation.json",
                          "-o", prefix, "--minimize")
    assert code == 0
    assert io.model_from_json(io.read_json(f"{prefix}.minimized.json")) == reduced

    code, stdout, _ = run(capsys, "query", ceg, "conditional-atom", "e1", "e4",
                          "--result", f"{prefix}.json")
    expected = conditional_atom_probability(
        propagate(build_transporter_ceg(example1_tree()),
                  io.observation_from_json(io.read_json(DATA / "example2_observation.json"),
                                           build_transporter_ceg(example1_tree()))),
        ("e1", "e4"))
    assert code == 0 and stdout.strip() == format(expected, ".12g")


def test_cli_vacuous_and_zero(tmp_path, capsys, example_ceg):
    ceg = tmp_path / "ceg.json"
    run(capsys, "build", DATA / "example1.json", "-o", ceg)
    obs = tmp_path / "vac.json"
    obs.write_text(json.dumps({"format": "cegprop-observation", "version": 1,
                               "positions": {}}))
    code, _, _ = run(capsys, "propagate", ceg, obs, "-o", tmp_path / "v")
    assert code == 0
    res = io.read_json(tmp_path / "v.json")
    assert all(e["pi_hat"] == e["prob"] for e in res["edges"])

    obs.write_text(json.dumps({"format": "cegprop-observation", "version": 1,
                               "positions": {"w0": []}}))
    code, _, err = run(capsys, "propagate", ceg, obs, "-o", tmp_path / "z")
    assert code == 4 and err.startswith("error[zero-probability]:")

    obs.write_text(json.dumps({"format": "cegprop-observation", "version": 1,
                               "paths": [["e1", "e5", "e10"], ["e2", "e6", "e11"]]}))
    code, _, err = run(capsys, "propagate", ceg, obs, "-o", tmp_path / "z")
    assert code == 3 and err.startswith("error[incompatible-observation]:")


def test_cli_query(tmp_path, capsys):
    ceg = tmp_path / "ceg.json"
    run(capsys, "build", DATA / "example1.json", "-o", ceg)
    assert run(capsys, "query", ceg, "reach", "winf")[1].strip() == "1"
    assert run(capsys, "query", ceg, "reach", "w4")[1].strip() == "0.51"
    assert run(capsys, "query", ceg, "atom", "e1", "e5", "e10")[1].strip() == "0.1"
    code, _, err = run(capsys, "query", ceg, "atom", "e1", "e6")
    assert code == 2 and err.startswith("error[")
    code, _, _ = run(capsys, "query", ceg, "reach", "w99")
    assert code == 2


def test_cli_bench(tmp_path, capsys):
    code, stdout, _ = run(capsys, "bench", "example1")
    assert code == 0 and "edge cells: 16" in stdout and "reported, not recomputed" in stdout
    code, stdout, _ = run(capsys, "bench", "model-selection", "--n", "5")
    assert code == 0 and "PASS edges 60 <= 66" in stdout
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "bench", "random", "--seed", "4", "--json", a)
    run(capsys, "bench", "random", "--seed", "4", "--json", b)
    assert a.read_bytes() == b.read_bytes()
