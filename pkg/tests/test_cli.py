import json

import pytest

from cfp.cli import main
from cfp.scenarios import paper_scenario, scenario_to_dict


@pytest.fixture
def case3_file(tmp_path):
    path = tmp_path / "paper3.json"
    path.write_text(json.dumps(scenario_to_dict(paper_scenario(3))))
    return path


def test_run_writes_csv_and_report(case3_file, tmp_path, capsys):
    out, rep = tmp_path / "traj.csv", tmp_path / "rep.json"
    assert main(["run", "--scenario", str(case3_file), "--out", str(out), "--report", str(rep)]) == 0
    assert out.read_text().startswith("t,agent,x0,x1,consensus_error,")
    assert json.loads(rep.read_text())["converged"] is True
    assert "converged" in capsys.readouterr().err


def test_run_report_to_stdout(case3_file, capsys):
    assert main(["run", "--scenario", str(case3_file)]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "converged"


def test_overrides_shadow_file_values(case3_file, capsys):
    assert main(["run", "--scenario", str(case3_file), "--horizon", "10"]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["steps"] == 10 and rep["converged"] is False


def test_unstable_h_is_an_input_error(case3_file, capsys):
    assert main(["run", "--scenario", str(case3_file), "--h", "5"]) == 2
    assert "h = 5" in capsys.readouterr().err


def test_malformed_scenario_exits_2_with_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"problem": [1, 2,,]}')
    assert main(["run", "--scenario", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_invalid_field_exits_2_with_path(case3_file, capsys):
    d = json.loads(case3_file.read_text())
    d["config"]["dt"] = "fast"
    case3_file.write_text(json.dumps(d))
    assert main(["run", "--scenario", str(case3_file)]) == 2
    assert "config.dt" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert main(["run", "--scenario", str(tmp_path / "nope.json")]) == 2


def test_bad_arguments_exit_2():
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_check_graph_confirms_step_bound(case3_file, capsys):
    assert main(["check-graph", "--scenario", str(case3_file)]) == 0
    cap = capsys.readouterr()
    d = json.loads(cap.out)
    assert d["strongly_connected"] and d["h"] == 0.25 and d["h_admissible"] is True
    assert d["h"] < d["step_size_bound"]
    assert "rho" in cap.err


def test_check_graph_switching_schedule(tmp_path, capsys):
    path = tmp_path / "paper2.json"
    path.write_text(json.dumps(scenario_to_dict(paper_scenario(2))))
    assert main(["check-graph", "--scenario", str(path)]) == 0
    d = json.loads(capsys.readouterr().out)["delta_graph"]
    assert d["T"] == 0.4 and d["delta"] == 0.2 and d["strongly_connected"] is True
    assert 0 < d["contraction_rate"] < 1


def test_check_graph_from_graph_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"type": "digraph", "n": 2, "edges": [{"from": 0, "to": 1}]}))
    assert main(["check-graph", "--graph", str(path)]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["strongly_connected"] is False and d["spanning_tree_roots"] == [0]


def test_paper_case_dump_roundtrips(capsys):
    assert main(["paper-case", "3", "--dump-scenario"]) == 0
    assert json.loads(capsys.readouterr().out) == scenario_to_dict(paper_scenario(3))


def test_paper_case_2_writes_csv(tmp_path):
    out = tmp_path / "case2.csv"
    assert main(["paper-case", "2", "--out", str(out), "--report", str(tmp_path / "r.json")]) == 0
    assert out.exists()


def test_validate_schedule_exit_codes(capsys):
    assert main(["validate-schedule", '{"type": "harmonic", "c0": 1, "c1": 0.02}']) == 0
    assert json.loads(capsys.readouterr().out)["valid"] is True
    assert main(["validate-schedule", '{"type": "constant", "value": 1}']) == 1
    assert json.loads(capsys.readouterr().out)["squares_summable"] is False
    assert main(["validate-schedule", '{"type": "custom", "samples": [0.5, 0.25]}', "--horizon", "4"]) == 1
    assert json.loads(capsys.readouterr().out)["partial_sum"] == pytest.approx(1.25)
    assert main(["validate-schedule", "{not json"]) == 2
