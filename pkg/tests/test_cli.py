import json

import pytest

from cellnav.cli import main
from cellnav.scenario import save_scenario

from conftest import make_scenario


@pytest.fixture
def scenario_file(tmp_path):
    # start reachable, goal reachable, bridge in between
    s = make_scenario([(500.0, 0.0), (2000.0, 300.0), (3500.0, 0.0)],
                      (0.0, 0.0), (4000.0, 0.0))
    path = tmp_path / "scenario.json"
    save_scenario(s, path)
    return path


def test_gen_writes_scenario(tmp_path, capsys):
    out = tmp_path / "gen"
    assert main(["gen", "--seed", "5", "--lambda", "0.25", "--out", str(out)]) == 0
    data = json.loads((out / "scenario.json").read_text())
    assert len(data["gbs"]) == 25
    assert data["start"] == [2000.0, 2000.0]


def test_gen_stdout_deterministic(capsys):
    assert main(["gen", "--seed", "5", "--gbs", "4"]) == 0
    first = capsys.readouterr().out
    assert main(["gen", "--seed", "5", "--gbs", "4"]) == 0
    assert capsys.readouterr().out == first


def test_feasibility_exit_codes(scenario_file, capsys):
    assert main(["feasibility", "--scenario", str(scenario_file), "--snr-db", "10"]) == 0
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["feasible"] is True
    assert main(["feasibility", "--scenario", str(scenario_file), "--snr-db", "25"]) == 2
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["feasible"] is False
    # target beyond the link budget altogether is still just infeasible
    assert main(["feasibility", "--scenario", str(scenario_file), "--snr-db", "90"]) == 2


def test_max_snr_output(scenario_file, capsys):
    assert main(["max-snr", "--scenario", str(scenario_file)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["sf_max_snr_db"] <= data["max_snr_db"] + 1e-9


def test_plan_all_methods(scenario_file, tmp_path, capsys):
    for method, extra in (("sf", []), ("m1", []), ("m2", ["--q", "8"]),
                          ("exhaustive", [])):
        out = tmp_path / f"plan-{method}"
        code = main(["plan", "--scenario", str(scenario_file), "--method", method,
                     "--snr-db", "12", "--out", str(out)] + extra)
        assert code == 0, method
        payload = json.loads((out / "plan.json").read_text())
        assert payload["worst_sampled_snr_db"] >= 12.0 - 1e-6
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t_s,x_m,y_m,snr_db,associated_gbs"
    capsys.readouterr()


def test_plan_infeasible_exit_code(scenario_file, capsys):
    assert main(["plan", "--scenario", str(scenario_file), "--method", "m1",
                 "--snr-db", "30"]) == 2
    assert "infeasible" in capsys.readouterr().err


def test_plan_stdout_json(scenario_file, capsys):
    assert main(["plan", "--scenario", str(scenario_file), "--method", "m2",
                 "--snr-db", "12"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["method"] == "m2-Q16"


def test_sweep_and_cdf_outputs(scenario_file, tmp_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", "--scenario", str(scenario_file), "--q", "4",
                 "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "rho_db,method,q,status,completion_time_s,length_m"
    assert len(lines) > 3
    assert json.loads((out / "config.json").read_text())["schema"] == "sweep-v1"

    out2 = tmp_path / "cdf"
    assert main(["cdf", "--trials", "6", "--lambda", "0.1", "--seed", "3",
                 "--out", str(out2)]) == 0
    summary = json.loads((out2 / "summary.json").read_text())
    assert summary["schema"] == "cdf-v1"
    assert summary["config"]["rng"] == "philox4x64"
    capsys.readouterr()


def test_bad_arguments_exit_one(capsys):
    assert main(["plan", "--method", "bogus"]) == 1
    assert main(["no-such-command"]) == 1
    capsys.readouterr()
