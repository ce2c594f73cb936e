"""
Command line: generation, solving, dynamics, experiments, verification and exit codes.
"""

import json
import math
from dataclasses import replace

import pytest

from logic.model.serialization import load_model, model_to_dict, save_model
from main import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, cli

SQRT3_HALF = math.sqrt(3) / 2


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def two_path_file(tmp_path):
    profiles = tmp_path / "profiles.json"
    profiles.write_text(json.dumps({"psi_r": 1.0, "psi_rbar": 1.0, "d": 4.0}), encoding="utf-8")
    model_file = tmp_path / "model.json"
    assert cli(["gen", "two-path", "--config", str(profiles), "--out", str(model_file)]) == EXIT_OK
    return model_file


def test_help_exits_cleanly(capsys):
    assert cli(["--help"]) == EXIT_OK
    assert "experiment" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    [],
    ["solve"],
    ["solve", "--solver", "magic"],
    ["verify", "--count", "many"],
    ["gen", "pyramid"],
])
def test_usage_errors(argv):
    assert cli(argv) == EXIT_USAGE


def test_missing_config_is_a_usage_error(tmp_path):
    assert cli(["solve", "--solver", "two-path"]) == EXIT_USAGE
    assert cli(["solve", "--solver", "two-path", "--config", str(tmp_path / "absent.json")]) == EXIT_USAGE
    assert cli(["gen", "homogeneous"]) == EXIT_USAGE


def test_generate_and_solve_two_path(two_path_file, capsys):
    model = load_model(str(two_path_file))
    assert [m.demand_limit for m in model.markets] == [4.0]
    capsys.readouterr()

    assert cli(["solve", "--solver", "two-path", "--config", str(two_path_file)]) == EXIT_OK
    result = _stdout_json(capsys)
    assert result["solver"] == "two-path"
    assert result["path_valuations"]["r"] == pytest.approx(SQRT3_HALF, abs=1e-9)
    assert result["path_valuations"]["rbar"] == pytest.approx(SQRT3_HALF, abs=1e-9)
    assert result["unique_in_attributes"]


def test_global_flags_after_the_subcommand(two_path_file, tmp_path):
    out = tmp_path / "solved" / "result.json"
    assert cli(["solve", "--solver", "quartic", "--config", str(two_path_file), "--out", str(out), "--seed", "3"]) \
        == EXIT_OK
    result = json.loads(out.read_text(encoding="utf-8"))
    assert [row[0] for row in result["attributes"]] == pytest.approx([SQRT3_HALF, SQRT3_HALF], abs=1e-6)


def test_single_path_needs_a_path_choice(two_path_file):
    assert cli(["solve", "--solver", "single-path", "--config", str(two_path_file)]) == EXIT_USAGE


def test_degenerate_costs_exit_numeric(tmp_path, monopoly):
    free = replace(monopoly, isps=(replace(monopoly.isps[0], gamma=(0.0,)),))
    model_file = tmp_path / "free.json"
    save_model(free, str(model_file))
    assert cli(["solve", "--solver", "single-path", "--config", str(model_file)]) == EXIT_NUMERIC


def test_generate_homogeneous(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"Q": 2, "I": 1, "alpha1": 1.0, "alpha0": 0.0, "phi1": 0.0, "phi0": 0.0,
                                "gamma1": 1.0, "rho": 1.0, "d": 4.0}), encoding="utf-8")
    assert cli(["gen", "homogeneous", "--config", str(spec)]) == EXIT_OK
    document = _stdout_json(capsys)
    assert len(document["isps"]) == 2
    assert len(document["markets"]) == 1


def test_generate_decline(tmp_path, capsys):
    out = tmp_path / "decline"
    assert cli(["gen", "decline", "--d-r", "2", "--d-rbar", "2", "--margin", "0.1", "--out", str(out)]) == EXIT_OK
    document = _stdout_json(capsys)
    assert document["alpha_rbar0"] == pytest.approx(1.1)
    assert document["psi_rbar"] == 0.0
    assert document["delta"] < 0
    assert sorted(document["models"]) == ["competitive", "isolated"]
    assert (out / "competitive.json").exists()


def test_dynamics_with_stability(two_path_file, capsys):
    argv = ["dynamics", "--config", str(two_path_file), "--eta", "0.5", "--tol", "1e-10", "--stability",
            "--start", "random:2"]
    assert cli(argv) == EXIT_OK
    summary = _stdout_json(capsys)
    assert summary["converged"]
    assert [row[0] for row in summary["final_state"]] == pytest.approx([SQRT3_HALF, SQRT3_HALF], abs=1e-6)
    assert summary["stability"]["classification"] == "stable"


def test_dynamics_multiple_starts(two_path_file, tmp_path, capsys):
    trace_csv = tmp_path / "trace.csv"
    argv = ["dynamics", "--config", str(two_path_file), "--mode", "ode-euler", "--step", "0.2",
            "--starts", "3", "--trace-csv", str(trace_csv)]
    assert cli(argv) == EXIT_OK
    document = _stdout_json(capsys)
    assert len(document["runs"]) == 3
    assert all(run["mode"] == "ode-euler" for run in document["runs"])
    assert trace_csv.read_text(encoding="utf-8").startswith("round,n,k,value")


def test_experiment_writes_results(tmp_path, symmetric_two_path, capsys):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({
        "base_model": model_to_dict(symmetric_two_path),
        "path_counts": [1, 2],
        "samples": 2,
        "dynamics": {"step": 0.5},
    }), encoding="utf-8")
    out = tmp_path / "results"
    assert cli(["experiment", "--config", str(plan), "--out", str(out), "--workers", "2", "--seed", "9"]) == EXIT_OK
    document = _stdout_json(capsys)
    assert document["nonconverged"] == []
    assert str(out / "metrics.csv") in document["files"]
    assert (out / "plot" / "plot.gp").exists()
    assert (out / "plot" / "frac_attr_improved.dat").exists()
    assert json.loads((out / "plan.json").read_text(encoding="utf-8"))["seed"] == 9
    header = (out / "metrics.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("sample,path_count,tier")


def test_verify(capsys, tmp_path):
    assert cli(["verify", "--suite", "homogeneous", "--count", "5"]) == EXIT_OK
    assert cli(["verify", "--suite", "nope"]) == EXIT_USAGE
    assert cli(["verify", "--suite", "thm34", "--count", "5"]) == EXIT_OK

    out = tmp_path / "reports.json"
    assert cli(["--seed", "2", "verify", "--suite", "topology", "--count", "2", "--out", str(out)]) == EXIT_OK
    reports = json.loads(out.read_text(encoding="utf-8"))["reports"]
    assert reports[0]["suite"] == "topology"
    assert reports[0]["failed"] == 0
