import json
import subprocess
import sys
from pathlib import Path

import pytest

from ltlfleet import runner, tracelog
from ltlfleet.cli import main as cli_main
from ltlfleet.product import Plan
from ltlfleet.scenario import ScenarioError, load_scenario, scenario_from_dict

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def minimal_dict(**overrides):
    data = {
        "workspace": {
            "width": 5.0,
            "height": 6.0,
            "cols": 5,
            "rows": 6,
            "labels": {"R8": [8], "R20": [20]},
        },
        "robots": [
            {"id": 0, "start": [0.5, 0.5, 0.0], "formula": "<> R8", "mode": "comm"}
        ],
        "obstacles": [],
        "params": {"dt": 0.1},
        "seed": 1,
        "ticks": 50,
    }
    data.update(overrides)
    return data


class TestLoadScenario:
    def test_shipped_comm_scenario(self):
        sc = load_scenario(SCENARIOS / "comm_surveillance.json")
        assert len(sc.robots) == 2
        assert sc.workspace.n_regions == 30
        labeled = [r for r in sc.workspace.regions if r.labels]
        assert len(labeled) == 4
        assert sc.ticks == 1400

    def test_formula_with_unknown_label_rejected(self):
        data = minimal_dict()
        data["robots"][0]["formula"] = "<> R9"
        with pytest.raises(ScenarioError):
            scenario_from_dict(data)

    def test_empty_robot_list_valid(self):
        sc = scenario_from_dict(minimal_dict(robots=[]))
        assert sc.robots == []

    def test_pose_inside_obstacle_rejected(self):
        data = minimal_dict()
        data["workspace"]["static_obstacles"] = [1]
        with pytest.raises(ScenarioError):
            scenario_from_dict(data)

    def test_bad_mode_rejected(self):
        data = minimal_dict()
        data["robots"][0]["mode"] = "telepathy"
        with pytest.raises(ScenarioError):
            scenario_from_dict(data)

    def test_waypoint_times_must_increase(self):
        data = minimal_dict(
            obstacles=[{"id": "w", "radius": 0.3, "waypoints": [[1, 1, 1], [1, 2, 2]]}]
        )
        with pytest.raises(ScenarioError):
            scenario_from_dict(data)

    def test_invalid_json_reports_line(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\n  broken\n}")
        with pytest.raises(ScenarioError):
            load_scenario(bad)


class TestRunScenario:
    def test_summary_reproducible_from_log(self, tmp_path):
        sc = load_scenario(SCENARIOS / "comm_surveillance.json")
        rows, summary, payload = runner.run_scenario(sc, ticks=200)
        log = tmp_path / "trace.csv"
        tracelog.write_tracelog(rows, log)
        replayed = runner.replay_summary(log)
        assert replayed.to_dict() == tracelog.compute_summary(
            tracelog.read_tracelog(log)
        ).to_dict()

    def test_plans_survive_reload(self, tmp_path):
        sc = load_scenario(SCENARIOS / "comm_surveillance.json")
        rows, summary, payload = runner.run_scenario(sc, ticks=10)
        for rid, data in payload["plans"].items():
            plan = runner.plan_from_dict(data)
            assert isinstance(plan, Plan)
            pba = runner.synthesize_plan(sc, int(rid))[1]
            plan.validate(pba)


class TestCli:
    def test_check_ok(self, capsys):
        rc = cli_main(["check", "--scenario", str(SCENARIOS / "comm_surveillance.json")])
        assert rc == 0
        assert "ok:" in capsys.readouterr().out

    def test_check_invalid(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(minimal_dict(robots=[{"id": 0, "start": [9, 9, 0], "formula": "true"}])))
        rc = cli_main(["check", "--scenario", str(bad)])
        assert rc == 1

    def test_plan_command(self, tmp_path):
        out = tmp_path / "plan.json"
        rc = cli_main(
            [
                "plan",
                "--scenario",
                str(SCENARIOS / "comm_surveillance.json"),
                "--robot",
                "0",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        plan = json.loads(out.read_text())
        assert plan["robot"] == 0
        assert plan["prefix"] and plan["suffix"]

    def test_infeasible_plan_exits_nonzero(self, tmp_path):
        data = minimal_dict()
        data["workspace"]["labels"] = {"R8": [8]}
        data["workspace"]["static_obstacles"] = [8]  # target cell blocked
        data["robots"][0]["formula"] = "<> R8"
        path = tmp_path / "s.json"
        path.write_text(json.dumps(data))
        rc = cli_main(["plan", "--scenario", str(path), "--robot", "0"])
        assert rc == 2

    def test_simulate_writes_artifacts(self, tmp_path):
        log = tmp_path / "log.csv"
        summary = tmp_path / "summary.json"
        rc = cli_main(
            [
                "simulate",
                "--scenario",
                str(SCENARIOS / "comm_surveillance.json"),
                "--ticks",
                "50",
                "--log",
                str(log),
                "--summary",
                str(summary),
            ]
        )
        assert rc == 0
        assert log.exists() and summary.exists()
        payload = json.loads(summary.read_text())
        assert "stats" in payload and "plans" in payload

    def test_replay_matches_summary(self, tmp_path, capsys):
        log = tmp_path / "log.csv"
        summary = tmp_path / "summary.json"
        cli_main(
            [
                "simulate",
                "--scenario",
                str(SCENARIOS / "comm_surveillance.json"),
                "--ticks",
                "120",
                "--log",
                str(log),
                "--summary",
                str(summary),
            ]
        )
        capsys.readouterr()
        rc = cli_main(["replay", "--log", str(log)])
        assert rc == 0
        replayed = json.loads(capsys.readouterr().out)
        stored = json.loads(summary.read_text())
        assert replayed["stats"] == stored["stats"]


def test_cli_determinism_across_processes(tmp_path):
    # fresh interpreters with default hash randomization
    logs = []
    for i in range(2):
        log = tmp_path / f"log{i}.csv"
        subprocess.run(
            [
                sys.executable,
                "-m",
                "ltlfleet.cli",
                "simulate",
                "--scenario",
                str(SCENARIOS / "comm_surveillance.json"),
                "--seed",
                "3",
                "--ticks",
                "300",
                "--log",
                str(log),
            ],
            check=True,
            capture_output=True,
        )
        logs.append(log.read_bytes())
    assert logs[0] == logs[1]
