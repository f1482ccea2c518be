import csv
import io
import json

import pytest

from sfem.cli import main, resolve_scenario
from sfem.sim import Arm, Scenario, ScenarioError, ScenarioRunner, parse_feedback, quarter_schedule


def run_cli(args, capsys):
    code = main(args)
    return code, capsys.readouterr()


def test_strength_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, cap = run_cli(["strength", "--n", "10", "--delta", "0.01", "--r", "0.1", "--iters", "50", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 500
    assert rows[0].keys() >= {"activation", "strength", "event"}
    assert "terminal value 0.5623" in cap.err


def test_strength_dynamic(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _ = run_cli(["strength", "--adaptive", "--schedule", "--activations", "400", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert {r["n"] for r in rows} == {"10", "50", "20", "100"}


def test_adaptive_domain_error_exits_2(capsys):
    code, cap = run_cli(["strength", "--adaptive", "--s-init", "0.1", "--r", "0.1", "--out", "-"], capsys)
    assert code == 2
    assert "s_init > r" in cap.err


def test_missing_delta_is_usage_error(capsys):
    assert run_cli(["strength", "--out", "-"], capsys)[0] == 2


def test_bad_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["strength", "--bogus"])
    assert e.value.code == 2


def test_feedback_sim_cli(tmp_path, capsys):
    code, cap = run_cli(["feedback-sim", "--arm", "SFEM", "--out", str(tmp_path / "f.csv")], capsys)
    assert code == 0
    assert "episode 3 (ehij)" in cap.out
    assert (tmp_path / "f.csv").exists()


@pytest.mark.parametrize("name", ["scenario1", "scenario2"])
def test_run_assert_sfem(name, tmp_path, capsys):
    code, cap = run_cli(["run", name, "--assert", "--out", str(tmp_path / "t.csv")], capsys)
    assert code == 0, cap.out
    assert "ASSERT OK" in cap.out


def test_run_assert_vanilla_fails_scenario2(tmp_path, capsys):
    code, cap = run_cli(["run", "scenario2", "--arm", "VANILLA", "--assert", "--out", str(tmp_path / "t.csv")], capsys)
    assert code == 1
    assert "robot:dispose_cup" in cap.out


def test_missing_scenario_exits_2(capsys):
    assert run_cli(["run", "nope.json"], capsys)[0] == 2


def test_interactive_prompt(monkeypatch, tmp_path, capsys):
    answers = iter(["what", "-", ""])
    monkeypatch.setattr("builtins.input", lambda prompt="": next(answers, ""))
    code, cap = run_cli(["run", "scenario2", "--interactive", "--out", str(tmp_path / "t.csv")], capsys)
    assert code == 0
    assert "feedback -1" in cap.out


def test_traces_are_deterministic():
    path = resolve_scenario("scenario2")
    a = ScenarioRunner(Scenario.load(path), Arm.SFEM).run().trace_csv()
    b = ScenarioRunner(Scenario.load(path), Arm.SFEM).run().trace_csv()
    assert a == b
    assert a.splitlines()[0].startswith("time,kind,name")


@pytest.mark.parametrize("name", ["scenario1", "scenario2"])
def test_snapshot_round_trip(name):
    scen = Scenario.load(resolve_scenario(name))
    cut = next(i for i, r in enumerate(scen.timeline) if r.kind.value == "consolidate") + 1
    ref = ScenarioRunner(scen).run()
    first = ScenarioRunner(scen).run_until(cut)
    state = json.loads(json.dumps(first.export_state()))
    resumed = ScenarioRunner(scen)
    resumed.import_state(state)
    resumed.actuations = list(first.actuations)
    resumed.run()
    assert [(a.device, a.action, a.time) for a in resumed.actuations] == \
        [(a.device, a.action, a.time) for a in ref.actuations]
    assert resumed.network.to_dict() == ref.network.to_dict()


def test_scenario_validation():
    base = json.loads(resolve_scenario("scenario1").read_text())
    with pytest.raises(ScenarioError, match="timeline"):
        Scenario.from_json({"catalog": base["catalog"]})
    bad = dict(base, params={"nonsense": 1})
    with pytest.raises(ScenarioError, match="unknown keys"):
        Scenario.from_json(bad)
    back = dict(base, timeline=[{"t": 5, "kind": "consolidate"}, {"t": 1, "kind": "consolidate"}])
    with pytest.raises(ScenarioError, match="backwards"):
        Scenario.from_json(back)
    worse = dict(base, timeline=[{"t": 0, "kind": "device_event", "name": "light"}])
    with pytest.raises(ScenarioError, match=r"timeline\[0\]"):
        Scenario.from_json(worse)


def test_env_noise_is_seeded():
    doc = json.loads(resolve_scenario("scenario1").read_text())
    doc["params"] = {"env_noise": 5.0}
    scen = Scenario.from_json(doc)
    a = ScenarioRunner(scen, seed=7).run().trace_csv()
    b = ScenarioRunner(scen, seed=7).run().trace_csv()
    assert a == b


def test_parse_feedback():
    assert parse_feedback("+") == 2
    assert parse_feedback("ok") == 1
    assert parse_feedback("-") == -1
    assert parse_feedback("0.5") == 0.5
    assert parse_feedback("") is None
    with pytest.raises(ValueError):
        parse_feedback("meh")


def test_quarter_schedule():
    f = quarter_schedule([10, 50, 20, 100], 400)
    assert [f(a) for a in (0, 99, 100, 250, 399)] == [10, 10, 50, 20, 100]
