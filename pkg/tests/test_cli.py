import json

import pytest
from click.testing import CliRunner

from sarhawk.cli import main


@pytest.fixture
def runner():
    return CliRunner()


class TestSimRun:
    def test_single_seed(self, runner, tmp_path):
        report = tmp_path / "report.txt"
        r = runner.invoke(
            main,
            ["sim", "run", "--seeds", "4", "--drones", "2", "--report", str(report)],
        )
        assert r.exit_code == 0, r.output
        assert "Victims found" in report.read_text()

    def test_seed_range_and_json(self, runner, tmp_path):
        out = tmp_path / "runs.jsonl"
        scenario = tmp_path / "scenario.json"
        scenario.write_text(json.dumps({"deadline_s": 15.0, "victim_count": 2, "drone_count": 2}))
        r = runner.invoke(
            main,
            ["sim", "run", "--scenario", str(scenario), "--seeds", "0:3", "--json-out", str(out)],
        )
        assert r.exit_code == 0, r.output
        assert len(out.read_text().splitlines()) == 3

    def test_record_and_replay(self, runner, tmp_path):
        log = tmp_path / "session.log"
        scenario = tmp_path / "scenario.json"
        scenario.write_text(json.dumps({"deadline_s": 12.0, "victim_count": 1}))
        r = runner.invoke(
            main, ["sim", "run", "--scenario", str(scenario), "--record", str(log)]
        )
        assert r.exit_code == 0, r.output
        r2 = runner.invoke(main, ["trace", "replay", str(log)])
        assert r2.exit_code == 0, r2.output
        assert "byte-identical" in r2.output

    def test_bad_scenario_exit_code(self, runner, tmp_path):
        scenario = tmp_path / "bad.json"
        scenario.write_text('{"drone_count": 0}')
        r = runner.invoke(main, ["sim", "run", "--scenario", str(scenario)])
        assert r.exit_code == 6  # InvalidScenario


class TestGestureCli:
    def test_synth_then_eval(self, runner, tmp_path):
        train = tmp_path / "train.jsonl"
        test = tmp_path / "test.jsonl"
        r = runner.invoke(
            main,
            ["gesture", "synth", "--out-train", str(train), "--out-test", str(test),
             "--seed", "5", "--templates", "2", "--probes", "2"],
        )
        assert r.exit_code == 0, r.output
        confusion = tmp_path / "confusion.json"
        r2 = runner.invoke(
            main,
            ["gesture", "eval", "--train", str(train), "--test", str(test),
             "--emit-confusion", str(confusion)],
        )
        assert r2.exit_code == 0, r2.output
        assert "accuracy=" in r2.output
        mat = json.loads(confusion.read_text())
        assert set(mat) == {label for label in mat}


class TestFuseCli:
    def test_synth_then_eval(self, runner, tmp_path):
        corpus = tmp_path / "pairs.jsonl"
        r = runner.invoke(
            main, ["fuse", "synth", "--out", str(corpus), "--pairs", "200", "--seed", "3"]
        )
        assert r.exit_code == 0, r.output
        r2 = runner.invoke(main, ["fuse", "eval", "--paired-corpus", str(corpus)])
        assert r2.exit_code == 0, r2.output
        assert "fused=" in r2.output


class TestPlanCli:
    def test_demo_with_export(self, runner, tmp_path):
        samples = tmp_path / "traj.csv"
        r = runner.invoke(
            main,
            ["plan", "demo", "--start", "5,5,10", "--goal", "40,40,10",
             "--iterations", "1500", "--export-samples", str(samples)],
        )
        assert r.exit_code == 0, r.output
        lines = samples.read_text().splitlines()
        assert lines[0] == "t,x,y,z,vx,vy,vz,ax,ay,az"
        assert len(lines) > 10


class TestTraceCli:
    def test_corrupt_log_exit_code(self, runner, tmp_path):
        bad = tmp_path / "bad.log"
        bad.write_text("garbage\n")
        r = runner.invoke(main, ["trace", "replay", str(bad)])
        assert r.exit_code == 7  # CorruptTrace
