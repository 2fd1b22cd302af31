import json
from pathlib import Path

from click.testing import CliRunner

from crowdlens.cli import main


def _write_city(tmp_path, small_city):
    result = small_city["result"]
    (tmp_path / "calls.csv").write_bytes(result.calls_csv)
    (tmp_path / "antennas.csv").write_bytes(result.antennas_csv)
    (tmp_path / "ground_truth.json").write_bytes(result.ground_truth_json)
    return tmp_path


def test_detect_writes_artifacts_and_prints_summary(tmp_path, small_city):
    data = _write_city(tmp_path, small_city)
    out = tmp_path / "run1"
    runner = CliRunner()
    result = runner.invoke(main, [
        "detect", "--calls", str(data / "calls.csv"),
        "--antennas", str(data / "antennas.csv"), "--out", str(out)])
    assert result.exit_code == 0, result.output
    for name in ("events.json", "crowds.jsonl", "timeseries.csv",
                 "timeseries.json", "analyst_stats.json", "ingest_report.json"):
        assert (out / name).exists()
    assert "unusual_events:" in result.output
    payload = json.loads((out / "events.json").read_text())
    assert "events" in payload


def test_detect_rejects_invalid_lifetime(tmp_path, small_city):
    data = _write_city(tmp_path, small_city)
    runner = CliRunner()
    result = runner.invoke(main, [
        "detect", "--calls", str(data / "calls.csv"),
        "--antennas", str(data / "antennas.csv"), "--out", str(tmp_path / "x"),
        "--epsilon-lt", "1"])
    assert result.exit_code == 2
    assert "lifetime below 2" in result.output


def test_detect_missing_input_is_a_runtime_failure(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "detect", "--calls", str(tmp_path / "nope.csv"),
        "--antennas", str(tmp_path / "nope2.csv"), "--out", str(tmp_path / "x")])
    assert result.exit_code == 1


def test_env_vars_feed_flags_and_flags_win(tmp_path, small_city, monkeypatch):
    data = _write_city(tmp_path, small_city)
    monkeypatch.setenv("CROWDLENS_EPSILON_LT", "1")
    runner = CliRunner()
    result = runner.invoke(main, [
        "detect", "--calls", str(data / "calls.csv"),
        "--antennas", str(data / "antennas.csv"), "--out", str(tmp_path / "y")])
    assert result.exit_code == 2          # env var applied
    result = runner.invoke(main, [
        "detect", "--calls", str(data / "calls.csv"),
        "--antennas", str(data / "antennas.csv"), "--out", str(tmp_path / "y"),
        "--epsilon-lt", "4"])
    assert result.exit_code == 0          # explicit flag beats env


def test_synth_is_deterministic_via_cli(tmp_path):
    runner = CliRunner()
    args = ["synth", "--seed", "7", "--users", "150", "--antennas-count", "12",
            "--days", "1", "--events", "0"]
    assert runner.invoke(main, args + ["--out", str(tmp_path / "a")]).exit_code == 0
    assert runner.invoke(main, args + ["--out", str(tmp_path / "b")]).exit_code == 0
    for name in ("calls.csv", "antennas.csv", "ground_truth.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_synth_zero_events_gives_empty_truth(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "synth", "--seed", "3", "--users", "100", "--antennas-count", "10",
        "--days", "1", "--events", "0", "--out", str(tmp_path)])
    assert result.exit_code == 0
    truth = json.loads((tmp_path / "ground_truth.json").read_text())
    assert truth["events"] == []
    assert "rows written:" in result.output


def test_eval_prints_table1_numbers(tmp_path):
    detected = {
        "origin_epoch": 0, "step": 3600,
        "events": ([{"start": 10 * i + 1, "end": 10 * i + 2,
                     "participants": [f"p{i}_{k}" for k in range(6)]}
                    for i in range(23)]
                   + [{"start": 5000 + j, "end": 5001 + j,
                       "participants": [f"noise{j}"]} for j in range(317)]),
    }
    truth = {
        "origin_epoch": 0,
        "events": [{"event_id": f"gt-{i}", "start": 10 * i, "end": 10 * i + 3,
                    "antenna_ids": [], "participants": [f"p{i}_{k}" for k in range(10)]}
                   for i in range(25)],
    }
    (tmp_path / "events.json").write_text(json.dumps(detected))
    (tmp_path / "truth.json").write_text(json.dumps(truth))
    runner = CliRunner()
    result = runner.invoke(main, [
        "eval", "--detected", str(tmp_path / "events.json"),
        "--truth", str(tmp_path / "truth.json"),
        "--out", str(tmp_path / "result.json")])
    assert result.exit_code == 0, result.output
    assert "precision 0.0676" in result.output
    assert "recall 0.9200" in result.output
    payload = json.loads((tmp_path / "result.json").read_text())
    assert payload["matched_truth"] == 23


def test_eval_missing_truth_file_fails(tmp_path):
    (tmp_path / "events.json").write_text('{"events": []}')
    runner = CliRunner()
    result = runner.invoke(main, [
        "eval", "--detected", str(tmp_path / "events.json"),
        "--truth", str(tmp_path / "missing.json")])
    assert result.exit_code == 1


def test_eval_perfect_fixture(tmp_path):
    events = {"origin_epoch": 0, "step": 3600,
              "events": [{"start": 0, "end": 3, "participants": ["a", "b"]}]}
    truth = {"origin_epoch": 0,
             "events": [{"start": 0, "end": 3, "participants": ["a", "b"]}]}
    (tmp_path / "d.json").write_text(json.dumps(events))
    (tmp_path / "t.json").write_text(json.dumps(truth))
    runner = CliRunner()
    result = runner.invoke(main, ["eval", "--detected", str(tmp_path / "d.json"),
                                  "--truth", str(tmp_path / "t.json")])
    assert result.exit_code == 0
    assert "precision 1.0000" in result.output
    assert "recall 1.0000" in result.output


def test_profile_build_writes_store(tmp_path, small_city):
    data = _write_city(tmp_path, small_city)
    out = tmp_path / "profiles.json"
    runner = CliRunner()
    result = runner.invoke(main, [
        "profile-build", "--calls", str(data / "calls.csv"),
        "--antennas", str(data / "antennas.csv"), "--out", str(out)])
    assert result.exit_code == 0, result.output
    from crowdlens.profiles import load_profiles
    with open(out, "rb") as fh:
        store = load_profiles(fh)
    assert len(store.profiles) > 0
