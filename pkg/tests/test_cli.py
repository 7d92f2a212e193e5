"""End-to-end command-line behavior via cli.main."""

from __future__ import annotations

import json
import shutil
import subprocess

import pytest

from hazsync import cli, session_io

SHORT_CONFIG = {
    "seed": 77,
    "protocol": {"trial_duration": 12.0, "rest_duration": 5.0},
}


def run_cli(*argv) -> int:
    return cli.main([str(a) for a in argv])


@pytest.fixture()
def short_session(tmp_path):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(SHORT_CONFIG))
    out = tmp_path / "session"
    assert run_cli("simulate", "--out", out, "--config", cfg_path) == cli.EXIT_OK
    return out


def test_simulate_align_label_report_flow(short_session, tmp_path, capsys):
    assert (short_session / "manifest.json").exists()
    assert (short_session / "ground_truth.json").exists()

    assert run_cli("align", short_session) == cli.EXIT_OK
    assert (short_session / "aligned.jsonl").exists()
    assert (short_session / "sync_diagnostics.json").exists()
    out = capsys.readouterr().out
    assert "eeg01" in out and "gaze01" in out and "input01" in out

    assert run_cli("label", short_session) == cli.EXIT_OK
    assert (short_session / "detections.json").exists()

    report_dir = tmp_path / "report"
    report_dir.mkdir()
    assert (
        run_cli("report", short_session, "--out", report_dir, "--format", "both")
        == cli.EXIT_OK
    )
    assert (report_dir / "report.json").exists()
    assert (report_dir / "report.csv").exists()
    out = capsys.readouterr().out
    assert "participant-trials" in out


def test_label_matches_ground_truth_on_quiet_session(tmp_path):
    cfg = dict(SHORT_CONFIG)
    cfg["devices"] = [
        {
            "device_id": "eeg01",
            "kind": "eeg",
            "nominal_rate": 128.0,
            "clock_scale": 1.0003,
            "clock_offset": 5.25,
        },
        {
            "device_id": "gaze01",
            "kind": "gaze",
            "nominal_rate": 120.0,
            "clock_scale": 0.99985,
            "clock_offset": -3.75,
        },
        {
            "device_id": "input01",
            "kind": "input",
            "nominal_rate": 250.0,
            "clock_scale": 1.00005,
            "clock_offset": 1.5,
        },
    ]
    cfg["gaze"] = {"jitter_deg": 0.0}
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "session"
    assert run_cli("simulate", "--out", out, "--config", cfg_path) == cli.EXIT_OK
    assert run_cli("label", out) == cli.EXIT_OK

    got = session_io.read_detections(out)
    truth = session_io.read_ground_truth(out)
    planned = [session_io.detection_from_dict(d) for d in truth["detections"]]
    assert [(e.trial_id, e.hazard_id) for e in got.detections] == [
        (e.trial_id, e.hazard_id) for e in planned
    ]
    for a, b in zip(got.detections, planned):
        assert abs(a.t_press - b.t_press) <= 1e-9
        assert abs(a.t_gaze - b.t_gaze) <= 1e-9
    assert len(got.false_alarms) == len(truth["false_alarms"])


def test_label_flag_precedence_over_manifest_defaults(short_session):
    assert run_cli("label", short_session) == cli.EXIT_OK
    params = json.loads((short_session / "detections.json").read_text())["params"]
    assert params["window"] == 1.0
    assert params["cone_half_angle_deg"] == 2.0

    assert run_cli("label", short_session, "--window", 2.5, "--cone", 3.0) == cli.EXIT_OK
    params = json.loads((short_session / "detections.json").read_text())["params"]
    assert params["window"] == 2.5
    assert params["cone_half_angle_deg"] == 3.0


def test_missing_config_file_is_config_error(tmp_path, capsys):
    code = run_cli("simulate", "--out", tmp_path / "s", "--config", tmp_path / "nope.json")
    assert code == cli.EXIT_CONFIG
    assert "nope.json" in capsys.readouterr().err


def test_unknown_config_key_is_config_error(tmp_path, capsys):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps({"seed": 1, "protcol": {}}))
    code = run_cli("simulate", "--out", tmp_path / "s", "--config", cfg_path)
    assert code == cli.EXIT_CONFIG
    assert "protcol" in capsys.readouterr().err


def test_missing_session_dir_is_data_error(tmp_path, capsys):
    assert run_cli("align", tmp_path / "missing") == cli.EXIT_DATA
    assert "error:" in capsys.readouterr().err


def test_empty_marker_stream_is_sync_error(short_session, capsys):
    (short_session / "markers_eeg01.jsonl").write_text("")
    code = run_cli("align", short_session)
    assert code == cli.EXIT_SYNC
    err = capsys.readouterr().err
    assert "clock sync failed" in err
    assert "eeg01" in err


def test_report_without_detections_is_empty_error(tmp_path, capsys):
    cfg = dict(SHORT_CONFIG)
    cfg["behaviors"] = {"press_prob": 0.0, "false_alarm_prob": 0.0}
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "session"
    assert run_cli("simulate", "--out", out, "--config", cfg_path) == cli.EXIT_OK
    assert run_cli("label", out) == cli.EXIT_OK
    code = run_cli("report", out, "--out", tmp_path)
    assert code == cli.EXIT_EMPTY
    assert "error:" in capsys.readouterr().err


def test_console_script_is_installed():
    exe = shutil.which("hazsync")
    assert exe is not None
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout
