"""Exit codes, file formats and pipe behavior of the sensorval CLI."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

import sensorval
from sensorval.io import read_labels, read_outcomes, read_stream

GOLDEN = Path(sensorval.__file__).parent / "data" / "confidence.fis"


def run_cli(*args, stdin=None):
    return subprocess.run(
        ["sensorval", *args],
        input=stdin,
        capture_output=True,
        text=True,
        timeout=120,
    )


def _simulate_burst(path, n=400, burst="noise_burst:150:60:100"):
    return run_cli(
        "simulate",
        "--n", str(n),
        "--level", "200",
        "--noise-std", "1",
        "--seed", "11",
        "--fault", burst,
        "-o", str(path),
    )


# validate


def test_validate_clean_stream_exits_zero(tmp_path):
    stream = tmp_path / "clean.csv"
    run_cli("simulate", "--n", "100", "--level", "200", "--noise-std", "1",
            "--seed", "5", "-o", str(stream))
    out = tmp_path / "outcomes.jsonl"
    proc = run_cli("validate", str(stream), "-o", str(out))
    assert proc.returncode == 0, proc.stderr
    assert "100 samples" in proc.stderr
    assert "0 reports" in proc.stderr
    outcomes = read_outcomes(out.read_text())
    assert len(outcomes) == 100
    assert sum(o["reconstructed"] for o in outcomes) <= 5


def test_validate_burst_exits_one_with_report(tmp_path):
    stream = tmp_path / "burst.csv"
    assert _simulate_burst(stream).returncode == 0
    reports_path = tmp_path / "reports.json"
    proc = run_cli("validate", str(stream), "--reports", str(reports_path))
    assert proc.returncode == 1
    reports = json.loads(reports_path.read_text())
    assert len(reports) >= 1
    r = reports[0]
    assert 150.0 <= r["start"] <= r["end"] < 400.0
    assert r["count"] >= 10


def test_validate_malformed_csv_exits_three_with_line(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("timestamp,sensor_id,value\n0.0,s1,not-a-number\n")
    proc = run_cli("validate", str(bad))
    assert proc.returncode == 3
    assert "line 2" in proc.stderr


def test_validate_bad_flag_value_exits_two(tmp_path):
    stream = tmp_path / "s.csv"
    run_cli("simulate", "--n", "10", "-o", str(stream))
    proc = run_cli("validate", str(stream), "--accept-threshold", "1.5")
    assert proc.returncode == 2
    assert "accept" in proc.stderr


def test_validate_config_file_and_flag_override(tmp_path):
    stream = tmp_path / "s.csv"
    run_cli("simulate", "--n", "60", "--level", "200", "--noise-std", "1",
            "--seed", "3", "-o", str(stream))
    cfg = tmp_path / "pipe.cfg"
    cfg.write_text("# pipeline settings\naccept_threshold = 0.99\nwarmup = 5\n")
    out = tmp_path / "o.jsonl"
    proc = run_cli("validate", str(stream), "--config", str(cfg), "-o", str(out))
    assert proc.returncode == 0
    strict = sum(o["reconstructed"] for o in read_outcomes(out.read_text()))
    assert strict >= 50  # nothing past warmup clears 0.99
    proc = run_cli(
        "validate", str(stream), "--config", str(cfg),
        "--accept-threshold", "0.5", "-o", str(out),
    )
    assert proc.returncode == 0
    relaxed = sum(o["reconstructed"] for o in read_outcomes(out.read_text()))
    assert relaxed <= 3
    assert relaxed < strict


def test_validate_unknown_config_key_exits_two(tmp_path):
    stream = tmp_path / "s.csv"
    run_cli("simulate", "--n", "10", "-o", str(stream))
    cfg = tmp_path / "pipe.cfg"
    cfg.write_text("acceptance_threshold = 0.5\n")
    proc = run_cli("validate", str(stream), "--config", str(cfg))
    assert proc.returncode == 2
    assert "acceptance_threshold" in proc.stderr


def test_validate_custom_fis(tmp_path):
    stream = tmp_path / "s.csv"
    run_cli("simulate", "--n", "30", "--level", "200", "-o", str(stream))
    fis = tmp_path / "conf.fis"
    fis.write_text(GOLDEN.read_text())
    assert run_cli("validate", str(stream), "--fis", str(fis)).returncode == 0
    fis.write_text(GOLDEN.read_text().replace("[25 0]", "[0 0]", 1))
    proc = run_cli("validate", str(stream), "--fis", str(fis))
    assert proc.returncode == 2
    assert "sigma" in proc.stderr


# simulate


def test_simulate_constant_writes_equal_values(tmp_path):
    path = tmp_path / "c.csv"
    proc = run_cli("simulate", "--n", "5", "--level", "100", "-o", str(path))
    assert proc.returncode == 0
    _, _, values = read_stream(path.read_text())
    assert values.tolist() == [100.0] * 5


def test_simulate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        run_cli("simulate", "--n", "50", "--noise-std", "2", "--seed", "9",
                "-o", str(path))
    assert a.read_bytes() == b.read_bytes()


def test_simulate_labels_sidecar_marks_fault_window(tmp_path):
    path = tmp_path / "s5.csv"
    proc = run_cli(
        "simulate", "--n", "120", "--level", "200", "--noise-std", "1",
        "--seed", "2", "--fault", "noise_burst:60:60:3", "-o", str(path),
    )
    assert proc.returncode == 0
    labels = read_labels((tmp_path / "s5.csv.labels.csv").read_text())
    assert len(labels) == 120
    assert all(labels[i] == (i >= 60) for i in range(120))


def test_simulate_bad_fault_spec_exits_two(tmp_path):
    proc = run_cli("simulate", "--n", "10", "--fault", "meteor:0:1:5",
                   "-o", str(tmp_path / "x.csv"))
    assert proc.returncode == 2
    proc = run_cli("simulate", "--n", "10", "--fault", "spike:0:1",
                   "-o", str(tmp_path / "x.csv"))
    assert proc.returncode == 2


def test_simulate_fault_window_outside_stream_exits_two(tmp_path):
    proc = run_cli("simulate", "--n", "10", "--fault", "spike:8:5:1",
                   "-o", str(tmp_path / "x.csv"))
    assert proc.returncode == 2


# fis subcommands


def test_fis_check_golden_is_clean():
    proc = run_cli("fis", "check", str(GOLDEN))
    assert proc.returncode == 0
    assert proc.stdout.strip() == ""


def test_fis_check_warnings_exit_one(tmp_path):
    path = tmp_path / "warn.fis"
    path.write_text(GOLDEN.read_text().replace("Version=2.0", "Version=2.0\nFlavor='x'"))
    proc = run_cli("fis", "check", str(path))
    assert proc.returncode == 1
    assert "warning" in proc.stdout


def test_fis_check_parse_failure_exits_three(tmp_path):
    path = tmp_path / "broken.fis"
    path.write_text(GOLDEN.read_text().replace("NumRules=6", "NumRules=7"))
    proc = run_cli("fis", "check", str(path))
    assert proc.returncode == 3
    assert "line 46" in proc.stdout


def test_fis_canon_rewrites_to_fixpoint(tmp_path):
    messy = tmp_path / "m.fis"
    # same system, noisy formatting
    messy.write_text(
        "% exported\n" + GOLDEN.read_text().replace("Name='confidence'", "Name = 'confidence'", 1)
    )
    proc = run_cli("fis", "canon", str(messy))
    assert proc.returncode == 0
    first = messy.read_text()
    assert first == GOLDEN.read_text()
    run_cli("fis", "canon", str(messy))
    assert messy.read_text() == first


def test_fis_canon_stdin_stdout():
    proc = run_cli("fis", "canon", "-", stdin=GOLDEN.read_text())
    assert proc.returncode == 0
    assert proc.stdout == GOLDEN.read_text()


def test_fis_surface_shape_and_values(tmp_path):
    out = tmp_path / "surf.csv"
    proc = run_cli("fis", "surface", str(GOLDEN), "--grid", "50x50", "-o", str(out))
    assert proc.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y,output"
    assert len(lines) == 1 + 50 * 50
    x, y, z = (float(p) for p in lines[1].split(","))
    assert (x, y) == (0.0, 0.0)
    from sensorval import default_system, infer

    want = infer(default_system(), [200.0, 0.0, 0.0]).values[0]
    assert z == pytest.approx(want, abs=1e-12)


def test_fis_surface_named_axes_and_fixed(tmp_path):
    out = tmp_path / "surf.csv"
    proc = run_cli(
        "fis", "surface", str(GOLDEN),
        "--axes", "distance,std_dev", "--grid", "5x7",
        "--fixed", "rate_of_change=0", "-o", str(out),
    )
    assert proc.returncode == 0
    assert len(out.read_text().splitlines()) == 1 + 5 * 7


def test_fis_surface_bad_axes_exit_two():
    proc = run_cli("fis", "surface", str(GOLDEN), "--axes", "distance,distance")
    assert proc.returncode == 2


# score


def test_score_perfect_detection(tmp_path):
    stream = tmp_path / "b.csv"
    _simulate_burst(stream, burst="spike:50:1:20")
    out = tmp_path / "o.jsonl"
    run_cli("validate", str(stream), "-o", str(out))
    proc = run_cli("score", str(out), "--labels", str(tmp_path / "b.csv.labels.csv"))
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["precision"] == 1.0
    assert doc["recall"] == 1.0
    assert doc["f1"] == 1.0
    assert doc["true_positives"] >= 1


def test_score_zero_positive_note(tmp_path):
    stream = tmp_path / "clean.csv"
    run_cli("simulate", "--n", "40", "--level", "200", "-o", str(stream))
    out = tmp_path / "o.jsonl"
    run_cli("validate", str(stream), "-o", str(out))
    proc = run_cli("score", str(out), "--labels", str(tmp_path / "clean.csv.labels.csv"))
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["precision"] == 1.0
    assert "note" in doc


def test_score_length_mismatch_exits_two(tmp_path):
    out = tmp_path / "o.jsonl"
    out.write_text(
        '{"timestamp": 0.0, "sensor_id": "s", "raw": 1.0, "confidence": 1.0, '
        '"accepted": 1.0, "reconstructed": false, "flags": []}\n'
    )
    labels = tmp_path / "l.csv"
    labels.write_text("index,faulty\n0,0\n1,0\n")
    proc = run_cli("score", str(out), "--labels", str(labels))
    assert proc.returncode == 2


# composition


def test_pipe_composition_matches_file_flow(tmp_path):
    sim = ["sensorval", "simulate", "--n", "400", "--level", "200",
           "--noise-std", "1", "--seed", "11",
           "--fault", "noise_burst:150:60:100",
           "--labels", str(tmp_path / "lbl.csv")]
    piped = subprocess.run(
        " ".join(sim + ["-o", "-"])
        + " | sensorval validate - -o - | sensorval score - --labels "
        + str(tmp_path / "lbl.csv"),
        shell=True,
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert piped.returncode == 0, piped.stderr

    stream = tmp_path / "f.csv"
    subprocess.run(sim + ["-o", str(stream)], capture_output=True, timeout=120)
    out = tmp_path / "o.jsonl"
    run_cli("validate", str(stream), "-o", str(out))
    scored = run_cli("score", str(out), "--labels", str(tmp_path / "lbl.csv"))
    assert json.loads(piped.stdout) == json.loads(scored.stdout)


def test_python_dash_m_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sensorval", "fis", "check", str(GOLDEN)],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
