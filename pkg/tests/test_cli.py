import csv
import hashlib
import json
import logging
import subprocess
import sys

import pytest

from hnstrack.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, build_parser, run_cli, tracker_config

STILL = {"n_frames": 24, "velocity": [0, 0], "name": "still"}


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def still_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    spec = root / "spec.json"
    spec.write_text(json.dumps([STILL, dict(STILL, name="still2")]))
    assert run_cli(["synth", "--spec", str(spec), "--out", str(root / "data"), "--seed", "3"]) == EXIT_OK
    return root / "data"


def test_no_arguments_is_usage_error(capsys):
    assert run_cli([]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_module_entry_point_exit_code():
    proc = subprocess.run([sys.executable, "-m", "hnstrack"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr


@pytest.mark.parametrize("args", [
    ["track", "--bogus"],
    ["frobnicate"],
    ["bench", "--dataset", "x"],  # --report missing
    ["bench", "--dataset", "x", "--report", "r.json", "--protocol", "sre"],
])
def test_bad_flags(args):
    assert run_cli(args) == EXIT_USAGE


def test_missing_paths(tmp_path, capsys):
    assert run_cli(["track", "--seq", str(tmp_path / "nope"), "--out", str(tmp_path / "t.csv")]) == EXIT_USAGE
    assert run_cli(["bench", "--dataset", str(tmp_path / "nope"), "--report", str(tmp_path / "r.json")]) == EXIT_USAGE
    assert run_cli(["synth", "--spec", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert err.count("error:") == 3


@pytest.mark.parametrize("text", ["{not json", '{"n_frames": 0}', '{"colour": 1}', "[]", '{"occlusions": [[5, 500]]}'])
def test_malformed_scenario(tmp_path, text):
    spec = tmp_path / "s.json"
    spec.write_text(text)
    assert run_cli(["synth", "--spec", str(spec), "--out", str(tmp_path / "o")]) == EXIT_USAGE


def test_runtime_failure_exit_1(tmp_path, still_dataset):
    # Output directory does not exist, so writing the track CSV fails at run time.
    seq = still_dataset / "still_000"
    assert run_cli(["track", "--seq", str(seq), "--out", str(tmp_path / "no" / "t.csv")]) == EXIT_RUNTIME


def test_bench_on_perfect_data(tmp_path, still_dataset):
    rep = tmp_path / "r.json"
    assert run_cli(["bench", "--dataset", str(still_dataset), "--protocol", "both", "--report", str(rep)]) == EXIT_OK
    doc = json.loads(rep.read_text())
    assert doc["aggregate"]["ope"]["precision20"] == 1.0
    assert doc["aggregate"]["tre"]["precision20"] == 1.0
    assert all(e["ope"]["precision20"] == 1.0 for e in doc["per_sequence"])
    rows = list(csv.DictReader(rep.with_suffix(".csv").open()))
    assert len(rows) == 2 * (1 + 20)
    assert all(float(r["precision20"]) == 1.0 for r in rows)


def test_synth_list_writes_dataset(still_dataset):
    subs = sorted(p.name for p in still_dataset.iterdir())
    assert subs == ["still2_001", "still_000"]
    assert len(list((still_dataset / "still_000" / "img").iterdir())) == 24


def test_every_command_is_deterministic(tmp_path, still_dataset):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"n_frames": 30, "occlusions": [[10, 14]], "name": "o"}))
    hashes = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        out.mkdir()
        assert run_cli(["synth", "--spec", str(spec), "--seed", "9", "--out", str(out / "seq")]) == EXIT_OK
        assert run_cli(["track", "--seq", str(out / "seq"), "--out", str(out / "t.csv")]) == EXIT_OK
        assert run_cli(["bench", "--dataset", str(still_dataset), "--protocol", "ope",
                        "--report", str(out / "r.json"), "--jobs", "2"]) == EXIT_OK
        files = sorted(p for p in out.rglob("*") if p.is_file())
        hashes.append({str(p.relative_to(out)): sha(p) for p in files})
    assert hashes[0] == hashes[1] and len(hashes[0]) > 30


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 0.01, "confidence_threshold": 0.8}))
    parser = build_parser()
    ns = parser.parse_args(["track", "--seq", "s", "--out", "o", "--config", str(cfg), "--threshold", "0.7"])
    c = tracker_config(ns)
    assert (c.alpha, c.confidence_threshold, c.variant) == (0.01, 0.7, "hns")
    ns = parser.parse_args(["track", "--seq", "s", "--out", "o"])
    d = tracker_config(ns)
    assert (d.alpha, d.confidence_threshold) == (0.005, 0.9)


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"gain": 3}))
    args = ["track", "--seq", str(tmp_path), "--out", str(tmp_path / "t.csv"), "--config", str(cfg)]
    assert run_cli(args) == EXIT_USAGE
    assert run_cli(args[:-2] + ["--alpha", "2"]) == EXIT_USAGE


def test_hns_log_controls_verbosity(monkeypatch, tmp_path, still_dataset):
    monkeypatch.setenv("HNS_LOG", "info")
    run_cli(["track", "--seq", str(still_dataset / "still_000"), "--out", str(tmp_path / "t.csv")])
    assert logging.getLogger().level == logging.INFO
    monkeypatch.setenv("HNS_LOG", "chatty")
    assert run_cli(["track", "--seq", str(still_dataset / "still_000"), "--out", str(tmp_path / "t.csv")]) == EXIT_USAGE
