import csv
import json

import pytest

from hnstrack.benchmark.dataset import Sequence
from hnstrack.benchmark.protocols import EvalResult
from hnstrack.benchmark.report import (
    CSV_HEADER,
    TRACK_HEADER,
    attribute_report,
    build_report,
    evaluate_dataset,
    write_report,
    write_results_csv,
    write_track_csv,
)
from hnstrack.benchmark.synth import SynthSpec, synth_sequence
from hnstrack.imgproc import BoundingBox
from hnstrack.tracker import TrackerConfig, run_sequence


def _seq(name, attrs, n=4):
    box = BoundingBox(5, 5, 2, 2)
    return Sequence(name, [None] * n, [box] * n, attrs)


def _res(name, p, s, n=4, start=0):
    return EvalResult(name, start, [BoundingBox(5, 5, 2, 2)] * n, p, s, 1.0)


def test_single_sequence_row_equals_its_scores():
    table = attribute_report([_res("a", 0.8, 0.6)], [_seq("a", ("occlusion",))])
    assert table == {"occlusion": {"n_sequences": 1, "precision20": 0.8, "success_auc": 0.6}}


def test_unused_tag_is_omitted():
    ds = [_seq("a", ("occlusion",)), _seq("b", ("motion-blur",))]
    table = attribute_report([_res("a", 1.0, 0.5)], ds)
    assert list(table) == ["occlusion"]


def test_two_sequences_unweighted_mean():
    ds = [_seq("a", ("occlusion",), 10), _seq("b", ("occlusion", "low-res"), 100)]
    table = attribute_report([_res("a", 1.0, 0.2, 10), _res("b", 0.0, 0.6, 100)], ds)
    assert table["occlusion"]["precision20"] == pytest.approx(0.5)
    assert table["occlusion"]["success_auc"] == pytest.approx(0.4)
    assert table["low-res"]["precision20"] == 0.0


def test_trials_merge_by_frames_before_tag_mean():
    ds = [_seq("a", ("x",), 40)]
    rs = [_res("a", 1.0, 0.0, 30), _res("a", 0.0, 1.0, 10, start=30)]
    assert attribute_report(rs, ds)["x"]["precision20"] == pytest.approx(0.75)


def test_unknown_sequence_raises():
    with pytest.raises(KeyError):
        attribute_report([_res("ghost", 1, 1)], [_seq("a", ())])


@pytest.fixture(scope="module")
def dataset():
    specs = [
        SynthSpec(n_frames=24, velocity=(0.0, 0.0), name="still"),
        SynthSpec(n_frames=26, velocity=(1.0, 0.5), occlusions=((10, 13),), name="occ"),
    ]
    return [synth_sequence(s, seed=i) for i, s in enumerate(specs)]


def test_report_structure(dataset, tmp_path):
    cfg = TrackerConfig()
    results = evaluate_dataset(dataset, cfg, "both")
    rep = build_report("toy", dataset, cfg, results)
    assert set(rep) == {"dataset", "config", "protocol", "per_sequence", "aggregate", "attributes", "fps"}
    assert rep["config"]["confidence_threshold"] == 0.9 and rep["config"]["alpha"] == 0.005
    assert rep["protocol"]["tre_trials"] == 20 and rep["protocol"]["precision_threshold_px"] == 20
    assert [e["name"] for e in rep["per_sequence"]] == ["occ", "still"]
    assert len(rep["per_sequence"][0]["tre"]["trials"]) == 20
    assert set(rep["aggregate"]) == {"ope", "tre"}
    assert rep["fps"] is None
    still = rep["per_sequence"][1]
    assert still["ope"]["precision20"] == 1.0
    for proto in ("ope", "tre"):
        agg = rep["aggregate"][proto]
        assert 0 <= agg["precision20"] <= 1 and 0 <= agg["success_auc"] <= 1
    assert "occlusion" in rep["attributes"]["ope"]

    path = tmp_path / "r.json"
    write_report(rep, path)
    assert json.loads(path.read_text()) == rep


def test_timing_fills_fps(dataset):
    results = evaluate_dataset(dataset[:1], TrackerConfig(), "ope")
    rep = build_report("toy", dataset[:1], TrackerConfig(), results, timing=True)
    assert rep["fps"] > 0 and rep["per_sequence"][0]["ope"]["fps"] > 0


def test_parallel_matches_serial(dataset):
    cfg = TrackerConfig()
    one = evaluate_dataset(dataset, cfg, "ope", jobs=1)
    two = evaluate_dataset(dataset, cfg, "ope", jobs=2)
    key = lambda rs: [(r.sequence, r.start, r.boxes, r.precision20, r.success_auc) for r in rs]
    assert key(one["ope"]) == key(two["ope"])


def test_unknown_protocol(dataset):
    with pytest.raises(ValueError):
        evaluate_dataset(dataset, TrackerConfig(), "sre")


def test_results_csv(dataset, tmp_path):
    results = evaluate_dataset(dataset, TrackerConfig(), "both")
    path = tmp_path / "r.csv"
    write_results_csv(results, path)
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 2 + 2 * 20
    assert rows[1][:3] == ["occ", "ope", "0"] and rows[1][5] == ""
    tre_trials = [r[2] for r in rows if r[0] == "still" and r[1] == "tre"]
    assert tre_trials == [str(k) for k in range(20)]


def test_track_csv(dataset, tmp_path):
    seq = dataset[1]
    boxes, diags, _ = run_sequence(seq.frames, seq.groundtruth[0], TrackerConfig())
    path = tmp_path / "t.csv"
    write_track_csv(boxes, diags, path)
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == TRACK_HEADER
    assert len(rows) == len(seq) + 1
    assert rows[1][5] == "normal" and rows[1][6] == "nan"
    assert {r[5] for r in rows[1:]} <= {"normal", "failure"}
    assert float(rows[1][1]) == seq.groundtruth[0].cx
