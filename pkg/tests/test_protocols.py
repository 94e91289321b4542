import pytest

from hnstrack.benchmark.protocols import EvalResult, run_ope, run_tre, tre_starts, weighted_scores
from hnstrack.benchmark.synth import SynthSpec, synth_sequence
from hnstrack.imgproc import BoundingBox
from hnstrack.tracker import TrackerConfig


@pytest.fixture(scope="module")
def seq():
    return synth_sequence(SynthSpec(n_frames=45, velocity=(1.0, -0.5), occlusions=((20, 26),)), seed=4)


def test_start_indices():
    assert tre_starts(400, 20) == list(range(0, 400, 20))
    assert tre_starts(400, 1) == [0]
    assert tre_starts(19, 20) == [0]
    assert tre_starts(21, 2) == [0, 1]
    assert tre_starts(30, 3) == [0, 5, 10]
    with pytest.raises(ValueError):
        tre_starts(25, 30)


def test_half_indices_round_up():
    # k * 5 / 2 = 2.5, 7.5 -> 3, 8
    assert tre_starts(25, 3) == [0, 3, 5]
    assert tre_starts(35, 7) == [0, 3, 5, 8, 10, 13, 15]


def test_weighted_mean_of_two_trials():
    a = EvalResult("s", 0, [BoundingBox(0, 0, 1, 1)] * 30, 1.0, 0.5, 10.0)
    b = EvalResult("s", 20, [BoundingBox(0, 0, 1, 1)] * 10, 0.0, 0.9, 10.0)
    got = weighted_scores([a, b])
    assert got["precision20"] == pytest.approx(0.75)
    assert got["success_auc"] == pytest.approx((30 * 0.5 + 10 * 0.9) / 40)
    with pytest.raises(ValueError):
        weighted_scores([])


def test_single_trial_tre_is_ope(seq):
    for variant in ("baseline", "hns", "hnssa"):
        cfg = TrackerConfig(variant=variant)
        ope, (tre,) = run_ope(seq, cfg), run_tre(seq, cfg, 1)
        assert ope.boxes == tre.boxes and ope.start == tre.start == 0
        assert (ope.precision20, ope.success_auc) == (tre.precision20, tre.success_auc)


def test_tre_trials(seq):
    res = run_tre(seq, TrackerConfig(), 5)
    assert [r.start for r in res] == tre_starts(45, 5)
    assert all(r.n_frames == 45 - r.start for r in res)
    assert all(0 <= r.precision20 <= 1 and 0 <= r.success_auc <= 1 and r.fps > 0 for r in res)
    assert res[0].boxes[0] == seq.groundtruth[0]
    assert res[-1].boxes[0] == seq.groundtruth[res[-1].start]


def test_ope_needs_two_frames(seq):
    short = synth_sequence(SynthSpec(n_frames=1), seed=0)
    with pytest.raises(ValueError):
        run_ope(short)
    assert run_ope(seq, keep_diagnostics=True).diagnostics[0].source == "init"
