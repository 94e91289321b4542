"""Occlusion-recovery rate per variant on seeded recovery sequences.

    python scripts/recovery.py --runs 50 --variants baseline hns0 hns1 hns hnssa
"""
import argparse
import time

import numpy as np

from hnstrack.benchmark.synth import recovery_spec, synth_sequence
from hnstrack.imgproc import iou
from hnstrack.tracker import VARIANTS, TrackerConfig, run_sequence


def reacquired(variant, seed, window=5, **overrides):
    spec = recovery_spec(np.random.default_rng(1000 + seed), f"recovery{seed}")
    seq = synth_sequence(spec, seed=seed)
    boxes, _, _ = run_sequence(seq.frames, seq.groundtruth[0], TrackerConfig(variant=variant, **overrides))
    r = spec.occlusions[0][1]
    return any(iou(boxes[k], seq.groundtruth[k]) > 0.5 for k in range(r, min(r + window + 1, len(boxes))))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--window", type=int, default=5, help="frames after reappearance")
    ap.add_argument("--variants", nargs="+", default=list(VARIANTS), choices=VARIANTS)
    ap.add_argument("--census-downsample", type=int, default=1)
    args = ap.parse_args()
    for v in args.variants:
        t0 = time.perf_counter()
        hits = [reacquired(v, s, args.window, census_downsample=args.census_downsample) for s in range(args.runs)]
        print(f"{v:9s} recovery {np.mean(hits):.2f}  ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
