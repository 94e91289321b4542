"""Per-frame cost of the confidence gate and of failure-mode frames.

    python scripts/overhead.py --size 640 480 --seqs 3
"""
import argparse
import time

import numpy as np

from hnstrack.benchmark.synth import SynthSpec, recovery_spec, synth_sequence
from hnstrack.tracker import TrackerConfig, init, step


def step_times(cfg, seq):
    st = init(seq.frames[0], seq.groundtruth[0], cfg)
    normal, failure = [], []
    for f in seq.frames[1:]:
        t = time.perf_counter()
        st, _, d = step(st, f)
        (failure if d.mode_after == "failure" else normal).append(time.perf_counter() - t)
    return normal, failure


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, nargs=2, default=(640, 480))
    ap.add_argument("--seqs", type=int, default=3)
    ap.add_argument("--frames", type=int, default=60)
    args = ap.parse_args()
    clean = [synth_sequence(SynthSpec(frame_size=tuple(args.size), n_frames=args.frames, target_size=(40, 40),
                                      velocity=(2, 1)), s) for s in range(args.seqs)]
    med = {}
    for v in ("baseline", "hns0", "hns1", "hns", "hnssa"):
        ts = [t for seq in clean for t in step_times(TrackerConfig(variant=v), seq)[0]]
        med[v] = float(np.median(ts))
        print(f"{v:9s} median step {med[v] * 1e3:6.2f} ms  ratio to baseline {med[v] / med['baseline']:.3f}")
    # Failure-mode cost, pooled over occlusion sequences that force ambiguous frames.
    occ = [synth_sequence(recovery_spec(np.random.default_rng(1000 + s)), s) for s in range(10)]
    for v in ("hns0", "hns1", "hns"):
        normal, failure = [], []
        for seq in occ:
            n, f = step_times(TrackerConfig(variant=v), seq)
            normal += n
            failure += f
        if failure:
            print(f"{v:9s} failure/normal step cost {np.median(failure) / np.median(normal):.2f}x "
                  f"over {len(failure)} failure frames")


if __name__ == "__main__":
    main()
