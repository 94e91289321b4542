"""Attribute breakdown and report files (JSON summary, flat CSV, per-frame track CSV)."""
from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..tracker import TrackerConfig
from .dataset import Sequence
from .protocols import MIN_SEGMENT, TRE_TRIALS, EvalResult, run_ope, run_tre, weighted_scores

PROTOCOLS = ("ope", "tre", "both")
CSV_HEADER = ("sequence", "protocol", "trial", "precision20", "success_auc", "fps")
TRACK_HEADER = ("frame", "cx", "cy", "w", "h", "mode", "nndr_ratio")


def attribute_report(results: list[EvalResult], dataset: list[Sequence]) -> dict[str, dict]:
    """Per tag, the unweighted mean over tagged sequences of each sequence's score.

    Several results for one sequence (TRE trials) are first merged with
    frame-count weights.
    """
    by_name = {s.name: s for s in dataset}
    grouped: dict[str, list[EvalResult]] = defaultdict(list)
    for r in results:
        if r.sequence not in by_name:
            raise KeyError(f"result for unknown sequence {r.sequence!r}")
        grouped[r.sequence].append(r)
    per_seq = {name: weighted_scores(rs) for name, rs in grouped.items()}
    tags: dict[str, list[str]] = defaultdict(list)
    for name in sorted(per_seq):
        for tag in by_name[name].attributes:
            tags[tag].append(name)
    table = {}
    for tag in sorted(tags):
        names = tags[tag]
        table[tag] = {
            "n_sequences": len(names),
            "precision20": float(np.mean([per_seq[n]["precision20"] for n in names])),
            "success_auc": float(np.mean([per_seq[n]["success_auc"] for n in names])),
        }
    return table


def _evaluate_sequence(args):
    seq, cfg, protocol = args
    out = {}
    if protocol in ("ope", "both"):
        out["ope"] = [run_ope(seq, cfg)]
    if protocol in ("tre", "both"):
        out["tre"] = run_tre(seq, cfg, TRE_TRIALS)
    for rs in out.values():
        for r in rs:
            r.boxes = list(r.boxes)
    return seq.name, out


def evaluate_dataset(dataset: list[Sequence], cfg: TrackerConfig, protocol: str = "both", jobs: int = 1):
    """``{protocol: [EvalResult, ...]}`` with results ordered by sequence name then trial."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}")
    work = [(s, cfg, protocol) for s in sorted(dataset, key=lambda s: s.name)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_evaluate_sequence, work))
    else:
        done = [_evaluate_sequence(w) for w in work]
    merged: dict[str, list[EvalResult]] = defaultdict(list)
    for _, out in sorted(done, key=lambda t: t[0]):
        for proto, rs in out.items():
            merged[proto].extend(rs)
    return dict(merged)


def _fps(results, timing):
    if not timing:
        return None
    return float(np.mean([r.fps for r in results]))


def build_report(dataset_name: str, dataset: list[Sequence], cfg: TrackerConfig,
                 results: dict[str, list[EvalResult]], timing: bool = False) -> dict:
    per_sequence = []
    for seq in sorted(dataset, key=lambda s: s.name):
        entry = {"name": seq.name, "n_frames": len(seq), "attributes": list(seq.attributes)}
        for proto, rs in results.items():
            mine = [r for r in rs if r.sequence == seq.name]
            entry[proto] = dict(weighted_scores(mine), fps=_fps(mine, timing))
            if proto == "tre":
                entry[proto]["trials"] = [
                    {"start": r.start, "n_frames": r.n_frames, "precision20": r.precision20,
                     "success_auc": r.success_auc, "fps": r.fps if timing else None}
                    for r in mine
                ]
        per_sequence.append(entry)
    all_results = [r for rs in results.values() for r in rs]
    return {
        "dataset": dataset_name,
        "config": asdict(cfg),
        "protocol": {
            "precision_threshold_px": 20,
            "success_thresholds": "0:0.05:1, IoU strictly greater",
            "tre_trials": TRE_TRIALS,
            "tre_min_segment": MIN_SEGMENT,
            "aggregation": "frame-count weighted",
        },
        "per_sequence": per_sequence,
        "aggregate": {proto: weighted_scores(rs) for proto, rs in results.items()},
        "attributes": {proto: attribute_report(rs, dataset) for proto, rs in results.items()},
        "fps": _fps(all_results, timing),
    }


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=False) + "\n")


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.10g}" if isinstance(v, float) else str(v)


def write_results_csv(results: dict[str, list[EvalResult]], path, timing: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for proto in sorted(results):
            trial = defaultdict(int)
            for r in results[proto]:
                w.writerow([r.sequence, proto, trial[r.sequence], _num(r.precision20),
                            _num(r.success_auc), _num(r.fps if timing else None)])
                trial[r.sequence] += 1


def write_track_csv(boxes, diagnostics, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACK_HEADER)
        for i, (b, d) in enumerate(zip(boxes, diagnostics)):
            w.writerow([i, _num(b.cx), _num(b.cy), _num(b.w), _num(b.h), d.mode_after, _num(d.nndr_ratio)])
