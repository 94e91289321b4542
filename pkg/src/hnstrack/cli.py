"""``hnstrack track | bench | synth``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields, replace
from pathlib import Path

from .benchmark.dataset import DatasetError, load_dataset, load_otb_sequence, write_sequence
from .benchmark.report import PROTOCOLS, build_report, evaluate_dataset, write_report, write_results_csv, write_track_csv
from .benchmark.synth import ScenarioError, SynthSpec, synth_sequence
from .tracker import VARIANTS, TrackerConfig, run_sequence

log = logging.getLogger("hnstrack")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# flag dest -> TrackerConfig field
_CFG_FLAGS = {
    "variant": "variant",
    "threshold": "confidence_threshold",
    "alpha": "alpha",
    "instance_side": "instance_side",
    "search_factor": "search_factor",
    "min_peak_separation": "min_peak_separation",
    "max_failure_frames": "max_failure_frames",
}


def _tracker_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("tracker")
    g.add_argument("--config", type=Path, help="JSON file of tracker settings (flags override it)")
    g.add_argument("--variant", choices=VARIANTS)
    g.add_argument("--threshold", type=float, help="NNDR ambiguity threshold")
    g.add_argument("--alpha", type=float, help="query learning rate")
    g.add_argument("--instance-side", type=int)
    g.add_argument("--search-factor", type=float)
    g.add_argument("--min-peak-separation", type=int)
    g.add_argument("--max-failure-frames", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--seed", type=int, default=0, help="seed for every random draw")
    p = argparse.ArgumentParser(prog="hnstrack", description="Confidence-gated correlation tracker")
    sub = p.add_subparsers(dest="command", metavar="{track,bench,synth}")

    t = sub.add_parser("track", parents=[common], help="track one OTB-layout sequence")
    t.add_argument("--seq", type=Path, required=True)
    t.add_argument("--out", type=Path, required=True, help="per-frame CSV")
    _tracker_flags(t)

    b = sub.add_parser("bench", parents=[common], help="run OPE/TRE over a dataset")
    b.add_argument("--dataset", type=Path, required=True)
    b.add_argument("--protocol", choices=PROTOCOLS, default="both")
    b.add_argument("--report", type=Path, required=True, help="JSON report")
    b.add_argument("--csv", type=Path, help="flat per-trial CSV (default: report path with .csv)")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--timing", action="store_true",
                   help="record fps (wall-clock, so outputs stop being reproducible)")
    _tracker_flags(b)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic sequence (or a list of them)")
    s.add_argument("--spec", type=Path, required=True)
    s.add_argument("--out", type=Path, required=True)
    return p


def _configure_logging(verbose: int) -> None:
    level = os.environ.get("HNS_LOG", "").strip().upper()
    if verbose:
        lvl = logging.INFO if verbose == 1 else logging.DEBUG
    elif level:
        lvl = int(level) if level.isdigit() else getattr(logging, level, None)
        if not isinstance(lvl, int):
            raise UsageError(f"HNS_LOG: unknown level {level!r}")
    else:
        lvl = logging.WARNING
    logging.basicConfig(level=lvl, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr, force=True)


def tracker_config(ns: argparse.Namespace) -> TrackerConfig:
    """Defaults, then the ``--config`` file, then explicit flags."""
    values = {}
    if ns.config is not None:
        if not ns.config.is_file():
            raise UsageError(f"config file not found: {ns.config}")
        try:
            values = json.loads(ns.config.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed config {ns.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise UsageError(f"config {ns.config} must hold a JSON object")
        known = {f.name for f in fields(TrackerConfig)}
        unknown = set(values) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for flag, key in _CFG_FLAGS.items():
        v = getattr(ns, flag)
        if v is not None:
            values[key] = v
    try:
        return replace(TrackerConfig(), **values)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid tracker config: {exc}") from exc


def _cmd_track(ns) -> int:
    cfg = tracker_config(ns)
    if not ns.seq.is_dir():
        raise UsageError(f"sequence directory not found: {ns.seq}")
    try:
        seq = load_otb_sequence(ns.seq)
    except DatasetError as exc:
        raise UsageError(str(exc)) from exc
    boxes, diags, fps = run_sequence(seq.frames, seq.groundtruth[0], cfg)
    write_track_csv(boxes, diags, ns.out)
    log.info("%s: %d frames at %.1f fps", seq.name, len(seq), fps)
    return EXIT_OK


def _cmd_bench(ns) -> int:
    cfg = tracker_config(ns)
    if ns.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if not ns.dataset.is_dir():
        raise UsageError(f"dataset directory not found: {ns.dataset}")
    try:
        dataset = load_dataset(ns.dataset)
    except DatasetError as exc:
        raise UsageError(str(exc)) from exc
    results = evaluate_dataset(dataset, cfg, ns.protocol, ns.jobs)
    report = build_report(ns.dataset.resolve().name, dataset, cfg, results, ns.timing)
    write_report(report, ns.report)
    write_results_csv(results, ns.csv or ns.report.with_suffix(".csv"), ns.timing)
    for proto, agg in report["aggregate"].items():
        log.info("%s: precision@20 %.3f, success AUC %.3f", proto, agg["precision20"], agg["success_auc"])
    return EXIT_OK


def _load_specs(path: Path) -> list[SynthSpec]:
    if not path.is_file():
        raise UsageError(f"scenario file not found: {path}")
    try:
        raw = json.loads(path.read_text())
        items = raw if isinstance(raw, list) else [raw]
        if not items or not all(isinstance(d, dict) for d in items):
            raise ScenarioError("expected an object or a non-empty list of objects")
        return [SynthSpec.from_dict(d) for d in items]
    except (json.JSONDecodeError, ScenarioError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed scenario {path}: {exc}") from exc


def _cmd_synth(ns) -> int:
    specs = _load_specs(ns.spec)
    if len(specs) == 1:
        write_sequence(synth_sequence(specs[0], ns.seed), ns.out)
        return EXIT_OK
    # A list becomes a dataset: one sub-directory per scenario, seeds seed, seed+1, ...
    for i, spec in enumerate(specs):
        sub = f"{spec.name}_{i:03d}"
        write_sequence(synth_sequence(spec, ns.seed + i), ns.out / sub)
    return EXIT_OK


_COMMANDS = {"track": _cmd_track, "bench": _cmd_bench, "synth": _cmd_synth}


def run_cli(args: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(args)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if ns.command is None:
        parser.print_usage(sys.stderr)
        print("hnstrack: error: a command is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        _configure_logging(ns.verbose)
        return _COMMANDS[ns.command](ns)
    except UsageError as exc:
        print(f"hnstrack {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # runtime failure: report and exit 1
        log.debug("traceback", exc_info=True)
        print(f"hnstrack {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli())
