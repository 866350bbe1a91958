"""Command-line entry point: ``bracewatch {detect,synth,eval,monitor}``.

Exit codes: 0 success, 1 runtime/input error, 2 detect found a unit without
its brace, 3 monitor raised at least one alarm, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .coco import load_coco
from .config import RunConfig
from .errors import BracewatchError
from .estimator import BraceDetector
from .imaging import load_gray, write_image
from .monitor import BraceMonitor, FrameSnapshot, append_log
from .overlay import draw_overlay
from .synth import ClutterRanges, generate_corpus, load_truth

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPLETE = 2
EXIT_ALARM = 3
EXIT_USAGE = 64

IMAGE_SUFFIXES = (".png", ".ppm")

REPORT_SCHEMA = {
    "type": "object",
    "required": ["images", "config"],
    "properties": {
        "config": {"type": "object"},
        "images": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["file", "elapsed_ms", "units"],
                "properties": {
                    "file": {"type": "string"},
                    "elapsed_ms": {"type": ["number", "null"], "minimum": 0},
                    "units": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["unit_id", "brace_present", "n_lines_a", "n_lines_b",
                                         "central_hits", "intersections"],
                            "properties": {
                                "unit_id": {"type": "integer"},
                                "brace_present": {"type": "boolean"},
                                "n_lines_a": {"type": "integer", "minimum": 0},
                                "n_lines_b": {"type": "integer", "minimum": 0},
                                "central_hits": {"type": "integer", "minimum": 0},
                                "intersections": {
                                    "type": "array",
                                    "items": {"type": "array", "items": {"type": "number"},
                                              "minItems": 2, "maxItems": 2},
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(args) -> RunConfig:
    config = RunConfig.from_toml(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        config = config.replace(seed=args.seed)
    if getattr(args, "category", None) is not None:
        config = config.replace(category=args.category)
    return config


def _regions_for_file(annotations, path: Path, root: Path | None = None):
    """Regions annotated for ``path``; a single-image COCO file applies to any frame."""
    candidates = [path.name]
    if root is not None:
        candidates.insert(0, path.relative_to(root).as_posix())
    for name in candidates:
        for im in annotations.images:
            if im.file_name == name or Path(im.file_name).name == name:
                return annotations.regions_for(im.id)
    if len(annotations.images) == 1:
        return annotations.regions_for(annotations.images[0].id)
    raise BracewatchError(f"no COCO image entry matches {path.name}")


def detect_file(path: Path, regions, detector: BraceDetector, timing=True):
    image = load_gray(path)
    start = time.perf_counter()
    verdicts = detector.detect([(image, r) for r in regions])
    elapsed = (time.perf_counter() - start) * 1000.0
    entry = {
        "file": path.name,
        "elapsed_ms": round(elapsed, 3) if timing else None,
        "units": [v.to_dict() for v in verdicts],
    }
    return image, verdicts, entry


def cmd_detect(args) -> int:
    config = _load_config(args)
    annotations = load_coco(args.coco, category=config.category)
    path = Path(args.image)
    regions = _regions_for_file(annotations, path)
    detector = BraceDetector.from_config(config)
    image, verdicts, entry = detect_file(path, regions, detector, timing=not args.no_timing)
    report = {"images": [entry], "config": config.to_dict()}
    text = json.dumps(report, indent=1)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if args.overlay:
        write_image(args.overlay, draw_overlay(image, verdicts))
    missing = [v.unit_id for v in verdicts if not v.brace_present]
    print(f"{path.name}: {len(verdicts)} units, {len(missing)} without brace"
          + (f" (unit ids {', '.join(map(str, missing))})" if missing else ""), file=sys.stderr)
    return EXIT_INCOMPLETE if missing else EXIT_OK


def cmd_synth(args) -> int:
    config = _load_config(args)
    ranges = ClutterRanges(
        clutter_lines=(args.clutter_min, args.clutter_max) if args.clutter_max is not None else config.clutter.clutter_lines,
        noise_sigma=(0.0, args.noise_max) if args.noise_max is not None else config.clutter.noise_sigma,
        jitter_px=(0.0, args.jitter_max) if args.jitter_max is not None else config.clutter.jitter_px,
    )
    manifest = generate_corpus(config.synth, args.frames, args.presence_rate, ranges, config.seed, args.out,
                               n_cols=args.cols, n_rows=args.rows)
    print(f"wrote {manifest['n_frames']} frames, {manifest['n_units']} units "
          f"({manifest['n_present']} with brace) to {args.out}")
    return EXIT_OK


def _ratio(num, den):
    return num / den if den else None


def evaluate_corpus(corpus: Path, config: RunConfig) -> dict:
    manifest = json.loads((corpus / "manifest.json").read_text(encoding="utf-8"))
    annotations = load_coco(corpus / manifest.get("coco", "annotations.json"), category=config.category)
    truth = load_truth(corpus / manifest.get("truth", "truth.json"))
    detector = BraceDetector.from_config(config)
    tp = fp = fn = tn = 0
    for frame in manifest["frames"]:
        info = annotations.image_by_name(frame["file"])
        if info is None:
            raise BracewatchError(f"{frame['file']} has no COCO image entry")
        expected = truth[frame["file"]]
        image = load_gray(corpus / frame["file"])
        for verdict in detector.detect([(image, r) for r in annotations.regions_for(info.id)]):
            actual = expected[verdict.unit_id].brace_present
            if verdict.brace_present:
                tp, fp = (tp + 1, fp) if actual else (tp, fp + 1)
            else:
                fn, tn = (fn + 1, tn) if actual else (fn, tn + 1)
    total = tp + fp + fn + tn
    return {
        "tp": tp, "fp": fp, "fn": fn, "tn": tn,
        "precision": _ratio(tp, tp + fp),
        "recall": _ratio(tp, tp + fn),
        "accuracy": _ratio(tp + tn, total),
    }


def cmd_eval(args) -> int:
    config = _load_config(args)
    corpus = Path(args.corpus)
    metrics = evaluate_corpus(corpus, config)
    text = json.dumps(metrics, indent=1)
    print(text)
    out = Path(args.out) if args.out else corpus / "eval.json"
    out.write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_monitor(args) -> int:
    config = _load_config(args)
    annotations = load_coco(args.coco, category=config.category)
    frames_dir = Path(args.frames)
    frames = sorted(p for p in frames_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not frames:
        raise BracewatchError(f"no PNG/PPM frames in {frames_dir}")
    detector = BraceDetector.from_config(config)
    monitor = BraceMonitor(debounce=args.debounce)
    fired = 0
    ts = 0
    for path in frames:
        regions = _regions_for_file(annotations, path, frames_dir)
        _, verdicts, _ = detect_file(path, regions, detector, timing=False)
        ts = max(ts, int(path.stat().st_mtime))  # name order wins over mtime
        snapshot = FrameSnapshot(path.name, ts, verdicts)
        alarms = monitor.update(snapshot)
        fired += append_log(alarms, args.log)
    print(f"{len(frames)} frames, {fired} alarms")
    return EXIT_ALARM if fired else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bracewatch", description="Scaffold cross-brace inspection.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="judge every annotated unit of one image")
    p.add_argument("--image", required=True)
    p.add_argument("--coco", required=True)
    p.add_argument("--config")
    p.add_argument("--overlay", help="write an annotated PNG here")
    p.add_argument("--report", help="write the JSON report here (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--category")
    p.add_argument("--no-timing", action="store_true", help="report elapsed_ms as null for golden files")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--presence-rate", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--cols", type=int, default=1)
    p.add_argument("--rows", type=int, default=1)
    p.add_argument("--clutter-min", type=int, default=0)
    p.add_argument("--clutter-max", type=int, help="clutter segments per unit, sampled in [min, max]")
    p.add_argument("--noise-max", type=float, help="Gaussian noise sigma, sampled in [0, max]")
    p.add_argument("--jitter-max", type=float, help="structural vertex jitter in px, sampled in [0, max]")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score detection against a synthetic corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="metrics JSON path (default: <corpus>/eval.json)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("monitor", help="diff consecutive frames and log brace removals")
    p.add_argument("--frames", required=True, help="directory of frames; name order is time order")
    p.add_argument("--coco", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--debounce", type=int, default=1)
    p.set_defaults(func=cmd_monitor)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BracewatchError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"bracewatch {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
