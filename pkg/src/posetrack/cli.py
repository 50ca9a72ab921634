"""Command-line entry point.

    posetrack track DETECTIONS --out TRACKED.json [--config C] [--flow-dir D]
                    [--features F] [--disable-revision] [--disable-reid]
    posetrack eval PREDICTIONS GT [--config C] [--out DIR]
    posetrack synth (SCENARIO.json | --preset NAME) --out DIR [--seed N] [--uncorrupted]
    posetrack overlay ANNOTATIONS --out DIR [--width W --height H]

Exit status: 0 on success, 1 on usage errors, 2 on data errors.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import synth
from .config import ConfigError, RunConfig, load_config, with_overrides
from .formats import (AnnotationError, document_to_ground_truth, document_to_observations,
                      document_to_predictions, load_annotations, save_annotations,
                      skeleton_from_categories, tracks_to_document)
from .metrics import format_report, map_eval, mota, report_json
from .overlay import write_overlays
from .reid import read_features
from .revision import ConstantVelocityFlowProvider, DenseFileFlowProvider, IdentityFlowProvider
from .tracker import run

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posetrack", description="Multi-person pose tracking toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("track", help="assign track ids to per-frame detections")
    p.add_argument("detections")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--flow-dir")
    p.add_argument("--features")
    p.add_argument("--disable-revision", action="store_true")
    p.add_argument("--disable-reid", action="store_true")

    p = sub.add_parser("eval", help="MOTA and mAP of tracked poses against ground truth")
    p.add_argument("predictions")
    p.add_argument("ground_truth")
    p.add_argument("--config")
    p.add_argument("--out", help="directory for report.txt and report.json")

    p = sub.add_parser("synth", help="write a synthetic scenario bundle")
    p.add_argument("scenario", nargs="?", help="scenario JSON file")
    p.add_argument("--preset", choices=sorted(synth.PRESETS))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--uncorrupted", action="store_true",
                   help="drop noise, dropouts and occlusions")

    p = sub.add_parser("overlay", help="render skeletons and ids per frame")
    p.add_argument("annotations")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    return parser


def _run_config(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def cmd_track(args) -> int:
    cfg = _run_config(args)
    if args.disable_revision:
        cfg = with_overrides(cfg, enable_revision=False)
    if args.disable_reid:
        cfg = with_overrides(cfg, enable_reid=False)
    if args.flow_dir:
        provider = DenseFileFlowProvider(args.flow_dir)
    elif cfg.flow_provider == "file":
        raise UsageError("flow_provider = file needs --flow-dir")
    elif cfg.flow_provider == "identity":
        provider = IdentityFlowProvider()
    else:
        provider = ConstantVelocityFlowProvider()
    doc = load_annotations(args.detections)
    spec = skeleton_from_categories(doc.categories)
    features = read_features(args.features) if args.features else None
    observations = document_to_observations(doc, features)
    results = run(observations, spec, cfg.tracker, provider)
    save_annotations(tracks_to_document(results, doc.images, spec), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _run_config(args)
    pred_doc = load_annotations(args.predictions)
    gt_doc = load_annotations(args.ground_truth)
    spec = skeleton_from_categories(gt_doc.categories)
    if skeleton_from_categories(pred_doc.categories).K != spec.K:
        raise AnnotationError("predictions and ground truth use different skeletons")
    preds = document_to_predictions(pred_doc)
    gt = document_to_ground_truth(gt_doc)
    m = mota(preds, gt, cfg.tau_factor, spec)
    ap = map_eval(preds, gt, cfg.tau_factor, spec)
    text = format_report(m, ap)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text, encoding="utf-8")
        (out / "report.json").write_text(report_json(m, ap), encoding="utf-8")
    return EXIT_OK


def cmd_synth(args) -> int:
    if (args.scenario is None) == (args.preset is None):
        raise UsageError("give exactly one of SCENARIO or --preset")
    if args.preset:
        cfg = synth.PRESETS[args.preset]()
    else:
        try:
            cfg = synth.load_scenario(args.scenario)
        except (OSError, ValueError, TypeError, KeyError) as exc:
            raise AnnotationError(f"{args.scenario}: bad scenario ({exc})") from None
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.uncorrupted:
        cfg = cfg.uncorrupted()
    synth.write_bundle(synth.generate(cfg), args.out)
    return EXIT_OK


def cmd_overlay(args) -> int:
    if (args.width is None) != (args.height is None):
        raise UsageError("--width and --height go together")
    doc = load_annotations(args.annotations)
    spec = skeleton_from_categories(doc.categories)
    sizes = {}
    for im in doc.images:
        w, h = (args.width, args.height) if args.width else (im.width, im.height)
        if w <= 0 or h <= 0:
            raise UsageError(f"image {im.id} has no size; pass --width and --height")
        sizes[im.id] = (w, h)
    write_overlays(document_to_predictions(doc), sizes, args.out, spec)
    return EXIT_OK


COMMANDS = {"track": cmd_track, "eval": cmd_eval, "synth": cmd_synth, "overlay": cmd_overlay}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"posetrack {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AnnotationError, ConfigError, ValueError, OSError) as exc:
        print(f"posetrack {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
