"""Batch command-line front-end: steel-inspect <subcommand>.

Exit codes: 0 ok, 2 empty result (e.g. structureless histogram), 3 bad
config, 4 I/O failure, 5 precondition breach.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import evalmetrics, imaging, inspection_sim, registration3d, segmentation, stitching
from .config import ConfigError, InspectConfig, load_config, write_manifest
from .histogram_peaks import (
    Histogram,
    compute_histogram,
    detect_dominant_peaks,
    peaks_to_global_threshold,
    smooth,
)

EXIT_OK = 0
EXIT_EMPTY = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_PRECONDITION = 5


def _load_cfg(path):
    return load_config(path) if path else InspectConfig()


def _ensure_dir(path):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)


def cmd_peaks(args):
    if args.input.endswith(".txt"):
        counts = np.loadtxt(args.input, dtype=np.float64)
        if counts.size != 256:
            print("peaks: count file must have 256 lines", file=sys.stderr)
            return EXIT_PRECONDITION
        hist = Histogram(counts=counts, total=float(counts.sum()))
    else:
        hist = compute_histogram(imaging.load_image(args.input))
    hist = smooth(hist)
    peaks = detect_dominant_peaks(hist)
    record = {
        "initial": [int(v) for v in peaks.initial],
        "dominant": [int(v) for v in peaks.dominant],
        "observing": [float(v) for v in peaks.observing],
    }
    if len(peaks.dominant) == 0:
        record["threshold"] = None
        out = json.dumps(record, indent=2)
        print(out) if args.out is None else _write_text(args.out, out)
        print("no structure in histogram", file=sys.stderr)
        return EXIT_EMPTY
    record["threshold"] = int(peaks_to_global_threshold(hist, peaks))
    out = json.dumps(record, indent=2)
    print(out) if args.out is None else _write_text(args.out, out)
    return EXIT_OK


def _write_text(path, text):
    _ensure_dir(path)
    with open(path, "w") as f:
        f.write(text + "\n")


def _detect_one(img, cfg, out_path, report_path, input_path):
    result = segmentation.segment_crack(img, cfg)
    if out_path:
        _ensure_dir(out_path)
        imaging.save_mask(out_path, result.mask)
    report = {
        "threshold": result.global_threshold,
        "otsu_threshold": result.otsu_threshold,
        "e_max": result.e_max,
        "dominant_peaks": [int(v) for v in result.peaks.dominant] if result.peaks else [],
        "stage_counts": result.stage_counts,
        "no_structure": result.no_structure,
    }
    if report_path:
        _write_text(report_path, json.dumps(report, indent=2))
    if result.no_structure:
        print("no structure in histogram", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def cmd_detect(args):
    cfg = _load_cfg(args.config)
    img = imaging.load_image(args.input)
    code = _detect_one(img, cfg, args.out, args.report, args.input)
    if code == EXIT_OK and args.out:
        write_manifest(os.path.splitext(args.out)[0] + ".manifest.json",
                       cfg, inputs=[args.input])
    return code


def _load_captures(list_path):
    with open(list_path) as f:
        entries = json.load(f)
    base = os.path.dirname(os.path.abspath(list_path))
    images, poses = [], []
    for e in entries:
        p = e["image_path"]
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        images.append(imaging.load_image(p))
        poses.append(stitching.CapturePose(
            odom_x_mm=float(e["odom_x_mm"]),
            odom_y_mm=float(e["odom_y_mm"]),
            heading_rad=float(e.get("heading_rad", 0.0)),
        ))
    return images, poses


def cmd_stitch(args):
    cfg = _load_cfg(args.config)
    images, poses = _load_captures(args.list)
    mosaic = stitching.stitch_sequence(
        images, poses, tau=cfg.tau, search_radius=cfg.search_radius,
        mm_per_px=cfg.mm_per_px or None)
    _ensure_dir(args.out)
    imaging.save_image(args.out, mosaic.canvas)
    return EXIT_OK


def cmd_register(args):
    cfg = _load_cfg(args.config)
    with open(args.frames) as f:
        paths = [ln.strip() for ln in f if ln.strip() and not ln.startswith("#")]
    if not paths:
        print("register: empty frame list", file=sys.stderr)
        return EXIT_PRECONDITION
    base = os.path.dirname(os.path.abspath(args.frames))
    clouds = []
    for p in paths:
        full = p if os.path.isabs(p) else os.path.join(base, p)
        reader = registration3d.read_ply if full.endswith(".ply") else registration3d.read_xyz
        clouds.append(reader(full))
    params = registration3d.IcpParams(
        subsample_ratio=cfg.icp_subsample, max_dist=cfg.icp_max_dist,
        max_iterations=cfg.icp_max_iterations, error_delta=cfg.icp_error_delta,
        error_floor=cfg.icp_error_floor, max_rotation=cfg.icp_max_rotation,
        max_translation=cfg.icp_max_translation)
    merged, transforms = registration3d.register_sequence(clouds, params)
    _ensure_dir(args.out)
    registration3d.write_xyz(args.out, merged)
    if args.poses:
        _write_text(args.poses, json.dumps([
            {"rotation": t.rotation.tolist(), "translation": t.translation.tolist()}
            for t in transforms], indent=2))
    return EXIT_OK


def cmd_simulate(args):
    with open(args.world) as f:
        world_rec = json.load(f)
    plates = tuple(
        inspection_sim.Plate(p["x0"], p["y0"], p["x1"], p["y1"],
                             p.get("incline", 0.0))
        for p in world_rec["plates"])
    world = inspection_sim.SimWorld(plates=plates)
    spec = inspection_sim.RobotSpec()
    if args.spec:
        with open(args.spec) as f:
            rec = json.load(f)
        spec = inspection_sim.RobotSpec(**{
            k: (tuple(v) if isinstance(v, list) else v) for k, v in rec.items()})
    result = inspection_sim.run_sim(world, spec, steps=args.steps)
    record = {
        "trajectory": [
            {"t": t, "x": x, "y": y, "heading": hd, "mode": mode}
            for t, x, y, hd, mode in result.trajectory],
        "captures": [
            {"t": t, "x": x, "y": y, "heading": hd} for t, x, y, hd in result.captures],
    }
    _write_text(args.out, json.dumps(record, indent=2))
    return EXIT_OK


def cmd_eval(args):
    pred_files = {os.path.splitext(n)[0]: os.path.join(args.pred, n)
                  for n in sorted(os.listdir(args.pred))}
    gt_files = {os.path.splitext(n)[0]: os.path.join(args.gt, n)
                for n in sorted(os.listdir(args.gt))}
    stems = sorted(set(pred_files) & set(gt_files))
    if not stems:
        print("eval: no matching prediction/ground-truth stems", file=sys.stderr)
        return EXIT_EMPTY
    rows = [(stem, "normal", imaging.load_mask(pred_files[stem]),
             imaging.load_mask(gt_files[stem])) for stem in stems]
    reports, table = evalmetrics.compare(rows)
    print(table)
    if args.out:
        _write_text(args.out, evalmetrics.json_report(reports))
    return EXIT_OK


def cmd_full_survey(args):
    cfg = _load_cfg(args.config)
    images, poses = _load_captures(args.captures)
    mosaic = stitching.stitch_sequence(
        images, poses, tau=cfg.tau, search_radius=cfg.search_radius,
        mm_per_px=cfg.mm_per_px or None)
    os.makedirs(args.outdir, exist_ok=True)
    imaging.save_image(os.path.join(args.outdir, "mosaic.png"), mosaic.canvas)
    code = _detect_one(mosaic.canvas, cfg,
                       os.path.join(args.outdir, "mask.pgm"),
                       os.path.join(args.outdir, "report.json"),
                       args.captures)
    if args.gt:
        gt = imaging.load_mask(args.gt)
        result_mask = imaging.load_mask(os.path.join(args.outdir, "mask.pgm"))
        reports, table = evalmetrics.compare([("survey", "normal", result_mask, gt)])
        _write_text(os.path.join(args.outdir, "eval.json"),
                    evalmetrics.json_report(reports))
        print(table)
    return code


def build_parser():
    parser = argparse.ArgumentParser(
        prog="steel-inspect",
        description="Steel-surface inspection toolkit: crack detection, mosaic "
                    "stitching, 3D registration, robot simulation, and scoring.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("peaks", help="histogram peak detection and threshold")
    p.add_argument("--input", required=True, help="image file or 256-line count .txt")
    p.add_argument("--out", help="JSON output path (default: stdout)")
    p.set_defaults(func=cmd_peaks)

    p = sub.add_parser("detect", help="run the crack-segmentation pipeline")
    p.add_argument("--input", required=True)
    p.add_argument("--config")
    p.add_argument("--out", help="output mask (.pgm)")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("stitch", help="stitch a capture run into a mosaic")
    p.add_argument("--list", required=True, help="captures.json manifest")
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="mosaic image path")
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("register", help="chain point clouds with ICP")
    p.add_argument("--frames", required=True, help="text file listing .xyz/.ply paths")
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="merged .xyz output")
    p.add_argument("--poses", help="per-frame transform JSON output")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("simulate", help="edge-avoidance robot simulation")
    p.add_argument("--world", required=True, help="world.json with plate list")
    p.add_argument("--spec", help="robot.json overrides")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out", required=True, help="trajectory JSON output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eval", help="score predicted masks against ground truth")
    p.add_argument("--pred", required=True, help="directory of predicted masks")
    p.add_argument("--gt", required=True, help="directory of ground-truth masks")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("full-survey", help="stitch then detect (then score)")
    p.add_argument("--captures", required=True, help="captures.json manifest")
    p.add_argument("--config")
    p.add_argument("--outdir", required=True)
    p.add_argument("--gt", help="optional ground-truth mask for scoring")
    p.set_defaults(func=cmd_full_survey)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (imaging.ImageError, FileNotFoundError, OSError) as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except (stitching.StitchError, registration3d.RegistrationError,
            inspection_sim.SimError, ValueError) as e:
        print(f"precondition error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
