#!/usr/bin/env python3
"""Mosaic a simulated camera pass over a textured steel strip.

Generates a long random-texture strip, cuts overlapping tiles the way a
crawler camera would capture them (with alternating exposure drift and a
noisy odometry prior), stitches them back together, and compares the mosaic
against the original strip.

Run:  python3 demos/demo_stitching.py [--tiles N] [--out-dir OUT]
"""
import argparse
import os

import numpy as np
from scipy.ndimage import gaussian_filter

from steelinspect.stitching import CapturePose, stitch_sequence
from steelinspect.imaging import save_image


def make_strip(n_tiles, tile_w=240, tile_h=140, advance=160, seed=3):
    """Smooth random texture; odd tiles get a +20 exposure offset."""
    rng = np.random.default_rng(seed)
    width = tile_w + advance * (n_tiles - 1)
    strip = gaussian_filter(rng.uniform(0, 1, (tile_h, width)), 3.0)
    lo, hi = strip.min(), strip.max()
    strip = 40.0 + (strip - lo) / (hi - lo) * 190.0
    tiles, poses = [], []
    mm_per_px = 180.0 / tile_w
    for i in range(n_tiles):
        x0 = i * advance
        tile = strip[:, x0:x0 + tile_w].copy()
        if i % 2 == 1:
            tile = np.clip(tile + 20.0, 0, 255)
        # odometry is only approximately right; stitching must correct it
        odom = (x0 + rng.integers(-4, 5)) * mm_per_px
        tiles.append(tile)
        poses.append(CapturePose(odom_x_mm=float(odom)))
    return strip, tiles, poses, mm_per_px


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tiles", type=int, default=10)
    ap.add_argument("--out-dir", default="demo_output")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    strip, tiles, poses, mm_per_px = make_strip(args.tiles)
    print(f"strip {strip.shape[1]}x{strip.shape[0]} px cut into "
          f"{len(tiles)} tiles at {mm_per_px:.2f} mm/px")

    mosaic = stitch_sequence(tiles, poses, mm_per_px=mm_per_px)
    ox, oy = mosaic.origin_mm
    print(f"mosaic canvas {mosaic.canvas.shape[1]}x{mosaic.canvas.shape[0]} px, "
          f"origin ({ox:.1f}, {oy:.1f}) mm")

    if mosaic.canvas.shape == strip.shape:
        mae = np.abs(mosaic.canvas.astype(float) - strip).mean()
        print(f"mean absolute error vs original strip: {mae:.2f} gray levels")

    save_image(os.path.join(args.out_dir, "mosaic.pgm"), mosaic.canvas)
    print(f"wrote mosaic.pgm to {args.out_dir}/")


if __name__ == "__main__":
    main()
