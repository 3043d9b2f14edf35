"""Mosaic construction from overlapping, odometry-tagged surface captures.

Consecutive tiles are located by normalized cross-correlation inside a small
window around the odometry prior, exposure-compensated against the growing
canvas (anchored to the first tile), blended with the brighter-pixel-wins
rule, and gap-filled with a radius-1 median at the end.  The same rigid
frame chain (image -> camera -> robot -> world) converts pixel coordinates
to world millimeters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import imaging

__all__ = [
    "Rigid2",
    "CapturePose",
    "Mosaic",
    "StitchError",
    "LowConfidenceError",
    "CAMERA_FOOTPRINT_MM",
    "MIN_OVERLAP",
    "check_overlap",
    "estimate_offset",
    "blend",
    "fill_gaps",
    "image_to_world",
    "stitch_sequence",
]

CAMERA_FOOTPRINT_MM = (180.0, 140.0)  # surface area covered per capture (x, y)
MIN_OVERLAP = 0.30


class StitchError(Exception):
    """Overlap precondition breach or unusable capture sequence."""


class LowConfidenceError(StitchError):
    """Best correlation score below the confidence floor."""

    def __init__(self, score):
        super().__init__(f"offset correlation too low (score {score:.3f})")
        self.score = score


@dataclass(frozen=True)
class Rigid2:
    """Planar rigid transform: rotation angle (rad) plus translation."""

    angle: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    @staticmethod
    def identity():
        return Rigid2()

    def apply(self, xy):
        x, y = float(xy[0]), float(xy[1])
        c, s = math.cos(self.angle), math.sin(self.angle)
        return (c * x - s * y + self.tx, s * x + c * y + self.ty)

    def compose(self, other):
        tx, ty = self.apply((other.tx, other.ty))
        return Rigid2(self.angle + other.angle, tx, ty)


@dataclass(frozen=True)
class CapturePose:
    """Robot odometry at capture time plus the fixed camera mounting chain."""

    odom_x_mm: float = 0.0
    odom_y_mm: float = 0.0
    heading_rad: float = 0.0
    t_ic: Rigid2 = Rigid2()  # image -> camera
    t_cr: Rigid2 = Rigid2()  # camera -> robot

    @property
    def t_rw(self) -> Rigid2:
        """Robot -> world, straight from odometry."""
        return Rigid2(self.heading_rad, self.odom_x_mm, self.odom_y_mm)


@dataclass
class Mosaic:
    """Stitched canvas, its world origin, and per-pixel source counts."""

    canvas: np.ndarray
    origin_mm: tuple
    counts: np.ndarray
    mm_per_px: float


def check_overlap(pose_a: CapturePose, pose_b: CapturePose,
                  footprint_mm=CAMERA_FOOTPRINT_MM) -> float:
    """Intersection-over-footprint-area of the two projected capture rectangles.

    Rectangles are taken axis-aligned at the camera centers (rotation between
    consecutive captures is assumed negligible on the straight capture runs).
    """
    fx, fy = footprint_mm
    ca = pose_a.t_rw.compose(pose_a.t_cr)
    cb = pose_b.t_rw.compose(pose_b.t_cr)
    dx = abs(cb.tx - ca.tx)
    dy = abs(cb.ty - ca.ty)
    ix = max(0.0, fx - dx)
    iy = max(0.0, fy - dy)
    return (ix * iy) / (fx * fy)


def _ncc(a, b):
    a = a.astype(np.float64).ravel()
    b = b.astype(np.float64).ravel()
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt((a @ a) * (b @ b))
    if denom == 0:
        return 0.0
    return float((a @ b) / denom)


def _overlap_views(img_a, img_b, dx, dy):
    """Views of both images where B, placed at (dx, dy) in A's frame, overlaps A."""
    ha, wa = img_a.shape
    hb, wb = img_b.shape
    ax0, ay0 = max(0, dx), max(0, dy)
    ax1, ay1 = min(wa, dx + wb), min(ha, dy + hb)
    if ax1 <= ax0 or ay1 <= ay0:
        return None, None
    return (img_a[ay0:ay1, ax0:ax1],
            img_b[ay0 - dy:ay1 - dy, ax0 - dx:ax1 - dx])


def estimate_offset(img_a, img_b, prior, search_radius, min_score=0.5):
    """Integer-pixel placement of img_b in img_a's frame, near the prior.

    Searches every displacement within +-search_radius of the prior and
    returns the one maximizing normalized cross-correlation of the overlap,
    with its score.  Raises LowConfidenceError below min_score.
    """
    img_a = np.asarray(img_a)
    img_b = np.asarray(img_b)
    px, py = int(round(prior[0])), int(round(prior[1]))
    best = (-2.0, px, py)
    for dy in range(py - search_radius, py + search_radius + 1):
        for dx in range(px - search_radius, px + search_radius + 1):
            va, vb = _overlap_views(img_a, img_b, dx, dy)
            if va is None or va.size < 16:
                continue
            score = _ncc(va, vb)
            if score > best[0]:
                best = (score, dx, dy)
    score, dx, dy = best
    if score < min_score:
        raise LowConfidenceError(score)
    return (dx, dy), score


def blend(existing, incoming, tau):
    """Brighter-pixel-wins exposure blend: incoming iff tau*incoming > existing."""
    if tau <= 1.0:
        raise ValueError("tau must be > 1")
    existing = np.asarray(existing, dtype=np.float64)
    incoming = np.asarray(incoming, dtype=np.float64)
    out = np.where(tau * incoming > existing, incoming, existing)
    if out.ndim == 0:
        return float(out)
    return out


def fill_gaps(mosaic: Mosaic) -> Mosaic:
    """Median-fill interior zero-coverage holes; border holes stay untouched."""
    from scipy import ndimage

    gaps = mosaic.counts == 0
    if not gaps.any():
        return mosaic
    labels, n = ndimage.label(gaps, structure=np.array(
        [[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool))
    border_labels = set(np.unique(np.concatenate([
        labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]])))
    interior = gaps & ~np.isin(labels, sorted(border_labels))
    if not interior.any():
        return mosaic
    filled = imaging.median_filter(mosaic.canvas, interior, radius=1)
    counts = mosaic.counts.copy()
    counts[interior] = 1
    return Mosaic(filled, mosaic.origin_mm, counts, mosaic.mm_per_px)


def image_to_world(pixel_xy, pose: CapturePose):
    """Chain the image->camera->robot->world rigid transforms over one point.

    Pixel coordinates are taken in the same metric units the chain is
    expressed in; fold any mm-per-pixel scale into the input (or into t_ic's
    translation being in the scaled frame) before calling.
    """
    p = pose.t_ic.apply(pixel_xy)
    p = pose.t_cr.apply(p)
    return pose.t_rw.apply(p)


def stitch_sequence(images, poses, tau=1.05, search_radius=8, mm_per_px=None):
    """Incrementally stitch an ordered capture run into one mosaic.

    Consecutive poses must overlap by at least 30% of the camera footprint.
    Odometry supplies the placement prior, correlation refines it, incoming
    tiles are exposure-compensated against the canvas before blending, and
    interior gaps are median-filled at the end.
    """
    images = [np.asarray(im) for im in images]
    poses = list(poses)
    if len(images) != len(poses) or not images:
        raise StitchError("need one pose per image and at least one image")
    h0, w0 = images[0].shape
    if mm_per_px is None:
        mm_per_px = CAMERA_FOOTPRINT_MM[0] / w0

    for i in range(1, len(images)):
        ov = check_overlap(poses[i - 1], poses[i])
        if ov < MIN_OVERLAP:
            raise StitchError(
                f"captures {i - 1} and {i} overlap {ov:.0%}, below the 30% floor")

    # Integer-pixel tile positions in tile 0's frame.
    positions = [(0, 0)]
    for i in range(1, len(images)):
        ca = poses[i - 1].t_rw.compose(poses[i - 1].t_cr)
        cb = poses[i].t_rw.compose(poses[i].t_cr)
        prior = ((cb.tx - ca.tx) / mm_per_px + positions[i - 1][0],
                 (cb.ty - ca.ty) / mm_per_px + positions[i - 1][1])
        try:
            (dx, dy), _ = estimate_offset(images[i - 1], images[i],
                                          (prior[0] - positions[i - 1][0],
                                           prior[1] - positions[i - 1][1]),
                                          search_radius)
            positions.append((positions[i - 1][0] + dx, positions[i - 1][1] + dy))
        except LowConfidenceError:
            positions.append((int(round(prior[0])), int(round(prior[1]))))

    xs = [p[0] for p in positions]
    ys = [p[1] for p in positions]
    x_min, y_min = min(xs), min(ys)
    x_max = max(p[0] + im.shape[1] for p, im in zip(positions, images))
    y_max = max(p[1] + im.shape[0] for p, im in zip(positions, images))
    canvas = np.zeros((y_max - y_min, x_max - x_min), dtype=np.float64)
    counts = np.zeros(canvas.shape, dtype=np.int32)

    for (px, py), img in zip(positions, images):
        x0, y0 = px - x_min, py - y_min
        hh, ww = img.shape
        sl = (slice(y0, y0 + hh), slice(x0, x0 + ww))
        tile = img.astype(np.float64)
        covered = counts[sl] > 0
        if covered.any():
            # Anchor exposure to the existing canvas: shift the tile by the
            # mean overlap difference before the per-pixel blend.
            delta = float((canvas[sl][covered] - tile[covered]).mean())
            tile = np.clip(tile + delta, 0.0, 255.0)
        canvas[sl] = np.where(covered, blend(canvas[sl], tile, tau), tile)
        counts[sl] += 1

    origin = (x_min * mm_per_px, y_min * mm_per_px)
    mosaic = Mosaic(np.round(canvas).astype(np.uint8), origin, counts, mm_per_px)
    return fill_gaps(mosaic)
