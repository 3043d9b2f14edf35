"""Shared synthetic-fixture generators with known ground truth."""

import numpy as np
from scipy import ndimage

from steelinspect.registration3d import RigidTransform3
from steelinspect.stitching import CapturePose


def make_crack_fixture(seed=42):
    """128x128 scene: 2-px crack polyline + three 6x6 blobs, all intensity 60
    on a 190 background with sigma=3 noise.  Returns (img, crack_gt, blob_gt)."""
    rng = np.random.default_rng(seed)
    img = np.full((128, 128), 190.0)
    crack = np.zeros((128, 128), bool)
    for c in range(8, 60):
        crack[30:32, c] = True
    rr = 31
    for c in range(60, 90):
        rr += (c % 3 == 0)
        crack[rr:rr + 2, c] = True
    top = crack.nonzero()[0].max()
    for row in range(top, 110):
        crack[row, 88:90] = True
    blobs = np.zeros((128, 128), bool)
    for br, bc in [(80, 20), (100, 60), (60, 110)]:
        blobs[br:br + 6, bc:bc + 6] = True
    img[crack] = 60
    img[blobs] = 60
    img = np.clip(img + rng.normal(0, 3, img.shape), 0, 255).round().astype(np.uint8)
    return img, crack, blobs


def make_gap_fixture(seed=7):
    """Crack with a 1-px intensity gap at level 100, plus deterministic
    decreasing mid-tone shading so the histogram valley carries mass.
    Returns (img, crack_gt) where crack_gt excludes the gap column."""
    rng = np.random.default_rng(seed)
    img = np.full((128, 128), 190.0)
    crack = np.zeros((128, 128), bool)
    for c in range(8, 120):
        crack[30:32, c] = True
    img[crack] = 60
    img = np.clip(img + rng.normal(0, 3, img.shape), 0, 255).round()
    spots = [(r, c) for r in range(60, 126) for c in range(4, 124, 3)]
    k = 0
    for v in range(72, 142):
        for _ in range((142 - v) // 3):
            r, c = spots[k]
            k += 1
            img[r, c] = v
    img[30:32, 70] = 100.0
    return img.astype(np.uint8), crack


def make_strip_and_tiles(n_tiles=10, tile_w=240, tile_h=140, advance_px=160,
                         brighten=20, noise_sigma=0.0, seed=3):
    """Ground-truth strip cut into overlapping tiles with known odometry.

    Odd-index tiles get a +`brighten` exposure shift.  Advance of 160 px at
    240 px tile width is a 33% overlap and, at 0.75 mm/px, a 120 mm step.
    Returns (strip, tiles, poses, mm_per_px, advance_px).
    """
    rng = np.random.default_rng(seed)
    strip_w = (n_tiles - 1) * advance_px + tile_w
    strip = ndimage.gaussian_filter(rng.uniform(0, 1, (tile_h, strip_w)), 3.0)
    strip -= strip.min()
    strip /= strip.max()
    strip = (40 + strip * 190).round().astype(np.uint8)  # values <= 230
    mm_per_px = 180.0 / tile_w
    tiles, poses = [], []
    for i in range(n_tiles):
        x0 = i * advance_px
        tile = strip[:, x0:x0 + tile_w].astype(np.float64)
        if i % 2 == 1:
            tile = tile + brighten
        if noise_sigma > 0:
            tile = tile + rng.normal(0, noise_sigma, tile.shape)
        tiles.append(np.clip(tile, 0, 255).round().astype(np.uint8))
        poses.append(CapturePose(odom_x_mm=x0 * mm_per_px, odom_y_mm=0.0))
    return strip, tiles, poses, mm_per_px, advance_px


def make_surface_cloud(n=None, seed=0):
    """Structured plane-plus-ridge surface, irregularly sampled (meters).

    Sample sites start on a 1 cm grid and are jittered laterally so the
    cloud is not a perfect lattice (a regular lattice gives point-to-point
    ICP a spurious one-cell-shift local minimum).
    """
    xs = np.linspace(0.0, 0.5, 51)
    ys = np.linspace(0.0, 0.4, 41)
    gx, gy = np.meshgrid(xs, ys)
    jitter = np.random.default_rng(11)
    gx = gx + jitter.uniform(-0.004, 0.004, gx.shape)
    gy = gy + jitter.uniform(-0.004, 0.004, gy.shape)
    gz = (0.02 * np.sin(2 * np.pi * gx / 0.2)
          + 0.02 * np.cos(2 * np.pi * gy / 0.15)
          + 0.05 * np.exp(-((gx - 0.25) ** 2 + (gy - 0.2) ** 2)
                          / (2 * 0.03 ** 2)))
    pts = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    if seed:
        rng = np.random.default_rng(seed)
        pts = pts + rng.normal(0, 1e-4, pts.shape)
    return pts


def rigid3_from_yaw(yaw, translation):
    c, s = np.cos(yaw), np.sin(yaw)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return RigidTransform3(rot, np.asarray(translation, dtype=float))


def random_rotation(rng, max_angle):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-max_angle, max_angle)
    k = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def footprint_on_plates(state, spec, world):
    """Oracle: every wheel-rectangle corner lies on some plate."""
    from steelinspect.inspection_sim import footprint_corners

    return all(world.on_surface(p) for p in footprint_corners(state, spec))


def brute_force_label(mask):
    """Independent 8-connected component labeling by BFS."""
    mask = np.asarray(mask, bool)
    labels = np.zeros(mask.shape, dtype=int)
    current = 0
    for r0 in range(mask.shape[0]):
        for c0 in range(mask.shape[1]):
            if mask[r0, c0] and labels[r0, c0] == 0:
                current += 1
                stack = [(r0, c0)]
                labels[r0, c0] = current
                while stack:
                    r, c = stack.pop()
                    for dr in (-1, 0, 1):
                        for dc in (-1, 0, 1):
                            rr, cc = r + dr, c + dc
                            if (0 <= rr < mask.shape[0] and 0 <= cc < mask.shape[1]
                                    and mask[rr, cc] and labels[rr, cc] == 0):
                                labels[rr, cc] = current
                                stack.append((rr, cc))
    return labels, current
