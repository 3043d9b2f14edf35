"""Crack segmentation: global threshold, valley-emphasis Otsu, region growing.

The full pipeline is threshold -> line-response gating -> region growing
-> morphological cleanup; each stage is also exposed on its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import imaging
from .histogram_peaks import (
    Histogram,
    NoStructureError,
    PeakSet,
    compute_histogram,
    detect_dominant_peaks,
    peaks_to_global_threshold,
    smooth,
)
from .line_filter import ScaleBank, multiscale_response

__all__ = [
    "OtsuResult",
    "SegmentationResult",
    "apply_threshold",
    "valley_emphasis_otsu",
    "seed_points",
    "region_grow",
    "grow_threshold",
    "segment_crack",
]


@dataclass(frozen=True)
class OtsuResult:
    """Valley-emphasis threshold with the full objective and class curves."""

    threshold: int
    objective: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class SegmentationResult:
    """Final mask plus the per-stage diagnostics the CLI report needs."""

    mask: np.ndarray
    global_threshold: int | None
    otsu_threshold: int | None
    e_max: float | None
    peaks: PeakSet | None
    stage_counts: dict
    no_structure: bool = False


def apply_threshold(img, t):
    """Dark-crack global threshold: mask true where intensity <= t."""
    if not 0 <= t <= 255:
        raise ValueError("threshold must be in [0, 255]")
    return np.asarray(img) <= t


def valley_emphasis_otsu(h: Histogram) -> OtsuResult:
    """Argmax of (1 - p_t) * (w1*mu1^2 + w2*mu2^2) over all levels.

    p_t is the occurrence probability of level t itself, which biases the
    optimum toward histogram valleys.  Ties break toward the lowest level.
    """
    if h.total <= 0:
        raise ValueError("histogram total must be positive")
    p = h.counts / h.counts.sum() if h.counts.sum() > 0 else h.counts
    levels = np.arange(h.levels, dtype=np.float64)
    w1 = np.cumsum(p)
    m1_num = np.cumsum(p * levels)
    w2 = 1.0 - w1
    m2_num = m1_num[-1] - m1_num
    with np.errstate(invalid="ignore", divide="ignore"):
        mu1 = np.where(w1 > 0, m1_num / np.where(w1 > 0, w1, 1.0), 0.0)
        mu2 = np.where(w2 > 0, m2_num / np.where(w2 > 0, w2, 1.0), 0.0)
    objective = (1.0 - p) * (w1 * mu1 ** 2 + w2 * mu2 ** 2)
    support = np.flatnonzero(h.counts)
    degenerate = support.size <= 1
    if degenerate:
        t_star = int(support[0]) if support.size else 0
    else:
        t_star = int(np.argmax(objective))
    return OtsuResult(t_star, objective, w1, w2, mu1, mu2, degenerate)


def seed_points(mask):
    """Boundary pixels of each true component: true with >= 1 false 4-neighbor.

    Out-of-image neighbors count as false.  Returns an (N, 2) array of
    (row, col) coordinates.
    """
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1, mode="constant", constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    boundary = mask & ~interior
    return np.argwhere(boundary)


def region_grow(img, seeds, initial_mask, e_max):
    """Breadth-first admission of 8-neighbors within e_max of the region mean.

    Each connected component of the initial mask is one region with a
    running mean; means are snapshotted per BFS wavefront so the result is
    independent of pixel iteration order.  Admission is strict (< e_max).
    Output always contains the initial mask.
    """
    if e_max < 0:
        raise ValueError("e_max must be >= 0")
    img = np.asarray(img, dtype=np.float64)
    initial_mask = np.asarray(initial_mask, dtype=bool)
    labels, n_regions = ndimage.label(initial_mask, structure=imaging.STRUCTURE_8)
    if n_regions == 0 or e_max == 0:
        return initial_mask.copy()

    region = labels.astype(np.int32)  # 0 = unassigned
    sums = ndimage.sum_labels(img, labels, index=np.arange(1, n_regions + 1))
    areas = ndimage.sum_labels(initial_mask, labels, index=np.arange(1, n_regions + 1))

    frontier = np.zeros(img.shape, dtype=bool)
    for r, c in np.asarray(seeds, dtype=np.int64).reshape(-1, 2):
        frontier[r, c] = True
    frontier &= initial_mask

    offsets = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    h, w = img.shape
    while frontier.any():
        means = sums / np.maximum(areas, 1)
        # Candidate neighbors of the frontier, tagged with the lowest
        # adjacent region label for determinism.
        cand_label = np.zeros(img.shape, dtype=np.int32)
        for dr, dc in offsets:
            shifted = np.zeros(img.shape, dtype=np.int32)
            src = region * frontier
            r0, r1 = max(dr, 0), h + min(dr, 0)
            c0, c1 = max(dc, 0), w + min(dc, 0)
            shifted[r0:r1, c0:c1] = src[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
            np.copyto(cand_label, shifted,
                      where=(shifted > 0) & ((cand_label == 0) | (shifted < cand_label)))
        cand_label[region > 0] = 0
        cand = cand_label > 0
        if not cand.any():
            break
        admit = cand & (np.abs(means[cand_label - 1] - img) < e_max)
        if not admit.any():
            break
        region[admit] = cand_label[admit]
        new_labels = cand_label[admit]
        new_vals = img[admit]
        np.add.at(sums, new_labels - 1, new_vals)
        np.add.at(areas, new_labels - 1, 1)
        frontier = admit
    return region > 0


def grow_threshold(h: Histogram, peaks: PeakSet, otsu: OtsuResult) -> float:
    """Region-growing admission threshold from peak locations and t*.

    Bimodal (>= 2 dominant peaks): distance from t* to the nearest dominant
    peak below it.  Unimodal: the peak's offset to its observing location.
    """
    if len(peaks.dominant) == 0:
        raise NoStructureError("no dominant peak for growth threshold")
    if len(peaks.dominant) == 1:
        return abs(float(peaks.dominant[0]) - float(peaks.observing[0]))
    t_star = otsu.threshold
    below = peaks.dominant[peaks.dominant <= t_star]
    anchor = below[-1] if below.size else peaks.dominant[0]
    return abs(float(anchor) - float(t_star))


def segment_crack(img, cfg=None) -> SegmentationResult:
    """Full crack-detection pipeline on one grayscale image.

    Stages: dominant-peak global threshold, line-response gating at a
    quantile cutoff, seeded region growing with the valley-emphasis-derived
    admission threshold, then morphological cleanup.  A structureless
    histogram yields an empty mask with the no_structure flag set.
    """
    from .config import InspectConfig

    if cfg is None:
        cfg = InspectConfig()
    img = np.asarray(img)
    hist = smooth(compute_histogram(img))
    peaks = detect_dominant_peaks(hist)
    counts = {}
    if len(peaks.dominant) == 0:
        return SegmentationResult(
            mask=np.zeros(img.shape, dtype=bool),
            global_threshold=None, otsu_threshold=None, e_max=None,
            peaks=peaks, stage_counts={"threshold": 0, "gated": 0, "grown": 0, "final": 0},
            no_structure=True,
        )
    t = peaks_to_global_threshold(hist, peaks)
    m0 = apply_threshold(img, int(np.clip(t, 0, 255)))
    counts["threshold"] = int(m0.sum())

    bank = ScaleBank(sigma1=cfg.sigma1, factor=cfg.scale_factor, count=cfg.num_scales)
    resp = multiscale_response(img, bank, cfg.mu).response
    if m0.any():
        cutoff = np.quantile(resp[m0], cfg.gate_quantile)
    else:
        cutoff = np.inf
    # >= so an identically-zero response degenerates to a pass-through gate.
    m1 = m0 & (resp >= cutoff)
    counts["gated"] = int(m1.sum())

    otsu = valley_emphasis_otsu(hist)
    e_max = grow_threshold(hist, peaks, otsu)
    m2 = region_grow(img, seed_points(m1), m1, e_max)
    counts["grown"] = int(m2.sum())

    final = imaging.morphological_cleanup(m2, cfg.min_area)
    counts["final"] = int(final.sum())
    return SegmentationResult(
        mask=final,
        global_threshold=int(t),
        otsu_threshold=int(otsu.threshold),
        e_max=float(e_max),
        peaks=peaks,
        stage_counts=counts,
    )
