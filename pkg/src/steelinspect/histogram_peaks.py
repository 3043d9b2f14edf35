"""Histogram smoothing, dominant-peak detection, and global-threshold derivation.

The detector walks the smoothed histogram like a hiker scanning a skyline:
each initial (strict local-maximum) peak gets an offset distance to an
observing location and a crossover index measuring its prominence; a peak
whose crossover index beats both neighbors is accepted as dominant.  The
darkest valley between the two darkest dominant peaks becomes the global
crack-isolation threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Histogram",
    "PeakSet",
    "NoStructureError",
    "compute_histogram",
    "smooth",
    "find_initial_peaks",
    "offset_distance",
    "crossover_index",
    "detect_dominant_peaks",
    "peaks_to_global_threshold",
]


class NoStructureError(Exception):
    """The histogram contains no dominant peak to threshold against."""


@dataclass(frozen=True)
class Histogram:
    """Per-intensity-level counts (floats after smoothing) plus total pixels."""

    counts: np.ndarray
    total: float

    def __post_init__(self):
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=np.float64))
        if self.counts.ndim != 1 or self.counts.size < 2:
            raise ValueError("counts must be a 1D vector of at least two levels")
        if (self.counts < 0).any():
            raise ValueError("counts must be non-negative")

    @property
    def levels(self):
        return self.counts.size


@dataclass(frozen=True)
class PeakSet:
    """Initial peaks, accepted dominant peaks, and their bookkeeping.

    `offsets` and `crossover` are parallel to `initial` (values as first
    computed, before any acceptance reset); `observing` is parallel to
    `dominant`.
    """

    initial: np.ndarray
    dominant: np.ndarray
    observing: np.ndarray
    crossover: np.ndarray
    offsets: np.ndarray


def compute_histogram(img):
    """256-bin intensity histogram of a uint8 image."""
    img = np.asarray(img)
    counts = np.bincount(img.ravel().astype(np.int64), minlength=256).astype(np.float64)
    return Histogram(counts=counts[:256], total=float(img.size))


def smooth(h: Histogram) -> Histogram:
    """Width-3 moving average over the original counts, endpoints replicated."""
    padded = np.pad(h.counts, 1, mode="edge")
    out = (padded[:-2] + padded[1:-1] + padded[2:]) / 3.0
    return Histogram(counts=out, total=h.total)


def find_initial_peaks(h: Histogram) -> np.ndarray:
    """Levels that are strict local maxima of the (smoothed) counts."""
    c = h.counts
    interior = np.arange(1, c.size - 1)
    keep = (c[interior] > c[interior - 1]) & (c[interior] > c[interior + 1])
    return interior[keep]


def _successor(h: Histogram, delta, k):
    """Level and height of peak k+1.

    The last peak competes against a virtual successor of height 0 placed one
    predecessor-gap beyond it, so its crossover index depends only on the
    peak pattern and not on the distance to the top intensity level (keeps
    the dominant set equivariant under intensity shifts).  A lone peak falls
    back to the top level.
    """
    if k + 1 < len(delta):
        g_next = int(delta[k + 1])
        return g_next, float(h.counts[g_next])
    if k > 0:
        return int(2 * delta[k] - delta[k - 1]), 0.0
    return h.levels - 1, 0.0


def offset_distance(h: Histogram, delta, k) -> float:
    """Offset distance from peak k to its observing location.

    Uses the height difference to the successor peak; equal heights switch
    to the ((k+1)/k)-weighted denominator (k counted from 1).
    """
    delta = np.asarray(delta)
    if not 0 <= k < len(delta):
        raise IndexError("peak index out of range")
    g_k = int(delta[k])
    h_k = float(h.counts[g_k])
    g_next, h_next = _successor(h, delta, k)
    num = h_k * (g_next - g_k)
    if num == 0.0:
        return 0.0
    if h_next != h_k:
        den = abs(h_next - h_k)
    else:
        k1 = k + 1  # 1-based position
        den = abs((k1 + 1) / k1 * h_next - h_k)
    if den == 0.0:
        return math.inf
    return num / den


def crossover_index(h: Histogram, delta, k) -> float:
    """Prominence ratio d/L of peak k; +inf when the offset distance is 0."""
    delta = np.asarray(delta)
    g_k = int(delta[k])
    h_k = float(h.counts[g_k])
    _, h_next = _successor(h, delta, k)
    d = h_k - min(h_k, h_next) / 2.0
    L = offset_distance(h, delta, k)
    if L == 0.0:
        return math.inf
    if math.isinf(L):
        return 0.0
    return d / L


def _beats(a, b):
    # Two adjacent +inf crossover indices break toward the lower level.
    if math.isinf(a) and a > 0 and math.isinf(b) and b > 0:
        return True
    if math.isinf(a) or math.isinf(b):
        return a > b
    # Relative margin so exact-arithmetic ties stay ties however the counts
    # are scaled (crossover indices scale uniformly with the histogram).
    return a > b + 1e-9 * max(abs(a), abs(b))


def detect_dominant_peaks(h: Histogram) -> PeakSet:
    """Left-to-right dominant-peak scan over the smoothed histogram.

    Peak j is accepted when its crossover index exceeds both neighbors'
    (missing neighbors count as -inf).  On acceptance the peak's index is
    reset to -inf so it never re-competes, the observing location
    g - L is recorded, and the scan resumes at j+1.  Fewer than three
    initial peaks are all reported dominant.
    """
    delta = find_initial_peaks(h)
    n = len(delta)
    offsets = np.array([offset_distance(h, delta, k) for k in range(n)])
    thetas = np.array([crossover_index(h, delta, k) for k in range(n)])

    if n < 3:
        dominant = delta.copy()
        observing = delta.astype(np.float64) - offsets
        return PeakSet(delta, dominant, observing, thetas.copy(), offsets)

    theta_work = thetas.copy()
    dominant, observing = [], []
    for j in range(n):
        left = theta_work[j - 1] if j > 0 else -math.inf
        right = theta_work[j + 1] if j < n - 1 else -math.inf
        if _beats(theta_work[j], left) and _beats(theta_work[j], right):
            dominant.append(int(delta[j]))
            observing.append(float(delta[j]) - offsets[j])
            theta_work[j] = -math.inf
    return PeakSet(
        initial=delta,
        dominant=np.asarray(dominant, dtype=np.int64),
        observing=np.asarray(observing, dtype=np.float64),
        crossover=thetas,
        offsets=offsets,
    )


def peaks_to_global_threshold(h: Histogram, peaks: PeakSet) -> int:
    """Global threshold separating the darkest dominant mode from the next.

    With two or more dominant peaks: the level of the minimum smoothed count
    strictly between the darkest dominant peak and its successor (ties break
    toward the lower level).  With one: its observing location, rounded.
    """
    if len(peaks.dominant) == 0:
        raise NoStructureError("no structure in histogram")
    if len(peaks.dominant) == 1:
        return int(round(peaks.observing[0]))
    lo, hi = int(peaks.dominant[0]), int(peaks.dominant[1])
    between = h.counts[lo + 1: hi]
    if between.size == 0:
        return lo
    return lo + 1 + int(np.argmin(between))
