"""Hessian-eigenvalue line-emphasis filter.

Second derivatives at scale sigma come from Gaussian-derivative convolution;
the two eigenvalues per pixel feed a line-similarity measure that rewards
ridge-like structure and returns 0 for blobs, flats, and wrong-polarity
ridges.  Multi-scale integration takes the scale-normalized maximum.

Cracks are dark on a light background.  A dark ridge of the intensity
surface has positive-curvature eigenvalues, so the similarity measure is fed
the eigenvalues of the *negated* Hessian (equivalent to filtering the
inverted image); with that convention a dark line yields lambda2 << 0,
lambda1 ~ 0 and a strong response, while a dark blob cancels to ~0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

__all__ = [
    "HessianField",
    "ScaleBank",
    "LineResponse",
    "hessian",
    "eigs2",
    "line_similarity",
    "classify_structure",
    "multiscale_response",
]

DEFAULT_MU = 1.0


@dataclass(frozen=True)
class HessianField:
    """Per-pixel symmetric 2x2 second-derivative matrices at one scale."""

    ixx: np.ndarray
    ixy: np.ndarray
    iyy: np.ndarray
    sigma: float


@dataclass(frozen=True)
class ScaleBank:
    """Geometric scale sampling: sigma_i = factor**(i-1) * sigma1, i = 1..count."""

    sigma1: float = 1.0
    factor: float = np.sqrt(2.0)
    count: int = 4

    def __post_init__(self):
        if self.sigma1 <= 0 or self.factor <= 1.0 or self.count < 1:
            raise ValueError("need sigma1 > 0, factor > 1, count >= 1")

    @property
    def sigmas(self):
        return self.sigma1 * self.factor ** np.arange(self.count)


@dataclass(frozen=True)
class LineResponse:
    """Non-negative filter response plus the winning scale index per pixel."""

    response: np.ndarray
    scale_index: np.ndarray


def _derivative_kernels(sigma):
    """Sampled Gaussian plus first/second derivative kernels, with discrete
    moments corrected so constants and ramps are annihilated exactly."""
    radius = int(np.ceil(4.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g0 = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    g0 /= g0.sum()
    g1 = -x / sigma ** 2 * g0          # antisymmetric: zero mean by construction
    g1 /= -(g1 * x).sum()              # unit response to a unit-slope ramp
    g2 = (x ** 2 / sigma ** 4 - 1.0 / sigma ** 2) * g0
    g2 -= g2.sum() * g0                # exact zero response to constants
    g2 *= 2.0 / (g2 * x ** 2).sum()    # response 2 to x^2
    return g0, g1, g2


def hessian(img, sigma) -> HessianField:
    """Gaussian-derivative Hessian of the image at the given scale.

    x is the column axis, y the row axis; borders replicate.  The kernel
    support is ceil(4*sigma) in radius.
    """
    if sigma < 0.5:
        raise ValueError("sigma must be >= 0.5 pixel")
    img = np.asarray(img, dtype=np.float64)
    if int(np.ceil(4 * sigma)) >= min(img.shape):
        raise ValueError("kernel support exceeds image size")
    g0, g1, g2 = _derivative_kernels(sigma)

    def sep(row_k, col_k):
        tmp = ndimage.convolve1d(img, col_k, axis=1, mode="nearest")
        return ndimage.convolve1d(tmp, row_k, axis=0, mode="nearest")

    ixx = sep(g0, g2)
    iyy = sep(g2, g0)
    ixy = sep(g1, g1)
    return HessianField(ixx=ixx, ixy=ixy, iyy=iyy, sigma=float(sigma))


def eigs2(ixx, ixy, iyy):
    """Closed-form eigenvalues of symmetric [[ixx, ixy], [ixy, iyy]].

    Accepts scalars or equally-shaped arrays; returns (lam1, lam2) with
    lam1 >= lam2 elementwise.
    """
    ixx = np.asarray(ixx, dtype=np.float64)
    ixy = np.asarray(ixy, dtype=np.float64)
    iyy = np.asarray(iyy, dtype=np.float64)
    mean = (ixx + iyy) / 2.0
    root = np.sqrt(((ixx - iyy) / 2.0) ** 2 + ixy ** 2)
    return mean + root, mean - root


def line_similarity(lam1, lam2, mu=DEFAULT_MU):
    """Similarity-to-line measure over the ordered eigenvalue pair.

    lam2 <= lam1 <= 0            ->  |lam2| + lam1
    lam2 < 0 < lam1 < |lam2|/mu  ->  |lam2| - mu*lam1
    otherwise                    ->  0
    """
    if not 0.0 < mu <= 1.0:
        raise ValueError("mu must be in (0, 1]")
    lam1 = np.asarray(lam1, dtype=np.float64)
    lam2 = np.asarray(lam2, dtype=np.float64)
    both_neg = (lam2 <= lam1) & (lam1 <= 0)
    mixed = (lam2 < 0) & (lam1 > 0) & (lam1 < np.abs(lam2) / mu)
    out = np.where(both_neg, np.abs(lam2) + lam1,
                   np.where(mixed, np.abs(lam2) - mu * lam1, 0.0))
    if out.ndim == 0:
        return float(out)
    return out


def classify_structure(lam1, lam2, eps):
    """Shape class of one eigenvalue pair: 'line', 'blob', 'sheet' or 'none'.

    eps defines "approximately zero" (|v| < eps) and "approximately equal"
    (difference of magnitudes <= eps).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    a1, a2 = abs(lam1), abs(lam2)
    if a1 < eps and a2 < eps:
        return "sheet"
    if a1 >= a2 and a2 < eps and a1 >= eps:
        return "line"
    if abs(a1 - a2) <= eps and a1 >= eps and a2 >= eps:
        return "blob"
    return "none"


def multiscale_response(img, bank: ScaleBank = ScaleBank(), mu=DEFAULT_MU,
                        literal_first_scale_norm=False) -> LineResponse:
    """Scale-normalized maximum line response over the scale bank.

    Per scale the response is sigma_i^2 * similarity (dark-line polarity);
    `literal_first_scale_norm` switches the normalization weight to the
    constant sigma_1^2 for every scale, for fidelity comparisons.
    """
    img = np.asarray(img, dtype=np.float64)
    sigmas = bank.sigmas
    best = np.full(img.shape, -np.inf)
    best_idx = np.zeros(img.shape, dtype=np.int32)
    for i, s in enumerate(sigmas):
        field = hessian(img, s)
        lam1, lam2 = eigs2(field.ixx, field.ixy, field.iyy)
        # Dark-structure polarity: eigenvalues of the negated Hessian,
        # re-ordered so lam1 >= lam2 still holds.
        sim = line_similarity(-lam2, -lam1, mu)
        weight = sigmas[0] ** 2 if literal_first_scale_norm else s ** 2
        r = weight * sim
        take = r > best
        best = np.where(take, r, best)
        best_idx = np.where(take, i, best_idx)
    return LineResponse(response=best, scale_index=best_idx)
