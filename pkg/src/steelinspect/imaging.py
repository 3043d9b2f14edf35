"""Raster primitives: grayscale image I/O, convolution, median filtering, mask cleanup.

Images are 2D uint8 numpy arrays (row-major, intensities 0..255).  Binary
masks are 2D bool arrays of the same shape, True = defect/foreground.
All functions are pure; inputs are never modified in place.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import ndimage

__all__ = [
    "ImageError",
    "load_image",
    "save_image",
    "load_mask",
    "save_mask",
    "gaussian_kernel",
    "convolve",
    "median_filter",
    "morphological_cleanup",
]

# 8-connectivity structure for component labeling: crack diagonals must stay
# connected.
STRUCTURE_8 = np.ones((3, 3), dtype=bool)


class ImageError(Exception):
    """Unreadable or unsupported image file."""


def _require_gray(img):
    a = np.asarray(img)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("expected a 2D image with width, height >= 1")
    return a


def _read_pgm(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] not in (b"P2", b"P5"):
        raise ImageError(f"{path}: not a P2/P5 PGM file")
    magic = data[:2].decode()

    # Tokenize the header, honouring '#' comments.
    tokens = []
    pos = 2
    while len(tokens) < 3 and pos < len(data):
        c = data[pos:pos + 1]
        if c == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                break
            pos += 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
                end += 1
            tokens.append(data[pos:end])
            pos = end
    if len(tokens) < 3:
        raise ImageError(f"{path}: truncated PGM header")
    try:
        width, height, maxval = int(tokens[0]), int(tokens[1]), int(tokens[2])
    except ValueError as e:
        raise ImageError(f"{path}: malformed PGM header") from e
    if maxval != 255:
        raise ImageError(f"{path}: unsupported maxval {maxval} (only 8-bit supported)")
    if magic == "P5":
        pos += 1  # single whitespace after maxval
        raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
        if raster.size != width * height:
            raise ImageError(f"{path}: truncated PGM raster")
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise ImageError(f"{path}: truncated PGM raster")
        raster = np.array([int(v) for v in values[: width * height]], dtype=np.uint8)
    return raster.reshape(height, width).copy()


def _write_pgm(path, img, ascii_format=False):
    h, w = img.shape
    if ascii_format:
        with open(path, "w") as f:
            f.write(f"P2\n{w} {h}\n255\n")
            for row in img:
                f.write(" ".join(str(int(v)) for v in row) + "\n")
    else:
        with open(path, "wb") as f:
            f.write(f"P5\n{w} {h}\n255\n".encode())
            f.write(img.astype(np.uint8).tobytes())


def load_image(path):
    """Read an 8-bit grayscale image (PGM P2/P5 or PNG).

    Color inputs are converted to gray by the unweighted channel mean.
    Raises ImageError for unreadable files or unsupported bit depths.
    """
    if not os.path.isfile(path):
        raise ImageError(f"{path}: no such file")
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return _read_pgm(path)
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            if im.mode in ("I;16", "I", "F"):
                raise ImageError(f"{path}: unsupported bit depth ({im.mode})")
            if im.mode == "L":
                return np.asarray(im, dtype=np.uint8).copy()
            arr = np.asarray(im.convert("RGB"), dtype=np.float64)
            return np.round(arr.mean(axis=2)).astype(np.uint8)
    except UnidentifiedImageError as e:
        raise ImageError(f"{path}: unreadable image") from e


def save_image(path, img, ascii_format=False):
    """Write a uint8 image as PGM (by .pgm extension) or 8-bit gray PNG."""
    img = _require_gray(img).astype(np.uint8)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        _write_pgm(path, img, ascii_format=ascii_format)
    else:
        from PIL import Image

        Image.fromarray(img, mode="L").save(path)


def save_mask(path, mask):
    """Serialize a boolean mask as a 0/255 grayscale image."""
    mask = np.asarray(mask, dtype=bool)
    save_image(path, np.where(mask, 255, 0).astype(np.uint8))


def load_mask(path):
    """Read a mask written by save_mask; any nonzero pixel is True."""
    return load_image(path) > 0


def gaussian_kernel(sigma, radius=None):
    """Sampled isotropic Gaussian kernel, normalized to unit sum.

    Radius defaults to ceil(4*sigma).  Returns a (2r+1, 2r+1) float array.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if radius is None:
        radius = int(np.ceil(4.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    g /= g.sum()
    return np.outer(g, g)


def convolve(img, kernel, border="replicate"):
    """2D convolution with replicated borders; returns a float image."""
    img = _require_gray(img).astype(np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.shape[0] != kernel.shape[1] or kernel.shape[0] % 2 != 1:
        raise ValueError("kernel must be square with odd side")
    radius = kernel.shape[0] // 2
    if radius >= min(img.shape):
        raise ValueError("kernel larger than image")
    if border != "replicate":
        raise ValueError(f"unsupported border mode {border!r}")
    return ndimage.convolve(img, kernel, mode="nearest")


def median_filter(img, region, radius):
    """Replace pixels inside `region` by their (2r+1)^2 neighborhood median.

    Pixels outside the region are returned untouched.  Borders replicate.
    """
    img = _require_gray(img)
    region = np.asarray(region, dtype=bool)
    if region.shape != img.shape:
        raise ValueError("region must match image dimensions")
    if not region.any():
        return img.copy()
    filtered = ndimage.median_filter(img, size=2 * radius + 1, mode="nearest")
    return np.where(region, filtered, img)


def morphological_cleanup(mask, min_area):
    """Remove isolated pixels, then drop 8-connected components below min_area.

    A true pixel with no true 8-neighbor is noise and is cleared first; the
    remaining components are size-filtered.  A 3x3-cross opening would also
    erase 1-2 px wide crack lines, so isolated-pixel removal is used as the
    thin-structure-preserving opening step.
    """
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    mask = np.asarray(mask, dtype=bool)
    neighbor_count = ndimage.convolve(
        mask.astype(np.int32), STRUCTURE_8.astype(np.int32), mode="constant", cval=0
    ) - mask.astype(np.int32)
    kept = mask & (neighbor_count > 0)
    labels, n = ndimage.label(kept, structure=STRUCTURE_8)
    if n == 0:
        return kept
    areas = np.bincount(labels.ravel())
    small = np.flatnonzero(areas < min_area)
    small = small[small > 0]
    if small.size:
        kept = kept & ~np.isin(labels, small)
    return kept
