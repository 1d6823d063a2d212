"""
Raster primitives shared by every stage of the detector.

Images are plain numpy arrays:

* gray image   -- 2-D ``uint8`` array, shape ``(height, width)``
* color image  -- 3-D ``uint8`` array, shape ``(height, width, 3)``, RGB planes
* signed image -- 2-D ``float64`` array, unclamped filter output
* binary image -- 2-D ``bool`` array
* kernel       -- square ``float64`` array with odd side length, anchored at the centre
* histogram    -- ``int64`` array of 256 bin counts
"""

import numpy as np


class DegenerateImageError(ValueError):
    """Raised when an image carries too little information for an operation."""


def check_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D gray image, got shape {img.shape}")
    if img.size == 0:
        raise ValueError("image is empty")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 gray image, got {img.dtype}")
    return img


def check_color(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) color image, got shape {img.shape}")
    if img.size == 0:
        raise ValueError("image is empty")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 color image, got {img.dtype}")
    return img


def check_binary(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D binary image, got shape {img.shape}")
    if img.dtype != np.bool_:
        if not np.isin(img, (0, 1)).all():
            raise ValueError("binary image values must be 0 or 1")
        img = img.astype(bool)
    return img


def make_kernel(weights) -> np.ndarray:
    k = np.asarray(weights, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError(f"kernel must be square, got shape {k.shape}")
    if k.shape[0] % 2 == 0:
        raise ValueError(f"kernel size must be odd, got {k.shape[0]}")
    return k


def convolve(img: np.ndarray, kernel) -> np.ndarray:
    """Convolve a gray image with an odd square kernel.

    True convolution (the kernel is flipped), replicate-padded borders, and
    no clamping: the result is a float64 signed image of the input's shape.
    Integer kernels on 8-bit input give exact integer-valued results.
    """
    img = check_gray(img)
    k = make_kernel(kernel)
    r = k.shape[0] // 2
    h, w = img.shape
    padded = np.pad(img.astype(np.float64), r, mode="edge")
    out = np.zeros((h, w), dtype=np.float64)
    # out[y, x] = sum_{i,j} k[i, j] * img[y - (i - r), x - (j - r)]
    for i in range(k.shape[0]):
        for j in range(k.shape[1]):
            wgt = k[i, j]
            if wgt == 0.0:
                continue
            dy, dx = r - (i - r), r - (j - r)
            out += wgt * padded[dy:dy + h, dx:dx + w]
    return out


def clamp_to_gray(img: np.ndarray) -> np.ndarray:
    """Round half away from zero, then saturate into [0, 255]."""
    a = np.asarray(img, dtype=np.float64)
    rounded = np.sign(a) * np.floor(np.abs(a) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def invert(img: np.ndarray) -> np.ndarray:
    img = check_gray(img)
    return (255 - img).astype(np.uint8)


def to_gray(img: np.ndarray) -> np.ndarray:
    """Plain channel average, floored: ``(R + G + B) // 3``."""
    img = check_color(img)
    total = img.astype(np.uint16).sum(axis=2)
    return (total // 3).astype(np.uint8)


def histogram(img: np.ndarray) -> np.ndarray:
    img = check_gray(img)
    return np.bincount(img.ravel(), minlength=256).astype(np.int64)


def mean_intensity(img: np.ndarray) -> float:
    img = check_gray(img)
    return int(img.sum(dtype=np.int64)) / img.size
