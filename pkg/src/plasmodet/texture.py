"""Sobel gradient magnitude and its binarization (rough vs smooth surface)."""

import numpy as np

from .imgcore import DegenerateImageError, check_gray, convolve
from .segment import binarize, iterative_threshold

SOBEL_X = np.array([[-1, 0, 1],
                    [-2, 0, 2],
                    [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()


def gradient_magnitude(img: np.ndarray) -> np.ndarray:
    """Per-pixel ``sqrt(gx**2 + gy**2)`` of the 3x3 Sobel responses (replicate border)."""
    img = check_gray(img)
    gx = convolve(img, SOBEL_X)
    gy = convolve(img, SOBEL_Y)
    return np.sqrt(gx * gx + gy * gy)


def rescale_to_gray(gm: np.ndarray) -> np.ndarray:
    """Map magnitudes linearly onto [0, 255] with 0 fixed and the maximum at 255."""
    gm = np.asarray(gm, dtype=np.float64)
    peak = float(gm.max())
    if peak <= 0:
        return np.zeros(gm.shape, dtype=np.uint8)
    return np.floor(gm * (255.0 / peak) + 0.5).astype(np.uint8)


def gradient_binary(gm: np.ndarray, t0: float = 0.5) -> np.ndarray:
    """Threshold the rescaled gradient map with the iterative two-class rule.

    A map with no spread (e.g. from a blank tile) yields an all-zero mask.
    """
    gm = np.asarray(gm, dtype=np.float64)
    if gm.ndim != 2 or gm.size == 0:
        raise ValueError(f"expected a non-empty 2-D gradient map, got shape {gm.shape}")
    if np.any(gm < 0):
        raise ValueError("gradient magnitudes must be non-negative")
    scaled = rescale_to_gray(gm)
    try:
        result = iterative_threshold(scaled, t0)
    except DegenerateImageError:
        return np.zeros(gm.shape, dtype=bool)
    return binarize(scaled, result.threshold)
