"""Laplacian sharpening and global illumination normalization."""

from dataclasses import dataclass

import numpy as np

from .imgcore import check_color, check_gray, clamp_to_gray, convolve, histogram, mean_intensity

LAPLACIAN_4 = np.array([[0, 1, 0],
                        [1, -4, 1],
                        [0, 1, 0]], dtype=np.float64)


@dataclass(frozen=True)
class NormalizationParams:
    subtract_fraction: float = 0.45
    top_fraction: float = 1 / 80
    activation_threshold: float = 40.0

    def __post_init__(self):
        if not 0 < self.subtract_fraction < 1:
            raise ValueError(f"subtract_fraction must lie in (0, 1), got {self.subtract_fraction}")
        if not 0 < self.top_fraction < 1:
            raise ValueError(f"top_fraction must lie in (0, 1), got {self.top_fraction}")
        if not 0 <= self.activation_threshold <= 255:
            raise ValueError(
                f"activation_threshold must lie in [0, 255], got {self.activation_threshold}")


def laplacian(img: np.ndarray) -> np.ndarray:
    return convolve(img, LAPLACIAN_4)


def sharpen(img: np.ndarray) -> np.ndarray:
    """Edge sharpening ``f - lap(f)`` with the 4-neighbour Laplacian, clamped to 8 bits."""
    img = check_gray(img)
    return clamp_to_gray(img.astype(np.float64) - laplacian(img))


def sharpen_color(img: np.ndarray) -> np.ndarray:
    img = check_color(img)
    return np.stack([sharpen(np.ascontiguousarray(img[:, :, c])) for c in range(3)], axis=2)


def top_group_mean(img: np.ndarray, top_fraction: float) -> float:
    """Mean of the ``max(1, floor(top_fraction * N))`` brightest pixels.

    Walks the histogram down from bin 255; the boundary bin contributes only
    as many pixels as are still needed.
    """
    img = check_gray(img)
    if not 0 < top_fraction < 1:
        raise ValueError(f"top_fraction must lie in (0, 1), got {top_fraction}")
    n = max(1, int(np.floor(top_fraction * img.size)))
    hist = histogram(img)
    remaining = n
    total = 0
    for v in range(255, -1, -1):
        take = min(int(hist[v]), remaining)
        total += take * v
        remaining -= take
        if remaining == 0:
            break
    return total / n


def normalize_illumination(inverted: np.ndarray, params: NormalizationParams = NormalizationParams()) -> np.ndarray:
    """Pull down the inverted gray image when its bright tail stands far above the mean.

    When the top-group mean exceeds the global mean by more than
    ``activation_threshold``, ``round(subtract_fraction * mean)`` is subtracted
    from every pixel (floored at zero); otherwise the image is returned as is.
    """
    inverted = check_gray(inverted)
    m = mean_intensity(inverted)
    t = top_group_mean(inverted, params.top_fraction)
    if t - m <= params.activation_threshold:
        return inverted.copy()
    amount = int(np.floor(params.subtract_fraction * m + 0.5))
    out = inverted.astype(np.int16) - amount
    return np.clip(out, 0, 255).astype(np.uint8)
