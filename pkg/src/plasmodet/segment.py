"""Iterative two-class mean threshold and binarization."""

from dataclasses import dataclass

import numpy as np

from .imgcore import DegenerateImageError, check_gray, histogram

MAX_ITERATIONS = 256


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    iterations: int
    converged: bool


def _class_means(hist: np.ndarray, levels: np.ndarray, t: float):
    upper = levels > t
    n1 = int(hist[upper].sum())
    n2 = int(hist[~upper].sum())
    if n1 == 0 or n2 == 0:
        raise DegenerateImageError(f"threshold {t} leaves one class empty")
    s1 = int((hist[upper] * levels[upper]).sum())
    s2 = int((hist[~upper] * levels[~upper]).sum())
    return s1 / n1, s2 / n2


def iterative_threshold(img: np.ndarray, t0: float = 0.5) -> ThresholdResult:
    """Select a global threshold by the iterative two-class mean rule.

    Starts at the mean gray level and repeatedly replaces T with the midpoint
    of the means of the pixels above T and those at or below T. Stops as soon
    as a proposed update would move T by less than ``t0`` (T is then a verified
    near-fixed point), or after ``MAX_ITERATIONS`` updates with
    ``converged=False``.

    Raises DegenerateImageError for a constant image.
    """
    img = check_gray(img)
    if t0 <= 0:
        raise ValueError(f"t0 must be positive, got {t0}")
    return threshold_from_histogram(histogram(img), t0)


def threshold_from_histogram(hist: np.ndarray, t0: float = 0.5) -> ThresholdResult:
    hist = np.asarray(hist, dtype=np.int64)
    levels = np.arange(hist.size, dtype=np.int64)
    total = int(hist.sum())
    if total == 0:
        raise DegenerateImageError("empty histogram")
    t = int((hist * levels).sum()) / total
    for it in range(1, MAX_ITERATIONS + 1):
        mu1, mu2 = _class_means(hist, levels, t)
        proposed = 0.5 * (mu1 + mu2)
        if abs(proposed - t) < t0:
            return ThresholdResult(t, it, True)
        t = proposed
    return ThresholdResult(t, MAX_ITERATIONS, False)


def binarize(img: np.ndarray, threshold: float) -> np.ndarray:
    img = check_gray(img)
    return img > threshold
