"""Binary morphology: dilation, erosion, closing and small-component removal."""

from dataclasses import dataclass

import numpy as np

from .imgcore import check_binary
from .labeling import label_components


@dataclass(frozen=True)
class StructuringElement:
    """Square or disk structuring element with its origin at the centre cell."""

    shape: str = "square"
    size: int = 3

    def __post_init__(self):
        if self.shape not in ("square", "disk"):
            raise ValueError(f"unknown structuring element shape {self.shape!r}")
        if self.size < 1 or self.size % 2 == 0:
            raise ValueError(f"structuring element size must be odd and >= 1, got {self.size}")

    @property
    def radius(self) -> int:
        return self.size // 2

    @property
    def mask(self) -> np.ndarray:
        r = self.radius
        if self.shape == "square":
            return np.ones((self.size, self.size), dtype=bool)
        yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
        return (xx * xx + yy * yy) <= r * r

    def offsets(self):
        """(dy, dx) of every active cell relative to the origin."""
        r = self.radius
        ys, xs = np.nonzero(self.mask)
        return [(int(y) - r, int(x) - r) for y, x in zip(ys, xs)]


SQUARE_3 = StructuringElement("square", 3)


def _shifted(padded: np.ndarray, r: int, dy: int, dx: int, shape) -> np.ndarray:
    # view of the input at (y + dy, x + dx) for every output (y, x)
    h, w = shape
    return padded[r + dy:r + dy + h, r + dx:r + dx + w]


def dilate(img: np.ndarray, se: StructuringElement = SQUARE_3) -> np.ndarray:
    """Minkowski sum: ``out[p] = 1`` iff ``img[p - b] = 1`` for some SE cell ``b``.

    Pixels outside the frame count as background.
    """
    img = check_binary(img)
    r = se.radius
    padded = np.pad(img, r, constant_values=False)
    out = np.zeros(img.shape, dtype=bool)
    for dy, dx in se.offsets():
        out |= _shifted(padded, r, -dy, -dx, img.shape)
    return out


def erode(img: np.ndarray, se: StructuringElement = SQUARE_3) -> np.ndarray:
    """``out[p] = 1`` iff ``img[p + b] = 1`` for every SE cell ``b``; outside is background."""
    img = check_binary(img)
    r = se.radius
    padded = np.pad(img, r, constant_values=False)
    out = np.ones(img.shape, dtype=bool)
    for dy, dx in se.offsets():
        out &= _shifted(padded, r, dy, dx, img.shape)
    return out


def reflect(se: StructuringElement) -> StructuringElement:
    # square and disk elements are point-symmetric
    return se


def close(img: np.ndarray, se: StructuringElement = SQUARE_3) -> np.ndarray:
    """Dilation followed by erosion, evaluated on a frame grown by the SE radius.

    The margin lets the dilated set extend past the image edge before it is
    eroded back, so objects touching the border are not shaved off.
    """
    img = check_binary(img)
    r = se.radius
    grown = np.pad(img, r, constant_values=False)
    closed = erode(dilate(grown, se), se)
    return closed[r:r + img.shape[0], r:r + img.shape[1]]


def remove_small_contours(img: np.ndarray, min_area: int, connectivity: int = 8) -> np.ndarray:
    """Zero every connected component with fewer than ``min_area`` pixels."""
    img = check_binary(img)
    if min_area < 0:
        raise ValueError(f"min_area must be >= 0, got {min_area}")
    if min_area == 0:
        return img.copy()
    lm = label_components(img, connectivity)
    areas = np.bincount(lm.labels.ravel(), minlength=lm.count + 1)
    keep = areas >= min_area
    keep[0] = False
    return keep[lm.labels]
