"""Read and write PNG / binary PGM / binary PPM rasters."""

from pathlib import Path

import numpy as np
from PIL import Image

SUPPORTED_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm")


def read_color(path) -> np.ndarray:
    """Load any supported raster as an (H, W, 3) uint8 array.

    Gray inputs are replicated into three identical planes, which leaves the
    averaged gray image unchanged.
    """
    with Image.open(path) as im:
        im.load()
        if im.mode in ("L", "1", "P", "I", "I;16"):
            if im.mode == "P":
                return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
            gray = np.asarray(im.convert("L"), dtype=np.uint8)
            return np.repeat(gray[:, :, None], 3, axis=2)
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_image(path, img: np.ndarray) -> None:
    """Write a gray (2-D) or RGB (3-D) uint8 array; format follows the suffix."""
    path = Path(path)
    arr = np.asarray(img)
    if arr.dtype == np.bool_:
        arr = arr.astype(np.uint8) * 255
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 data, got {arr.dtype}")
    suffix = path.suffix.lower()
    if arr.ndim == 2:
        im = Image.fromarray(arr, mode="L")
    elif arr.ndim == 3 and arr.shape[2] == 3:
        im = Image.fromarray(arr, mode="RGB")
    else:
        raise ValueError(f"cannot write array of shape {arr.shape}")
    if suffix == ".png":
        im.save(path, format="PNG")
    elif suffix in (".ppm", ".pgm", ".pnm"):
        if suffix == ".pgm" and arr.ndim != 2:
            raise ValueError("PGM holds gray images only")
        im.save(path, format="PPM")
    else:
        raise ValueError(f"unsupported image suffix {suffix!r}")
