"""Connected-component labeling (the label matrix)."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imgcore import check_binary

_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True, eq=False)
class LabelMap:
    labels: np.ndarray  # int32, 0 = background
    count: int

    @property
    def shape(self):
        return self.labels.shape

    def __eq__(self, other):
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.count == other.count and np.array_equal(self.labels, other.labels)


def label_components(mask: np.ndarray, connectivity: int = 8) -> LabelMap:
    """Label the maximal connected foreground components of a binary image.

    Labels run 1..count in raster order of each component's first pixel.
    """
    mask = check_binary(mask)
    if connectivity not in _STRUCTURES:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    raw, count = ndimage.label(mask, structure=_STRUCTURES[connectivity])
    raw = raw.astype(np.int32, copy=False)
    if count:
        # enforce raster order of first encounter independent of scipy internals
        flat = raw.ravel()
        present, first = np.unique(flat, return_index=True)
        fg = present > 0  # background may be absent when the mask is full
        order = present[fg][np.argsort(first[fg], kind="stable")]
        remap = np.zeros(count + 1, dtype=np.int32)
        remap[order] = np.arange(1, count + 1, dtype=np.int32)
        raw = remap[raw]
    return LabelMap(raw, int(count))
