"""Per-contour gradient-density decision and the end-to-end detection pipeline."""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .enhance import NormalizationParams, normalize_illumination, sharpen_color
from .imgcore import DegenerateImageError, check_binary, check_color, invert, to_gray
from .labeling import LabelMap, label_components
from .morph import StructuringElement, close, remove_small_contours
from .segment import binarize, iterative_threshold
from .texture import gradient_binary, gradient_magnitude

__all__ = [
    "PipelineConfig", "ContourVerdict", "DetectionReport", "LabelMap",
    "label_components", "global_density", "contour_density", "is_plasmodium",
    "classify", "pipeline_stages", "run_pipeline",
]


@dataclass(frozen=True)
class PipelineConfig:
    normalization: NormalizationParams = field(default_factory=NormalizationParams)
    t0: float = 0.5
    se: StructuringElement = field(default_factory=StructuringElement)
    min_area: int = 50
    k: float = 5.0
    connectivity: int = 8

    def __post_init__(self):
        if not self.k > 1:
            raise ValueError(f"ratio factor k must be > 1, got {self.k}")
        if self.min_area < 1:
            raise ValueError(f"min_area must be >= 1, got {self.min_area}")
        if self.t0 <= 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if self.connectivity != 8:
            raise ValueError(f"only 8-connectivity is supported, got {self.connectivity}")

    def to_dict(self) -> dict:
        return {
            "normalization": asdict(self.normalization),
            "t0": self.t0,
            "se": {"shape": self.se.shape, "size": self.se.size},
            "min_area": self.min_area,
            "k": self.k,
            "connectivity": self.connectivity,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        """Build a config from a (possibly partial) mapping; missing keys take defaults."""
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        known = {"normalization", "t0", "se", "min_area", "k", "connectivity"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        if "normalization" in data:
            norm = data["normalization"]
            if not isinstance(norm, dict):
                raise ValueError("'normalization' must be an object")
            kwargs["normalization"] = NormalizationParams(**norm)
        if "se" in data:
            se = data["se"]
            if not isinstance(se, dict):
                raise ValueError("'se' must be an object")
            kwargs["se"] = StructuringElement(**se)
        for key, cast in (("t0", float), ("min_area", int), ("k", float), ("connectivity", int)):
            if key in data:
                kwargs[key] = cast(data[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ValueError(str(exc)) from exc


@dataclass(frozen=True)
class ContourVerdict:
    label: int
    area: int
    centroid: tuple  # (x, y)
    local_value: float
    is_plasmodium: bool


@dataclass
class DetectionReport:
    image: str
    width: int
    height: int
    global_value: float
    threshold: Optional[float]
    contours: list
    plasmodium_found: bool
    config: dict
    # sha256 of every intermediate raster; kept out of the JSON schema
    digests: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "image": self.image,
            "width": self.width,
            "height": self.height,
            "global_value": _sig6(self.global_value),
            "threshold": None if self.threshold is None else _sig6(self.threshold),
            "contours": [
                {
                    "label": c.label,
                    "area": c.area,
                    "centroid": [_sig6(c.centroid[0]), _sig6(c.centroid[1])],
                    "local_value": _sig6(c.local_value),
                    "is_plasmodium": c.is_plasmodium,
                }
                for c in self.contours
            ],
            "plasmodium_found": self.plasmodium_found,
            "config": _round_floats(self.config),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "DetectionReport":
        return cls(
            image=d["image"],
            width=int(d["width"]),
            height=int(d["height"]),
            global_value=float(d["global_value"]),
            threshold=None if d["threshold"] is None else float(d["threshold"]),
            contours=[
                ContourVerdict(
                    label=int(c["label"]),
                    area=int(c["area"]),
                    centroid=(float(c["centroid"][0]), float(c["centroid"][1])),
                    local_value=float(c["local_value"]),
                    is_plasmodium=bool(c["is_plasmodium"]),
                )
                for c in d["contours"]
            ],
            plasmodium_found=bool(d["plasmodium_found"]),
            config=d["config"],
        )

    @classmethod
    def from_json(cls, text: str) -> "DetectionReport":
        return cls.from_dict(json.loads(text))


def _sig6(x: float) -> float:
    return float(f"{float(x):.6g}")


def _round_floats(obj):
    if isinstance(obj, bool) or isinstance(obj, int) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, float):
        return _sig6(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def global_density(gradmask: np.ndarray) -> float:
    """Fraction of all pixels set in the gradient mask."""
    gradmask = check_binary(gradmask)
    if gradmask.size == 0:
        raise ValueError("gradient mask is empty")
    return int(np.count_nonzero(gradmask)) / gradmask.size


def contour_density(lm: LabelMap, label: int, gradmask: np.ndarray) -> float:
    """Fraction of one contour's pixels that are set in the gradient mask."""
    gradmask = check_binary(gradmask)
    if gradmask.shape != lm.shape:
        raise ValueError(f"shape mismatch: labels {lm.shape} vs gradient mask {gradmask.shape}")
    if not 1 <= label <= lm.count:
        raise ValueError(f"label {label} outside 1..{lm.count}")
    ys, xs = np.nonzero(lm.labels == label)
    return int(np.count_nonzero(gradmask[ys, xs])) / ys.size


def is_plasmodium(local_value: float, global_value: float, k: float) -> bool:
    """``local >> global`` read as ``local >= k * global``, never firing on an empty contour."""
    return local_value > 0 and local_value >= k * global_value


def classify(lm: LabelMap, gradmask: np.ndarray, cfg: PipelineConfig = PipelineConfig(),
             image: str = "", threshold: Optional[float] = None) -> DetectionReport:
    gradmask = check_binary(gradmask)
    if gradmask.shape != lm.shape:
        raise ValueError(f"shape mismatch: labels {lm.shape} vs gradient mask {gradmask.shape}")
    val = global_density(gradmask)
    flat = lm.labels.ravel()
    n = lm.count + 1
    areas = np.bincount(flat, minlength=n)
    ones = np.bincount(flat, weights=gradmask.ravel().astype(np.float64), minlength=n)
    h, w = lm.shape
    ys, xs = np.divmod(np.arange(flat.size, dtype=np.int64), w)
    sum_x = np.bincount(flat, weights=xs.astype(np.float64), minlength=n)
    sum_y = np.bincount(flat, weights=ys.astype(np.float64), minlength=n)

    contours = []
    for label in range(1, n):
        area = int(areas[label])
        local = int(ones[label]) / area
        verdict = area >= cfg.min_area and is_plasmodium(local, val, cfg.k)
        contours.append(ContourVerdict(
            label=label,
            area=area,
            centroid=(sum_x[label] / area, sum_y[label] / area),
            local_value=local,
            is_plasmodium=bool(verdict),
        ))
    return DetectionReport(
        image=image,
        width=w,
        height=h,
        global_value=val,
        threshold=threshold,
        contours=contours,
        plasmodium_found=any(c.is_plasmodium for c in contours),
        config=cfg.to_dict(),
    )


def _digest(arr: np.ndarray) -> str:
    arr = np.ascontiguousarray(arr)
    h = hashlib.sha256()
    h.update(f"{arr.dtype.str}{arr.shape}".encode())
    h.update(arr.tobytes())
    return h.hexdigest()


def pipeline_stages(img: np.ndarray, cfg: PipelineConfig = PipelineConfig()) -> dict:
    """Run every stage and return the intermediate rasters by name.

    ``threshold`` is None and the contour mask empty when the normalized image
    is constant (a blank tile).
    """
    img = check_color(img)
    stages = {}
    stages["sharpened"] = sharpen_color(img)
    stages["gray"] = to_gray(stages["sharpened"])
    stages["inverted"] = invert(stages["gray"])
    stages["normalized"] = normalize_illumination(stages["inverted"], cfg.normalization)
    try:
        th = iterative_threshold(stages["normalized"], cfg.t0).threshold
        stages["binary"] = binarize(stages["normalized"], th)
    except DegenerateImageError:
        th = None
        stages["binary"] = np.zeros(img.shape[:2], dtype=bool)
    stages["closed"] = close(stages["binary"], cfg.se)
    stages["filtered"] = remove_small_contours(stages["closed"], cfg.min_area, cfg.connectivity)
    stages["labels"] = label_components(stages["filtered"], cfg.connectivity)
    stages["gradient"] = gradient_magnitude(stages["inverted"])
    stages["gradient_mask"] = gradient_binary(stages["gradient"], cfg.t0)
    stages["threshold"] = th
    return stages


def run_pipeline(img: np.ndarray, cfg: PipelineConfig = PipelineConfig(), image: str = "") -> DetectionReport:
    stages = pipeline_stages(img, cfg)
    return report_from_stages(stages, cfg, image)


def report_from_stages(stages: dict, cfg: PipelineConfig, image: str = "") -> DetectionReport:
    report = classify(stages["labels"], stages["gradient_mask"], cfg,
                      image=image, threshold=stages["threshold"])
    for name, value in stages.items():
        if isinstance(value, LabelMap):
            report.digests[name] = _digest(value.labels)
        elif isinstance(value, np.ndarray):
            report.digests[name] = _digest(value)
    return report
