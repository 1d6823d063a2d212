"""Synthetic blood-smear generator with per-object ground truth, and scoring."""

from dataclasses import asdict, dataclass, field

import numpy as np

from .texture import gradient_magnitude
from .imgcore import to_gray

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


class PlacementError(RuntimeError):
    """Requested objects could not be placed inside the frame."""


class SplitMix64:
    """SplitMix64 (Steele, Lea & Flood 2014) with vectorized block draws.

    Output ``i`` of a stream is ``mix(seed + i * GOLDEN_GAMMA)`` for ``i = 1, 2, ...``,
    so a block of ``n`` values is computed in one numpy pass and any platform
    reproduces the same sequence.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
        self.state = (self.state + n * GOLDEN_GAMMA) & _MASK64
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
        return z ^ (z >> np.uint64(31))

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1) from the top 53 bits."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def random(self) -> float:
        return float(self.uniform(1)[0])

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        return lo + min(int(self.random() * (hi - lo + 1)), hi - lo)


@dataclass(frozen=True)
class SmearSpec:
    width: int = 160
    height: int = 160
    rbc_count: int = 17
    parasite_count: int = 0
    rbc_radius: tuple = (10, 14)
    parasite_radius: tuple = (7, 10)
    background_level: int = 215
    illumination_amplitude: int = 10
    rbc_depth: int = 45
    # width of the smooth falloff at the cell edge; >= radius gives a dome
    rbc_rim_width: float = 14.0
    parasite_depth: int = 105
    texture_amplitude: int = 60
    noise_amplitude: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("frame dimensions must be positive")
        if self.rbc_count < 0 or self.parasite_count < 0:
            raise ValueError("object counts must be >= 0")
        for name in ("rbc_radius", "parasite_radius"):
            lo, hi = getattr(self, name)
            if lo < 2 or hi < lo:
                raise ValueError(f"{name} must satisfy 2 <= min <= max, got {(lo, hi)}")
        if not 0 <= self.background_level <= 255:
            raise ValueError("background_level must be an intensity")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rbc_radius"] = list(self.rbc_radius)
        d["parasite_radius"] = list(self.parasite_radius)
        return d


@dataclass(frozen=True)
class SmearObject:
    kind: str  # "rbc" or "parasite"
    center: tuple  # (x, y)
    radius: int

    def mask(self, shape) -> np.ndarray:
        return disk_mask(shape, self.center, self.radius)


@dataclass
class GroundTruth:
    width: int
    height: int
    objects: list = field(default_factory=list)

    @property
    def parasites(self):
        return [o for o in self.objects if o.kind == "parasite"]

    @property
    def rbcs(self):
        return [o for o in self.objects if o.kind == "rbc"]

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "objects": [
                {"kind": o.kind, "center": list(o.center), "radius": o.radius}
                for o in self.objects
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(d["width"], d["height"], [
            SmearObject(o["kind"], tuple(o["center"]), int(o["radius"])) for o in d["objects"]
        ])


def disk_mask(shape, center, radius) -> np.ndarray:
    h, w = shape
    cx, cy = center
    yy, xx = np.ogrid[:h, :w]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius


# Stain tints: offsets added to the gray level of each RGB channel.
_BACKGROUND_TINT = np.array([18, -12, 0])
_RBC_TINT = np.array([25, -20, -5])
_PARASITE_TINT = np.array([-10, -25, 30])

MAX_PLACEMENT_TRIES = 2000
MAX_REGENERATIONS = 20


def _place(rng, spec, kind, radius_range, placed, avoid_kinds):
    lo, hi = radius_range
    for _ in range(MAX_PLACEMENT_TRIES):
        r = rng.integer(lo, hi)
        if 2 * r + 1 > min(spec.width, spec.height):
            raise PlacementError(f"{kind} radius {r} does not fit a {spec.width}x{spec.height} frame")
        cx = rng.integer(r, spec.width - 1 - r)
        cy = rng.integer(r, spec.height - 1 - r)
        clash = False
        for o in placed:
            if o.kind not in avoid_kinds:
                continue
            gap = 3 if o.kind == kind else 0
            if (o.center[0] - cx) ** 2 + (o.center[1] - cy) ** 2 <= (o.radius + r + gap) ** 2:
                clash = True
                break
        if not clash:
            return SmearObject(kind, (cx, cy), r)
    raise PlacementError(f"could not place {kind} after {MAX_PLACEMENT_TRIES} tries")


def _render(spec, objects, rng) -> np.ndarray:
    h, w = spec.height, spec.width
    ramp = np.linspace(-spec.illumination_amplitude / 2, spec.illumination_amplitude / 2, w)
    level = np.full((h, w), float(spec.background_level)) + ramp[None, :]
    rgb = level[:, :, None] + _BACKGROUND_TINT[None, None, :]
    yy, xx = np.mgrid[:h, :w]
    for o in objects:
        if o.kind != "rbc":
            continue
        m = o.mask((h, w))
        dist = np.hypot(xx[m] - o.center[0], yy[m] - o.center[1])
        # smoothstep falloff across the outer rim keeps the membrane gradient low
        u = np.clip((o.radius - dist) / spec.rbc_rim_width, 0.0, 1.0)
        weight = u * u * (3 - 2 * u)
        rgb[m] = (rgb[m] * (1 - weight)[:, None]
                  + (level[m][:, None] - spec.rbc_depth + _RBC_TINT) * weight[:, None])
    for o in objects:
        if o.kind != "parasite":
            continue
        m = o.mask((h, w))
        n = int(m.sum())
        texture = (rng.uniform(n) * 2 - 1) * spec.texture_amplitude
        rgb[m] = (level[m] - spec.parasite_depth + texture)[:, None] + _PARASITE_TINT
    if spec.noise_amplitude:
        noise = (rng.uniform(h * w) * 2 - 1) * spec.noise_amplitude
        rgb += noise.reshape(h, w)[:, :, None]
    return np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)


def texture_contrast(img: np.ndarray, gt: GroundTruth):
    """Mean Sobel magnitude inside parasites and inside RBC-only regions."""
    gm = gradient_magnitude(to_gray(img))
    shape = gm.shape
    para = np.zeros(shape, dtype=bool)
    for o in gt.parasites:
        para |= o.mask(shape)
    rbc = np.zeros(shape, dtype=bool)
    for o in gt.rbcs:
        rbc |= o.mask(shape)
    rbc &= ~para
    p = float(gm[para].mean()) if para.any() else 0.0
    r = float(gm[rbc].mean()) if rbc.any() else 0.0
    return p, r


def generate(spec: SmearSpec):
    """Render a smear image and its ground truth; a pure function of ``spec``.

    RBCs are smooth disks that never overlap each other; parasites are
    textured disks that never overlap each other but may sit on RBCs.
    Placement is redrawn (from the same stream) if the parasites fail to out-texture
    the RBCs.
    """
    rng = SplitMix64(spec.seed)
    for _ in range(MAX_REGENERATIONS):
        objects = []
        for _ in range(spec.rbc_count):
            objects.append(_place(rng, spec, "rbc", spec.rbc_radius, objects, {"rbc"}))
        for _ in range(spec.parasite_count):
            objects.append(_place(rng, spec, "parasite", spec.parasite_radius, objects, {"parasite"}))
        img = _render(spec, objects, rng)
        gt = GroundTruth(spec.width, spec.height, objects)
        if not gt.parasites or not gt.rbcs:
            return img, gt
        p, r = texture_contrast(img, gt)
        if p > r:
            return img, gt
    raise PlacementError("texture contrast guarantee not met after regeneration")


@dataclass
class Metrics:
    """Image-level confusion counts plus parasite-level matching counts."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    parasites: int = 0
    parasites_matched: int = 0
    detections: int = 0
    detections_matched: int = 0

    def __add__(self, other: "Metrics") -> "Metrics":
        return Metrics(*(a + b for a, b in zip(asdict(self).values(), asdict(other).values())))

    @property
    def images(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.images if self.images else 0.0

    @property
    def sensitivity(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def specificity(self) -> float:
        return self.tn / (self.tn + self.fp) if self.tn + self.fp else 0.0


def score(report, gt: GroundTruth) -> Metrics:
    """Score one report against its ground truth.

    A flagged contour matches a parasite when its centroid falls inside the
    parasite's disk.
    """
    if (report.width, report.height) != (gt.width, gt.height):
        raise ValueError("report and ground truth describe different frames")
    shape = (gt.height, gt.width)
    masks = [o.mask(shape) for o in gt.parasites]
    flagged = [c for c in report.contours if c.is_plasmodium]
    matched_parasites = set()
    matched_detections = 0
    for c in flagged:
        x, y = int(np.floor(c.centroid[0] + 0.5)), int(np.floor(c.centroid[1] + 0.5))
        hit = False
        if 0 <= x < gt.width and 0 <= y < gt.height:
            for i, m in enumerate(masks):
                if m[y, x]:
                    matched_parasites.add(i)
                    hit = True
        matched_detections += hit
    positive = bool(masks)
    m = Metrics(parasites=len(masks), parasites_matched=len(matched_parasites),
                detections=len(flagged), detections_matched=matched_detections)
    if positive and report.plasmodium_found:
        m.tp = 1
    elif positive:
        m.fn = 1
    elif report.plasmodium_found:
        m.fp = 1
    else:
        m.tn = 1
    return m
