"""Batch front end: scan images or tiled slides, render overlays, write synthetic corpora.

Exit codes: 0 success, 1 every input failed (or none given), 2 usage or
configuration error, 3 a parasite was found and ``--fail-on-detect`` is set.
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .detect import DetectionReport, PipelineConfig, pipeline_stages, report_from_stages
from .imageio import SUPPORTED_SUFFIXES, read_color, write_image
from .synth import PlacementError, SmearSpec, generate

log = logging.getLogger("plasmodet")

EXIT_OK = 0
EXIT_ALL_FAILED = 1
EXIT_USAGE = 2
EXIT_DETECTED = 3

MIN_TILE = 64

FLAGGED_COLOR = (255, 0, 0)
REJECTED_COLOR = (0, 200, 255)
BADGE_COLOR = (128, 128, 128)
BADGE_SIZE = 8


class UsageError(Exception):
    pass


@dataclass
class ScanJob:
    inputs: list
    out_dir: Path
    tile: Optional[tuple] = None  # (width, height)
    config: PipelineConfig = field(default_factory=PipelineConfig)
    overlay: bool = False
    fail_on_detect: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.tile is not None and (self.tile[0] < MIN_TILE or self.tile[1] < MIN_TILE):
            raise UsageError(f"tiles must be at least {MIN_TILE}x{MIN_TILE}, got {self.tile[0]}x{self.tile[1]}")


# -- overlays -----------------------------------------------------------------

def contour_boundaries(labels: np.ndarray) -> np.ndarray:
    """Foreground pixels with a 4-neighbour of a different label (frame edge counts)."""
    padded = np.pad(labels, 1, constant_values=-1)
    core = padded[1:-1, 1:-1]
    interior = ((padded[:-2, 1:-1] == core) & (padded[2:, 1:-1] == core)
                & (padded[1:-1, :-2] == core) & (padded[1:-1, 2:] == core))
    return (labels > 0) & ~interior


def render_overlay(img: np.ndarray, labels: np.ndarray, report: DetectionReport) -> np.ndarray:
    """Outline flagged contours in red and rejected ones in cyan.

    When nothing is flagged a gray badge marks the top-left corner.
    """
    if img.shape[:2] != labels.shape or labels.shape != (report.height, report.width):
        raise ValueError("image, labels and report dimensions differ")
    out = img.copy()
    edges = contour_boundaries(labels)
    flagged = np.zeros(len(report.contours) + 1, dtype=bool)
    for c in report.contours:
        flagged[c.label] = c.is_plasmodium
    on_flagged = edges & flagged[labels]
    out[edges & ~on_flagged] = REJECTED_COLOR
    out[on_flagged] = FLAGGED_COLOR
    if not report.plasmodium_found:
        out[:BADGE_SIZE, :BADGE_SIZE] = BADGE_COLOR
    return out


def overlay(img: np.ndarray, report: DetectionReport) -> np.ndarray:
    """Re-derive the contours of ``img`` under the report's config and draw them."""
    if img.shape[:2] != (report.height, report.width):
        raise ValueError(
            f"image is {img.shape[1]}x{img.shape[0]} but report is {report.width}x{report.height}")
    stages = pipeline_stages(img, PipelineConfig.from_dict(report.config))
    lm = stages["labels"]
    if lm.count != len(report.contours):
        raise ValueError("report does not correspond to this image")
    return render_overlay(img, lm.labels, report)


# -- scanning -----------------------------------------------------------------

def iter_tiles(width: int, height: int, tile):
    """Row-major tile windows ``(row, col, x0, y0, x1, y1)``; edge tiles are clipped."""
    if tile is None:
        yield 0, 0, 0, 0, width, height
        return
    tw, th = tile
    for row, y0 in enumerate(range(0, height, th)):
        for col, x0 in enumerate(range(0, width, tw)):
            yield row, col, x0, y0, min(x0 + tw, width), min(y0 + th, height)


def collect_inputs(paths) -> list:
    found = []
    for p in map(Path, paths):
        if p.is_dir():
            found.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in SUPPORTED_SUFFIXES))
        else:
            found.append(p)
    return found


def _scan_unit(img, name, image_id, cfg, out_dir, want_overlay):
    stages = pipeline_stages(img, cfg)
    report = report_from_stages(stages, cfg, image_id)
    (out_dir / f"{name}.report.json").write_text(report.to_json())
    if want_overlay:
        write_image(out_dir / f"{name}.overlay.png",
                    render_overlay(img, stages["labels"].labels, report))
    return report


def _submit_file(path: Path, job: ScanJob, pool):
    """Decode one input and queue its tiles; returns (summary entry, pending units)."""
    entry = {"input": str(path), "status": "ok", "reports": [], "plasmodium_found": False}
    try:
        img = read_color(path)
    except Exception as exc:  # noqa: BLE001 - any decode failure is reported per file
        log.warning("cannot read %s: %s", path, exc)
        entry.update(status="error", error=str(exc))
        return entry, []
    h, w = img.shape[:2]
    units = []
    for row, col, x0, y0, x1, y1 in iter_tiles(w, h, job.tile):
        if job.tile is None:
            name, image_id = path.stem, path.name
        else:
            name = f"{path.stem}.r{row:03d}c{col:03d}"
            image_id = f"{path.name}@{x0},{y0}"
        tile = np.ascontiguousarray(img[y0:y1, x0:x1])
        units.append((name, pool.submit(_scan_unit, tile, name, image_id,
                                        job.config, job.out_dir, job.overlay)))
    return entry, units


def scan(job: ScanJob) -> int:
    job.out_dir.mkdir(parents=True, exist_ok=True)
    inputs = collect_inputs(job.inputs)
    with ThreadPoolExecutor(max_workers=max(1, job.jobs)) as pool:
        pending = [_submit_file(p, job, pool) for p in inputs]
        entries = []
        for entry, units in pending:
            for name, fut in units:
                report = fut.result()
                entry["reports"].append(f"{name}.report.json")
                entry["plasmodium_found"] |= report.plasmodium_found
            entries.append(entry)
    failed = sum(e["status"] != "ok" for e in entries)
    found = any(e["plasmodium_found"] for e in entries)
    summary = {
        "images": len(entries),
        "failed": failed,
        "plasmodium_found": found,
        "config": job.config.to_dict(),
        "entries": entries,
    }
    (job.out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if failed == len(entries):
        return EXIT_ALL_FAILED
    if job.fail_on_detect and found:
        return EXIT_DETECTED
    return EXIT_OK


# -- synthetic corpora ----------------------------------------------------------

def synth_corpus(out_dir: Path, n: int, seed: int, spec: SmearSpec, prefix: str = "sample") -> list:
    """Write ``n`` image / ground-truth pairs seeded ``seed .. seed + n - 1``."""
    if n < 1:
        raise UsageError("n must be >= 1")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(n):
        s = replace(spec, seed=seed + i)
        img, gt = generate(s)
        stem = out_dir / f"{prefix}_{i:04d}"
        write_image(stem.with_suffix(".png"), img)
        sidecar = {"spec": s.to_dict(), "ground_truth": gt.to_dict()}
        stem.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")
        written.append(stem.with_suffix(".png"))
    return written


# -- argument parsing -----------------------------------------------------------

def parse_tile(text: str):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--tile expects WxH, got {text!r}") from None
    return w, h


def load_config(path: Optional[str], overrides: dict) -> PipelineConfig:
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return PipelineConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from None


def _radius_pair(text: str):
    lo, _, hi = text.partition("-")
    return int(lo), int(hi or lo)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plasmodet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="detect parasites in images or tiled slides")
    p.add_argument("inputs", nargs="*", help="image files or directories")
    p.add_argument("--config", help="JSON pipeline config; every key optional")
    p.add_argument("--out-dir", default="scan_out")
    p.add_argument("--tile", help="split each input into WxH tiles in raster order")
    p.add_argument("--overlay", action="store_true", help="also write <name>.overlay.png")
    p.add_argument("--fail-on-detect", action="store_true", help="exit 3 when a parasite is found")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--k", type=float, help="override the density ratio factor")
    p.add_argument("--min-area", type=int, help="override the minimum contour area")

    p = sub.add_parser("synth", help="write a synthetic smear corpus with ground truth")
    p.add_argument("--out-dir", default="corpus")
    p.add_argument("-n", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefix", default="sample")
    defaults = SmearSpec()
    p.add_argument("--width", type=int, default=defaults.width)
    p.add_argument("--height", type=int, default=defaults.height)
    p.add_argument("--rbc-count", type=int, default=defaults.rbc_count)
    p.add_argument("--parasite-count", type=int, default=defaults.parasite_count)
    p.add_argument("--rbc-radius", type=_radius_pair, default=defaults.rbc_radius, help="LO-HI")
    p.add_argument("--parasite-radius", type=_radius_pair, default=defaults.parasite_radius, help="LO-HI")
    p.add_argument("--illumination", type=int, default=defaults.illumination_amplitude)
    p.add_argument("--texture", type=int, default=defaults.texture_amplitude)

    p = sub.add_parser("overlay", help="draw a report's contours onto its image")
    p.add_argument("image")
    p.add_argument("report")
    p.add_argument("-o", "--output", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "scan":
            cfg = load_config(args.config, {"k": args.k, "min_area": args.min_area})
            job = ScanJob(
                inputs=args.inputs,
                out_dir=Path(args.out_dir),
                tile=parse_tile(args.tile) if args.tile else None,
                config=cfg,
                overlay=args.overlay,
                fail_on_detect=args.fail_on_detect,
                jobs=args.jobs,
            )
            return scan(job)
        if args.command == "synth":
            try:
                spec = SmearSpec(width=args.width, height=args.height, rbc_count=args.rbc_count,
                                 parasite_count=args.parasite_count, rbc_radius=args.rbc_radius,
                                 parasite_radius=args.parasite_radius,
                                 illumination_amplitude=args.illumination,
                                 texture_amplitude=args.texture)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            try:
                synth_corpus(Path(args.out_dir), args.n, args.seed, spec, args.prefix)
            except (OSError, PlacementError) as exc:
                raise UsageError(f"cannot write corpus: {exc}") from None
            return EXIT_OK
        if args.command == "overlay":
            try:
                img = read_color(args.image)
                report = DetectionReport.from_json(Path(args.report).read_text())
                write_image(args.output, overlay(img, report))
            except (OSError, ValueError, KeyError) as exc:
                raise UsageError(str(exc)) from None
            return EXIT_OK
    except UsageError as exc:
        print(f"plasmodet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
