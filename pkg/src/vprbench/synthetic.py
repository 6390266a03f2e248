"""Synthetic aerial-loop datasets: a procedurally textured ground plane viewed
along a raster flight path at several camera tilts.

The reference loop looks straight down; query loops revisit the same ground
positions with the camera pitched by 15, 30 and 45 degrees, so ground truth is
known exactly from the flight path.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage

from .imaging import GrayImage, save_pgm


@dataclass(frozen=True)
class SyntheticConfig:
    seed: int = 7
    frame_width: int = 160
    frame_height: int = 120
    cols: int = 20
    rows: int = 10
    step: float = 60.0
    focal: float = 200.0
    tilts: tuple[int, ...] = (0, 15, 30, 45)
    query_stride: int = 2
    noise_sigma: float = 2.0
    gt_radius: float = 60.0
    n_training: int = 60

    @property
    def n_reference(self) -> int:
        return self.cols * self.rows


@dataclass
class Split:
    name: str
    role: str
    images: dict[str, GrayImage]
    ground_truth: dict[str, set[str]] = field(default_factory=dict)


@dataclass
class SyntheticBundle:
    config: SyntheticConfig
    training: Split
    reference: Split
    queries: dict[str, Split]


def make_world(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Ground texture in [0, 255]: smooth shading plus random filled shapes and fine grain."""
    base = ndimage.gaussian_filter(rng.normal(size=(height, width)), 30.0)
    base = 70 + 120 * (base - base.min()) / max(np.ptp(base), 1e-12)
    canvas = Image.fromarray(base.astype(np.uint8), mode="L")
    draw = ImageDraw.Draw(canvas)
    n_shapes = int(width * height / 400)
    for _ in range(n_shapes):
        x, y = rng.uniform(0, width), rng.uniform(0, height)
        size = rng.uniform(4, 26)
        fill = int(rng.integers(0, 256))
        kind = rng.integers(0, 4)
        if kind == 0:
            draw.ellipse([x - size, y - size * rng.uniform(0.4, 1.0), x + size,
                          y + size * rng.uniform(0.4, 1.0)], fill=fill)
        elif kind == 1:
            a = rng.uniform(0, math.pi)
            pts = [(x + size * math.cos(a + t) * s, y + size * math.sin(a + t) * s)
                   for t, s in ((0, 1.0), (math.pi / 2, 0.6), (math.pi, 1.0), (1.5 * math.pi, 0.6))]
            draw.polygon(pts, fill=fill)
        elif kind == 2:
            pts = [(x + size * math.cos(t), y + size * math.sin(t))
                   for t in rng.uniform(0, 2 * math.pi, size=3)]
            draw.polygon(pts, fill=fill)
        else:
            x2, y2 = x + rng.uniform(-2, 2) * size, y + rng.uniform(-2, 2) * size
            draw.line([x, y, x2, y2], fill=fill, width=int(rng.integers(1, 4)))
    world = np.asarray(canvas, dtype=np.float64)
    grain = ndimage.gaussian_filter(rng.normal(size=(height, width)), 1.0)
    world = world + 8.0 * grain / max(grain.std(), 1e-12)
    return np.clip(ndimage.gaussian_filter(world, 0.7), 0, 255)


def render_frame(world: np.ndarray, centre: tuple[float, float], tilt_deg: float,
                 width: int, height: int, focal: float,
                 rng: np.random.Generator | None = None, noise_sigma: float = 0.0) -> GrayImage:
    """View of the ground plane from a camera pitched by ``tilt_deg`` whose optical
    axis hits the ground at ``centre``; at zero tilt one frame pixel is one world pixel."""
    t = math.radians(tilt_deg)
    v, u = np.mgrid[0:height, 0:width].astype(np.float64)
    u -= (width - 1) / 2.0
    v -= (height - 1) / 2.0
    dy = v * math.cos(t) - focal * math.sin(t)
    dz = v * math.sin(t) + focal * math.cos(t)
    gx = centre[0] + focal * u / dz
    gy = centre[1] + focal * dy / dz + focal * math.tan(t)
    frame = ndimage.map_coordinates(world, [gy, gx], order=1, mode="reflect")
    if rng is not None and noise_sigma > 0:
        frame = frame + rng.normal(0.0, noise_sigma, size=frame.shape)
    return GrayImage.from_array(np.clip(np.rint(frame), 0, 255).astype(np.uint8))


def flight_path(cfg: SyntheticConfig, margin: float) -> np.ndarray:
    """Boustrophedon grid of ground positions, shape (rows*cols, 2) as (x, y)."""
    pts = []
    for r in range(cfg.rows):
        cols = range(cfg.cols) if r % 2 == 0 else reversed(range(cfg.cols))
        for c in cols:
            pts.append((margin + c * cfg.step, margin + r * cfg.step))
    return np.array(pts)


def _world_margin(cfg: SyntheticConfig) -> float:
    t = math.radians(max(cfg.tilts + (45,)))
    half = max(cfg.frame_width, cfg.frame_height) / 2.0
    return half / max(math.cos(t) - math.sin(t) * 0.5, 0.25) + 20.0


def generate(cfg: SyntheticConfig = SyntheticConfig()) -> SyntheticBundle:
    rng = np.random.default_rng(cfg.seed)
    margin = _world_margin(cfg)
    world = make_world(rng, int(2 * margin + (cfg.cols - 1) * cfg.step),
                       int(2 * margin + (cfg.rows - 1) * cfg.step))
    path = flight_path(cfg, margin)
    fw, fh, f = cfg.frame_width, cfg.frame_height, cfg.focal

    ref_tilt = cfg.tilts[0]
    reference = Split(f"t{ref_tilt:02d}", "reference", {
        f"t{ref_tilt:02d}_{i:04d}": render_frame(world, tuple(p), ref_tilt, fw, fh, f, rng, cfg.noise_sigma)
        for i, p in enumerate(path)
    })
    ref_ids = list(reference.images)
    dist = np.linalg.norm(path[:, None, :] - path[None, :, :], axis=2)

    queries = {}
    for tilt in cfg.tilts[1:]:
        name = f"t{tilt:02d}"
        split = Split(name, "query", {})
        for i in range(0, len(path), cfg.query_stride):
            qid = f"{name}_{i:04d}"
            split.images[qid] = render_frame(world, tuple(path[i]), tilt, fw, fh, f, rng, cfg.noise_sigma)
            split.ground_truth[qid] = {ref_ids[j] for j in np.nonzero(dist[i] <= cfg.gt_radius)[0]}
        queries[name] = split

    # unrelated scenes for dictionary training
    train_rng = np.random.default_rng(cfg.seed + 7919)
    tw = int(2 * margin + 8 * cfg.step)
    train_world = make_world(train_rng, tw, tw)
    training = Split("training", "training", {})
    for i in range(cfg.n_training):
        c = (train_rng.uniform(margin, tw - margin), train_rng.uniform(margin, tw - margin))
        tilt = float(train_rng.choice(cfg.tilts))
        training.images[f"train_{i:04d}"] = render_frame(
            train_world, c, tilt, fw, fh, f, train_rng, cfg.noise_sigma)
    return SyntheticBundle(cfg, training, reference, queries)


def write_bundle(bundle: SyntheticBundle, out_dir) -> Path:
    """Write PGM frames, manifests, ground-truth CSVs and ``bundle.json``; returns the bundle path."""
    from .datasets import DatasetManifest, write_ground_truth

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entry: dict = {"name": f"synthetic-{bundle.config.seed}", "config": asdict(bundle.config)}

    def dump(split: Split, gt_path: Path | None) -> str:
        img_dir = out / split.name
        img_dir.mkdir(exist_ok=True)
        files = []
        for image_id, img in split.images.items():
            save_pgm(img, img_dir / f"{image_id}.pgm")
            files.append(f"{image_id}.pgm")
        manifest = DatasetManifest(split.name, img_dir, files, split.role,
                                   ground_truth=gt_path)
        mpath = out / f"{split.name}.manifest.json"
        manifest.save(mpath)
        return mpath.name

    entry["training"] = dump(bundle.training, None)
    entry["reference"] = dump(bundle.reference, None)
    entry["queries"] = {}
    for name, split in bundle.queries.items():
        gt = out / f"{name}.gt.csv"
        write_ground_truth(split.ground_truth, gt)
        entry["queries"][name] = dump(split, gt)
    bundle_path = out / "bundle.json"
    bundle_path.write_text(json.dumps(entry, indent=2, sort_keys=True) + "\n")
    return bundle_path
