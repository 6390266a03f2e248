"""Detector + descriptor composition behind a common extractor interface."""

from __future__ import annotations

import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable

import numpy as np

from ..imaging import GrayImage, build_pyramid
from . import brief, dog
from .fast import detect_fast
from .keypoint import BINARY, DESCRIPTOR_DIMS, FLOAT, FeatureSet, Keypoint


@dataclass(frozen=True)
class ExtractorConfig:
    """Extractor kind plus every parameter that influences its output."""

    kind: str = BINARY
    max_features: int = 1000
    # binary family
    fast_threshold: int = 20
    n_levels: int = 8
    scale_factor: float = 1.2
    # float family
    contrast_threshold: float = 0.03
    edge_ratio: float = 10.0
    # passthrough: directory of <image_id>.vprf files and their descriptor kind
    feature_dir: str | None = None
    feature_kind: str = FLOAT

    def __post_init__(self):
        if self.max_features < 1:
            raise ValueError("max_features must be >= 1")
        if self.fast_threshold < 1:
            raise ValueError("fast_threshold must be >= 1")
        if self.n_levels < 1 or not self.scale_factor > 1:
            raise ValueError("pyramid needs n_levels >= 1 and scale_factor > 1")
        if self.contrast_threshold < 0 or self.edge_ratio <= 0:
            raise ValueError("contrast_threshold must be >= 0 and edge_ratio > 0")
        if self.feature_kind not in DESCRIPTOR_DIMS:
            raise ValueError(f"feature_kind must be one of {sorted(DESCRIPTOR_DIMS)}")

    @property
    def descriptor_kind(self) -> str:
        if self.kind == PASSTHROUGH:
            return self.feature_kind
        return self.kind

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractorConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


PASSTHROUGH = "passthrough"

Extractor = Callable[[GrayImage, ExtractorConfig, str], FeatureSet]
_REGISTRY: dict[str, Extractor] = {}


def register_extractor(kind: str):
    def deco(fn: Extractor) -> Extractor:
        _REGISTRY[kind] = fn
        return fn
    return deco


def registered_kinds() -> list[str]:
    return sorted(_REGISTRY)


def _rank_key(kp: Keypoint):
    return (-kp.response, kp.level, kp.y, kp.x)


def _inside(kp: Keypoint, shape: tuple[int, int], margin: int) -> bool:
    cx, cy = int(round(kp.x)), int(round(kp.y))
    h, w = shape
    return margin <= cx < w - margin and margin <= cy < h - margin


@register_extractor(BINARY)
def extract_binary(img: GrayImage, cfg: ExtractorConfig, image_id: str = "") -> FeatureSet:
    pyr = build_pyramid(img, cfg.n_levels, cfg.scale_factor)
    candidates = []
    for level, im in enumerate(pyr.levels):
        candidates.extend(
            kp for kp in detect_fast(im, cfg.fast_threshold, nms=True, level=level)
            if _inside(kp, im.shape, brief.MARGIN)
        )
    candidates.sort(key=_rank_key)
    candidates = candidates[:cfg.max_features]
    kps: list[Keypoint] = []
    blocks = []
    for level in sorted({kp.level for kp in candidates}):
        im = pyr[level]
        at_level = [kp for kp in candidates if kp.level == level]
        theta = brief.compute_orientations(im, at_level)
        oriented = [Keypoint(kp.x, kp.y, level, float(t), kp.response, float(brief.PATCH_RADIUS))
                    for kp, t in zip(at_level, theta)]
        blocks.append((oriented, brief.describe_binary_batch(im, oriented)))
    # restore the global response order across levels
    merged = [(kp, d) for oriented, desc in blocks for kp, d in zip(oriented, desc)]
    merged.sort(key=lambda kd: _rank_key(kd[0]))
    kps = [kp for kp, _ in merged]
    arr = np.array([d for _, d in merged], dtype=np.uint8).reshape(len(merged), 32)
    return FeatureSet(image_id, BINARY, arr, kps)


@register_extractor(FLOAT)
def extract_float(img: GrayImage, cfg: ExtractorConfig, image_id: str = "") -> FeatureSet:
    space = dog.build_scale_space(img)
    candidates = sorted(dog.detect_dog(space, cfg.contrast_threshold, cfg.edge_ratio),
                        key=_rank_key)
    kps, descs = [], []
    for kp in candidates:
        if len(kps) == cfg.max_features:
            break
        im = space.image_for(kp)
        theta = dog.dominant_orientation(im, kp)
        d = dog.describe_float(im, kp, theta)
        if not d.any():
            continue
        kps.append(kp.with_orientation(theta))
        descs.append(d)
    arr = np.array(descs, dtype=np.float32).reshape(len(descs), 128)
    return FeatureSet(image_id, FLOAT, arr, kps)


@register_extractor(PASSTHROUGH)
def extract_passthrough(img: GrayImage, cfg: ExtractorConfig, image_id: str = "") -> FeatureSet:
    if cfg.feature_dir is None:
        raise ValueError("passthrough extractor needs feature_dir")
    fs = read_feature_file(Path(cfg.feature_dir) / f"{image_id}.vprf", image_id)
    if fs.kind != cfg.feature_kind:
        raise ValueError(f"{image_id}: feature file holds {fs.kind} descriptors, "
                         f"config expects {cfg.feature_kind}")
    order = sorted(range(len(fs)), key=lambda i: _rank_key(fs.keypoints[i]))[:cfg.max_features]
    return FeatureSet(image_id, fs.kind, fs.descriptors[order], [fs.keypoints[i] for i in order])


def extract(img: GrayImage, config: ExtractorConfig | None = None, image_id: str = "") -> FeatureSet:
    """Run the configured detector + descriptor on ``img``; deterministic."""
    config = config or ExtractorConfig()
    try:
        fn = _REGISTRY[config.kind]
    except KeyError:
        raise ValueError(f"unregistered extractor kind {config.kind!r}; "
                         f"known: {registered_kinds()}") from None
    return fn(img, config, image_id)


# -- passthrough feature files -----------------------------------------------------

FEATURE_MAGIC = b"VPRF"
_KIND_CODES = {BINARY: 0, FLOAT: 1}
_HEADER = struct.Struct("<4sBIH")


def write_feature_file(fs: FeatureSet, path) -> None:
    """Little-endian: magic, kind byte, count u32, dim u16, keypoints (x, y, angle, response) f32, payload."""
    n = len(fs)
    kp = np.array([(k.x, k.y, k.orientation, k.response) for k in fs.keypoints],
                  dtype="<f4").reshape(n, 4)
    if fs.kind == BINARY:
        payload = np.ascontiguousarray(fs.descriptors, dtype=np.uint8).tobytes()
    else:
        payload = np.ascontiguousarray(fs.descriptors, dtype="<f4").tobytes()
    blob = _HEADER.pack(FEATURE_MAGIC, _KIND_CODES[fs.kind], n, fs.dim) + kp.tobytes() + payload
    Path(path).write_bytes(blob)


def read_feature_file(path, image_id: str | None = None) -> FeatureSet:
    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < _HEADER.size:
        raise ValueError(f"{path}: truncated feature file")
    magic, code, n, dim = _HEADER.unpack_from(buf)
    if magic != FEATURE_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    kinds = {v: k for k, v in _KIND_CODES.items()}
    if code not in kinds:
        raise ValueError(f"{path}: unknown descriptor kind code {code}")
    kind = kinds[code]
    if dim != DESCRIPTOR_DIMS[kind]:
        raise ValueError(f"{path}: {kind} descriptors must be {DESCRIPTOR_DIMS[kind]}-d, got {dim}")
    row = dim // 8 if kind == BINARY else 4 * dim
    expected = _HEADER.size + 16 * n + row * n
    if len(buf) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(buf)}")
    off = _HEADER.size
    kp = np.frombuffer(buf, dtype="<f4", count=4 * n, offset=off).reshape(n, 4)
    off += 16 * n
    if kind == BINARY:
        desc = np.frombuffer(buf, dtype=np.uint8, count=row * n, offset=off).reshape(n, row)
    else:
        desc = np.frombuffer(buf, dtype="<f4", count=dim * n, offset=off).reshape(n, dim)
    kps = [Keypoint(float(x), float(y), 0, float(t), float(r)) for x, y, t, r in kp.tolist()]
    return FeatureSet(image_id if image_id is not None else path.stem, kind, desc.copy(), kps)
