from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

BINARY = "binary"
FLOAT = "float"
DESCRIPTOR_DIMS = {BINARY: 256, FLOAT: 128}


def wrap_angle(theta: float) -> float:
    """Map an angle onto [0, 2*pi)."""
    t = math.fmod(theta, TWO_PI)
    if t < 0:
        t += TWO_PI
    # fmod of a tiny negative can round up to exactly 2*pi
    return 0.0 if t >= TWO_PI else t


@dataclass(frozen=True, slots=True)
class Keypoint:
    """Detected point in the coordinates of pyramid level ``level``.

    ``scale`` is the detector's characteristic size in level pixels (Gaussian
    sigma for blobs, patch radius for corners).
    """

    x: float
    y: float
    level: int = 0
    orientation: float = 0.0
    response: float = 0.0
    scale: float = 1.0

    def with_orientation(self, theta: float) -> "Keypoint":
        return Keypoint(self.x, self.y, self.level, wrap_angle(theta), self.response, self.scale)


@dataclass
class FeatureSet:
    """Descriptors of one image plus their parallel keypoints.

    Binary descriptors are ``(n, 32)`` uint8 (256 packed bits); float ones are
    ``(n, 128)`` float32.
    """

    image_id: str
    kind: str
    descriptors: np.ndarray
    keypoints: list[Keypoint] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in DESCRIPTOR_DIMS:
            raise ValueError(f"unknown descriptor kind {self.kind!r}")
        d = np.asarray(self.descriptors)
        width = 32 if self.kind == BINARY else DESCRIPTOR_DIMS[self.kind]
        if d.size == 0:
            d = d.reshape(0, width)
        if d.ndim != 2 or d.shape[1] != width:
            raise ValueError(f"{self.kind} descriptors must have shape (n, {width}), got {d.shape}")
        d = d.astype(np.uint8 if self.kind == BINARY else np.float32, copy=False)
        self.descriptors = d
        if len(self.keypoints) != len(d):
            raise ValueError(
                f"{len(self.keypoints)} keypoints for {len(d)} descriptors in {self.image_id!r}"
            )

    def __len__(self):
        return len(self.descriptors)

    @property
    def dim(self) -> int:
        return DESCRIPTOR_DIMS[self.kind]

    def lifted(self) -> np.ndarray:
        """Descriptors as float64 rows; binary bits become {0, 1} reals."""
        return lift(self.descriptors, self.kind)


def lift(descriptors: np.ndarray, kind: str) -> np.ndarray:
    if kind == BINARY:
        return np.unpackbits(np.asarray(descriptors, dtype=np.uint8), axis=1,
                             bitorder="little").astype(np.float64)
    return np.asarray(descriptors, dtype=np.float64)
