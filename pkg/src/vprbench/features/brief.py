"""Intensity-centroid orientation and steered 256-bit binary descriptors."""

from __future__ import annotations

import math

import numpy as np

from ..imaging import GrayImage
from .keypoint import Keypoint, wrap_angle

PATCH_RADIUS = 15
SMOOTH_SIZE = 5
PATTERN_SEED = 0x0B1F
N_BITS = 256
# rotated pattern points stay inside the radius-15 disc; +1 for rounding,
# +2 so the 5x5 smoothing window never sees image padding
MARGIN = PATCH_RADIUS + 1 + SMOOTH_SIZE // 2


def generate_pattern(seed: int = PATTERN_SEED, n_pairs: int = N_BITS) -> np.ndarray:
    """Isotropic-Gaussian test pairs inside the radius-15 disc, shape (n, 4) as (px, py, qx, qy)."""
    rng = np.random.default_rng(seed)
    sigma = (2 * PATCH_RADIUS + 1) / 5.0
    pairs: list[tuple[int, int, int, int]] = []
    seen = set()
    while len(pairs) < n_pairs:
        p = np.rint(rng.normal(0.0, sigma, size=4)).astype(int)
        px, py, qx, qy = (int(v) for v in p)
        if px * px + py * py > PATCH_RADIUS ** 2 or qx * qx + qy * qy > PATCH_RADIUS ** 2:
            continue
        if (px, py) == (qx, qy) or (px, py, qx, qy) in seen:
            continue
        seen.add((px, py, qx, qy))
        pairs.append((px, py, qx, qy))
    return np.array(pairs, dtype=np.int8)


def _load_pattern() -> np.ndarray:
    from ._pattern import PATTERN
    return np.array(PATTERN, dtype=np.float64).reshape(N_BITS, 4)


PATTERN = _load_pattern()

_dy, _dx = np.mgrid[-PATCH_RADIUS:PATCH_RADIUS + 1, -PATCH_RADIUS:PATCH_RADIUS + 1]
_DISC = _dx * _dx + _dy * _dy <= PATCH_RADIUS * PATCH_RADIUS


def _centres(kps) -> tuple[np.ndarray, np.ndarray]:
    cx = np.array([int(round(k.x)) for k in kps], dtype=np.int64)
    cy = np.array([int(round(k.y)) for k in kps], dtype=np.int64)
    return cx, cy


def _check_margin(cx, cy, shape, margin, what):
    h, w = shape
    bad = (cx - margin < 0) | (cy - margin < 0) | (cx + margin >= w) | (cy + margin >= h)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"{what} patch of radius {margin} leaves the image at ({cx[i]}, {cy[i]})")


def compute_orientations(img: GrayImage, kps: list[Keypoint], radius: int = PATCH_RADIUS) -> np.ndarray:
    """Intensity-centroid angles ``atan2(m01, m10)`` over a disc, in [0, 2*pi).

    Coordinates are image coordinates (x right, y down). A uniform patch has
    zero first moments and gets angle 0.
    """
    if not kps:
        return np.zeros(0)
    cx, cy = _centres(kps)
    _check_margin(cx, cy, img.shape, radius, "orientation")
    dy, dx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    disc = dx * dx + dy * dy <= radius * radius
    oy, ox = dy[disc], dx[disc]
    vals = img.data[cy[:, None] + oy[None, :], cx[:, None] + ox[None, :]].astype(np.int64)
    # integer moments keep symmetric patches exactly balanced
    m10 = vals @ ox
    m01 = vals @ oy
    theta = np.mod(np.arctan2(m01, m10), 2 * math.pi)
    theta[(m10 == 0) & (m01 == 0)] = 0.0
    return np.array([wrap_angle(t) for t in theta])


def compute_orientation(img: GrayImage, kp: Keypoint, radius: int = PATCH_RADIUS) -> float:
    return float(compute_orientations(img, [kp], radius)[0])


def smooth_box(img: GrayImage) -> np.ndarray:
    """5x5 box *sums* (not means) so that comparisons stay exact integers."""
    a = img.data.astype(np.int32)
    r = SMOOTH_SIZE // 2
    p = np.pad(a, r, mode="edge")
    c = np.pad(p, ((1, 0), (1, 0))).cumsum(0).cumsum(1)
    s = SMOOTH_SIZE
    return c[s:, s:] - c[:-s, s:] - c[s:, :-s] + c[:-s, :-s]


def steered_pattern(theta) -> np.ndarray:
    """Pattern rotated by ``theta`` and rounded to pixel offsets, shape (..., 256, 4)."""
    theta = np.asarray(theta, dtype=np.float64)[..., None]
    c, s = np.cos(theta), np.sin(theta)
    px, py, qx, qy = PATTERN.T
    rot = np.stack([c * px - s * py, s * px + c * py, c * qx - s * qy, s * qx + c * qy], axis=-1)
    return np.rint(rot).astype(np.int64)


def describe_binary_batch(img: GrayImage, kps: list[Keypoint],
                          smoothed: np.ndarray | None = None) -> np.ndarray:
    """Steered tests for every keypoint at once, shape (n, 32) packed little-endian bits."""
    if not kps:
        return np.zeros((0, N_BITS // 8), dtype=np.uint8)
    if smoothed is None:
        smoothed = smooth_box(img)
    cx, cy = _centres(kps)
    _check_margin(cx, cy, smoothed.shape, MARGIN, "binary descriptor")
    off = steered_pattern([k.orientation for k in kps])
    a = smoothed[cy[:, None] + off[..., 1], cx[:, None] + off[..., 0]]
    b = smoothed[cy[:, None] + off[..., 3], cx[:, None] + off[..., 2]]
    return np.packbits(a < b, axis=1, bitorder="little")


def describe_binary(img: GrayImage, kp: Keypoint, smoothed: np.ndarray | None = None) -> np.ndarray:
    """256 steered pairwise tests; bit i set iff I(p_i) < I(q_i). Returns 32 packed bytes."""
    return describe_binary_batch(img, [kp], smoothed)[0]


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.unpackbits(np.bitwise_xor(a, b)).sum())
