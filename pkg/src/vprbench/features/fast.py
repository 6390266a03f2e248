"""Segment-test (FAST-9) corner detection."""

from __future__ import annotations

import numpy as np

from ..imaging import GrayImage
from .keypoint import Keypoint

# Bresenham circle of radius 3, clockwise from 12 o'clock, as (dx, dy).
CIRCLE = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)
ARC_LENGTH = 9
RADIUS = 3


def _arc_response(mask: np.ndarray, absdiff: np.ndarray) -> np.ndarray:
    """Best sum of ``absdiff`` over a maximal circular run of ``mask`` of length >= 9.

    ``mask`` and ``absdiff`` have the 16 circle positions on axis 0. Returns 0
    where no qualifying run exists.
    """
    n = len(CIRCLE)
    full = mask.all(axis=0)
    run_len = np.zeros(mask.shape[1:], dtype=np.int32)
    run_sum = np.zeros(mask.shape[1:], dtype=np.int64)
    best = np.zeros(mask.shape[1:], dtype=np.int64)
    # walking the circle twice closes runs that wrap past position 0; with at
    # least one False present no run can exceed 15
    for k in range(2 * n):
        m = mask[k % n]
        run_len = np.where(m, run_len + 1, 0)
        run_sum = np.where(m, run_sum + absdiff[k % n], 0)
        np.maximum(best, np.where(run_len >= ARC_LENGTH, run_sum, 0), out=best)
    return np.where(full, absdiff.sum(axis=0), best)


def fast_score_map(img: GrayImage, threshold: int) -> np.ndarray:
    """Segment-test response for every pixel (0 = not a corner)."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    h, w = img.shape
    scores = np.zeros((h, w), dtype=np.int64)
    if h < 2 * RADIUS + 1 or w < 2 * RADIUS + 1:
        return scores
    a = img.data.astype(np.int32)
    centre = a[RADIUS:h - RADIUS, RADIUS:w - RADIUS]
    ring = np.stack([
        a[RADIUS + dy:h - RADIUS + dy, RADIUS + dx:w - RADIUS + dx] for dx, dy in CIRCLE
    ])
    bright = ring > centre + threshold
    dark = ring < centre - threshold
    # a 9-arc needs at least 9 qualifying circle pixels; only those pixels are scored
    cand = (bright.sum(axis=0) >= ARC_LENGTH) | (dark.sum(axis=0) >= ARC_LENGTH)
    ys, xs = np.nonzero(cand)
    if len(ys):
        absdiff = np.abs(ring[:, ys, xs] - centre[ys, xs])
        score = np.maximum(_arc_response(bright[:, ys, xs], absdiff),
                           _arc_response(dark[:, ys, xs], absdiff))
        scores[ys + RADIUS, xs + RADIUS] = score
    return scores


def nonmax_suppress(scores: np.ndarray) -> np.ndarray:
    """Keep responses strictly greater than all 8 neighbours."""
    padded = np.pad(scores, 1)
    h, w = scores.shape
    keep = scores > 0
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            keep &= scores > padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return keep


def detect_fast(img: GrayImage, threshold: int = 20, nms: bool = True,
                level: int = 0) -> list[Keypoint]:
    """FAST-9 corners in raster order; ``response`` is the arc's summed contrast."""
    scores = fast_score_map(img, threshold)
    mask = nonmax_suppress(scores) if nms else scores > 0
    ys, xs = np.nonzero(mask)
    return [
        Keypoint(float(x), float(y), level, 0.0, float(scores[y, x]), float(RADIUS))
        for y, x in zip(ys.tolist(), xs.tolist())
    ]
