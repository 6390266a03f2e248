"""Difference-of-Gaussians blob detection and 4x4x8 gradient-histogram descriptors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..imaging import GrayImage
from .keypoint import TWO_PI, Keypoint, wrap_angle

INTERVALS = 3
SIGMA0 = 1.6
ASSUMED_BLUR = 0.5
CLAMP = 0.2
GRID = 4
ORI_BINS = 8
PATCH = 16
HIST_BINS = 36
# 16x16 samples rotated by any angle reach 7.5*sqrt(2) < 11 px from the centre;
# bilinear lookups plus central differences need two more
MARGIN = 14
_REGION = MARGIN - 1


@dataclass
class ScaleSpace:
    """Per-octave Gaussian stacks (``intervals + 3`` layers) and their differences."""

    gaussians: list[np.ndarray]
    dogs: list[np.ndarray]
    intervals: int = INTERVALS
    sigma0: float = SIGMA0

    def layer_sigma(self, layer: float) -> float:
        return self.sigma0 * 2.0 ** (layer / self.intervals)

    def nearest_layer(self, octave: int, sigma: float) -> int:
        layer = int(round(math.log2(sigma / self.sigma0) * self.intervals))
        return min(max(layer, 0), self.gaussians[octave].shape[0] - 1)

    def image_for(self, kp: Keypoint) -> np.ndarray:
        return self.gaussians[kp.level][self.nearest_layer(kp.level, kp.scale)]


def _as_float(img) -> np.ndarray:
    if isinstance(img, GrayImage):
        return img.data.astype(np.float64) / 255.0
    return np.asarray(img, dtype=np.float64)


def build_scale_space(img, n_octaves: int | None = None, intervals: int = INTERVALS,
                      sigma0: float = SIGMA0) -> ScaleSpace:
    """Gaussian scale space; octaves stop once the image can no longer host a descriptor patch."""
    base = _as_float(img)
    base = ndimage.gaussian_filter(base, math.sqrt(sigma0 ** 2 - ASSUMED_BLUR ** 2), mode="nearest")
    k = 2.0 ** (1.0 / intervals)
    # incremental blur taking layer i-1 to layer i
    steps = [sigma0 * math.sqrt(k ** (2 * i) - k ** (2 * (i - 1))) for i in range(1, intervals + 3)]
    gaussians, dogs = [], []
    min_side = 2 * MARGIN + 1
    while min(base.shape) >= min_side and (n_octaves is None or len(gaussians) < n_octaves):
        layers = [base]
        for s in steps:
            layers.append(ndimage.gaussian_filter(layers[-1], s, mode="nearest"))
        stack = np.stack(layers)
        gaussians.append(stack)
        dogs.append(stack[1:] - stack[:-1])
        base = stack[intervals][::2, ::2]
    return ScaleSpace(gaussians, dogs, intervals, sigma0)


def _refine(d: np.ndarray, s: int, y: int, x: int):
    """One quadratic-fit step at (s, y, x); returns (offset[x, y, s], value, hessian_xy)."""
    g = 0.5 * np.array([
        d[s, y, x + 1] - d[s, y, x - 1],
        d[s, y + 1, x] - d[s, y - 1, x],
        d[s + 1, y, x] - d[s - 1, y, x],
    ])
    v2 = 2.0 * d[s, y, x]
    dxx = d[s, y, x + 1] + d[s, y, x - 1] - v2
    dyy = d[s, y + 1, x] + d[s, y - 1, x] - v2
    dss = d[s + 1, y, x] + d[s - 1, y, x] - v2
    dxy = 0.25 * (d[s, y + 1, x + 1] - d[s, y + 1, x - 1] - d[s, y - 1, x + 1] + d[s, y - 1, x - 1])
    dxs = 0.25 * (d[s + 1, y, x + 1] - d[s + 1, y, x - 1] - d[s - 1, y, x + 1] + d[s - 1, y, x - 1])
    dys = 0.25 * (d[s + 1, y + 1, x] - d[s + 1, y - 1, x] - d[s - 1, y + 1, x] + d[s - 1, y - 1, x])
    hess = np.array([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])
    try:
        off = -np.linalg.solve(hess, g)
    except np.linalg.LinAlgError:
        off = np.zeros(3)
    off = np.clip(off, -0.5, 0.5)
    value = d[s, y, x] + 0.5 * float(g @ off)
    return off, value, (dxx, dyy, dxy)


def detect_dog(space: ScaleSpace, contrast_threshold: float = 0.03,
               edge_ratio: float = 10.0) -> list[Keypoint]:
    """Scale-space extrema of the DoG stack, contrast- and edge-filtered, sub-pixel refined."""
    edge_limit = (edge_ratio + 1.0) ** 2 / edge_ratio
    out: list[Keypoint] = []
    for octave, d in enumerate(space.dogs):
        n_layers, h, w = d.shape
        if h < 2 * MARGIN + 1 or w < 2 * MARGIN + 1:
            continue
        maxf = ndimage.maximum_filter(d, size=3, mode="nearest")
        minf = ndimage.minimum_filter(d, size=3, mode="nearest")
        extremum = ((d == maxf) & (d > 0)) | ((d == minf) & (d < 0))
        extremum &= np.abs(d) >= 0.5 * contrast_threshold
        extremum[[0, -1]] = False
        extremum[:, :MARGIN] = extremum[:, h - MARGIN:] = False
        extremum[:, :, :MARGIN] = extremum[:, :, w - MARGIN:] = False
        for s, y, x in zip(*np.nonzero(extremum)):
            off, value, (dxx, dyy, dxy) = _refine(d, int(s), int(y), int(x))
            if abs(value) < contrast_threshold:
                continue
            det = dxx * dyy - dxy * dxy
            if det <= 0 or (dxx + dyy) ** 2 / det >= edge_limit:
                continue
            out.append(Keypoint(
                x=float(x + off[0]), y=float(y + off[1]), level=octave, orientation=0.0,
                response=float(abs(value)), scale=space.layer_sigma(float(s + off[2])),
            ))
    return out


def _region(a: np.ndarray, kp: Keypoint, radius: int):
    cx, cy = int(round(kp.x)), int(round(kp.y))
    h, w = a.shape
    if cx - radius < 0 or cy - radius < 0 or cx + radius >= w or cy + radius >= h:
        raise ValueError(f"gradient patch of radius {radius} leaves the image at ({cx}, {cy})")
    return a[cy - radius:cy + radius + 1, cx - radius:cx + radius + 1], cx - radius, cy - radius


def dominant_orientation(img, kp: Keypoint) -> float:
    """Peak of a 36-bin Gaussian-weighted gradient-orientation histogram (single peak)."""
    a = _as_float(img)
    sigma_w = 1.5 * kp.scale
    radius = int(min(round(3 * sigma_w), _REGION - 1))
    region, x0, y0 = _region(a, kp, radius + 1)
    gy, gx = np.gradient(region)
    gy, gx = gy[1:-1, 1:-1], gx[1:-1, 1:-1]
    dy, dx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    inside = dx * dx + dy * dy <= radius * radius
    weight = np.exp(-(dx * dx + dy * dy) / (2 * sigma_w ** 2)) * np.hypot(gx, gy)
    ang = np.mod(np.arctan2(gy, gx), TWO_PI)
    bins = np.floor(ang * HIST_BINS / TWO_PI).astype(int) % HIST_BINS
    hist = np.bincount(bins[inside], weights=weight[inside], minlength=HIST_BINS)
    if not hist.any():
        return 0.0
    for _ in range(2):
        hist = (np.roll(hist, 1) + hist + np.roll(hist, -1)) / 3.0
    i = int(np.argmax(hist))
    left, right = hist[i - 1], hist[(i + 1) % HIST_BINS]
    denom = left - 2 * hist[i] + right
    shift = 0.5 * (left - right) / denom if denom != 0 else 0.0
    return wrap_angle((i + 0.5 + shift) * TWO_PI / HIST_BINS)


_u = np.arange(PATCH) - (PATCH - 1) / 2.0
_U, _V = np.meshgrid(_u, _u)
_WINDOW = np.exp(-(_U ** 2 + _V ** 2) / (2 * (PATCH / 2.0) ** 2))


def normalize_descriptor(hist: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """L2-normalize, clamp at 0.2, renormalize. Returns (clamped, final); zeros stay zeros."""
    hist = np.asarray(hist, dtype=np.float64)
    m = np.abs(hist).max()
    if m == 0:
        return hist.copy(), hist.copy()
    scaled = hist / m  # keeps the norm from underflowing on tiny histograms
    clamped = np.minimum(scaled / np.linalg.norm(scaled), CLAMP)
    return clamped, clamped / np.linalg.norm(clamped)


def gradient_histogram(img, kp: Keypoint, orientation: float) -> np.ndarray:
    """Raw 4x4x8 trilinearly-interpolated histogram of the rotated 16x16 gradient patch."""
    a = _as_float(img)
    region, x0, y0 = _region(a, kp, _REGION)
    gy, gx = np.gradient(region)
    c, s = math.cos(orientation), math.sin(orientation)
    xs = (kp.x - x0) + c * _U - s * _V
    ys = (kp.y - y0) + s * _U + c * _V
    coords = np.stack([ys.ravel(), xs.ravel()])
    sgx = ndimage.map_coordinates(gx, coords, order=1)
    sgy = ndimage.map_coordinates(gy, coords, order=1)
    mag = np.hypot(sgx, sgy) * _WINDOW.ravel()
    ang = np.mod(np.arctan2(sgy, sgx) - orientation, TWO_PI)

    rb = (_V.ravel() + PATCH / 2.0) / GRID - 0.5
    cb = (_U.ravel() + PATCH / 2.0) / GRID - 0.5
    ob = ang * ORI_BINS / TWO_PI
    r0, c0, o0 = np.floor(rb).astype(int), np.floor(cb).astype(int), np.floor(ob).astype(int)
    fr, fc, fo = rb - r0, cb - c0, ob - o0
    hist = np.zeros((GRID + 2, GRID + 2, ORI_BINS))
    for dr, wr in ((0, 1 - fr), (1, fr)):
        for dc, wc in ((0, 1 - fc), (1, fc)):
            for do, wo in ((0, 1 - fo), (1, fo)):
                np.add.at(hist, (r0 + dr + 1, c0 + dc + 1, (o0 + do) % ORI_BINS), mag * wr * wc * wo)
    return hist[1:-1, 1:-1].ravel()


def describe_float(img, kp: Keypoint, orientation: float | None = None) -> np.ndarray:
    """128-d descriptor of ``kp`` on ``img`` (its level image).

    ``orientation`` defaults to the dominant gradient direction. A patch with
    no gradient yields the all-zero vector, which callers treat as degenerate.
    """
    if orientation is None:
        orientation = dominant_orientation(img, kp)
    return normalize_descriptor(gradient_histogram(img, kp, orientation))[1]
