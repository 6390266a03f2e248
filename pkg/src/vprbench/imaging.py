"""Grayscale image container, decoding, and box-filter scale pyramids."""

from __future__ import annotations

import re
from functools import lru_cache
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ImageError(ValueError):
    """Base class for image ingestion failures."""


class ImageReadError(ImageError):
    """The file could not be opened or its payload is truncated/corrupt."""


class UnsupportedFormatError(ImageError):
    """The file is readable but not a raster format we decode."""


class EmptyImageError(ImageError):
    """The decoded raster has a zero dimension."""


@dataclass(frozen=True)
class GrayImage:
    """8-bit luma raster. ``data`` is a read-only ``(height, width)`` uint8 array."""

    width: int
    height: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise EmptyImageError(f"image dimensions must be >= 1, got {self.width}x{self.height}")
        arr = np.asarray(self.data)
        if arr.size != self.width * self.height:
            raise ValueError(
                f"data length {arr.size} != width*height = {self.width * self.height}"
            )
        arr = np.ascontiguousarray(arr, dtype=np.uint8).reshape(self.height, self.width)
        if arr.flags.writeable:
            arr = arr.copy()
            arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValueError("pixel values outside [0, 255]")
            arr = arr.astype(np.uint8)
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Pyramid:
    levels: tuple[GrayImage, ...]
    scale_factor: float

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i) -> GrayImage:
        return self.levels[i]


# -- colour conversion -------------------------------------------------------

def rgb_to_luma(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma with round-half-up, computed in exact integer arithmetic."""
    rgb = np.asarray(rgb, dtype=np.int64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


# -- PGM ---------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n\r]*[\n\r])*(\S+)")


def decode_pgm(buf: bytes) -> GrayImage:
    if not buf.startswith(b"P5"):
        raise UnsupportedFormatError("not a binary PGM (P5) stream")
    pos = 2
    header = []
    for _ in range(3):
        m = _PGM_TOKEN.match(buf, pos)
        if m is None:
            raise ImageReadError("truncated PGM header")
        header.append(m.group(1))
        pos = m.end()
    try:
        width, height, maxval = (int(t) for t in header)
    except ValueError as exc:
        raise ImageReadError(f"malformed PGM header: {header!r}") from exc
    if maxval < 1 or maxval > 255:
        raise UnsupportedFormatError(f"PGM maxval {maxval} is not 8-bit")
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    if width == 0 or height == 0:
        raise EmptyImageError(f"zero-dimension PGM ({width}x{height})")
    payload = buf[pos:pos + width * height]
    if len(payload) != width * height:
        raise ImageReadError(
            f"PGM payload truncated: expected {width * height} bytes, got {len(payload)}"
        )
    return GrayImage(width, height, np.frombuffer(payload, dtype=np.uint8))


def encode_pgm(img: GrayImage) -> bytes:
    return b"P5\n%d %d\n255\n" % (img.width, img.height) + img.data.tobytes()


def save_pgm(img: GrayImage, path) -> None:
    Path(path).write_bytes(encode_pgm(img))


# -- generic loading -----------------------------------------------------------

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _decode_png(path: Path) -> GrayImage:
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I", "F"):
                raise UnsupportedFormatError(f"{path}: {mode} PNGs are not 8-bit")
            if mode == "L":
                arr = np.asarray(im, dtype=np.uint8)
            elif mode == "LA":
                arr = np.asarray(im.convert("L"), dtype=np.uint8)
            else:
                arr = rgb_to_luma(np.asarray(im.convert("RGB")))
    except ImageError:
        raise
    except (OSError, ValueError) as exc:
        raise ImageReadError(f"{path}: {exc}") from exc
    if arr.size == 0:
        raise EmptyImageError(f"{path}: zero-dimension image")
    return GrayImage.from_array(arr)


def load_image(path) -> GrayImage:
    """Decode a binary PGM (bit-exact) or an 8-bit gray/RGB PNG into luma."""
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise ImageReadError(f"{path}: {exc.strerror or exc}") from exc
    if buf.startswith(b"P5"):
        try:
            return decode_pgm(buf)
        except ImageError as exc:
            raise type(exc)(f"{path}: {exc}") from None
    if buf.startswith(_PNG_MAGIC):
        return _decode_png(path)
    raise UnsupportedFormatError(f"{path}: unsupported raster format")


# -- pyramids ------------------------------------------------------------------

MIN_LEVEL_SIZE = 8


def _scaled_dim(n: int, factor: float) -> int:
    # tolerate representation error, e.g. 120 / 1.2
    return int(np.floor(n / factor + 1e-9))


@lru_cache(maxsize=256)
def _box_weights(n_in: int, n_out: int, factor: float) -> np.ndarray:
    # output sample j averages the source interval [j*factor, (j+1)*factor)
    w = np.zeros((n_out, n_in))
    for j in range(n_out):
        lo, hi = j * factor, min((j + 1) * factor, n_in)
        i0, i1 = int(np.floor(lo + 1e-12)), min(int(np.ceil(hi - 1e-12)), n_in)
        for i in range(i0, i1):
            w[j, i] = min(hi, i + 1) - max(lo, i)
        w[j] /= w[j].sum()
    w.flags.writeable = False
    return w


def downsample(img: GrayImage, factor: float) -> GrayImage:
    """Area-weighted box average onto a grid ``floor(dims / factor)``."""
    h, w = _scaled_dim(img.height, factor), _scaled_dim(img.width, factor)
    if h < 1 or w < 1:
        raise ValueError("downsampled image would be empty")
    src = img.data.astype(np.float64)
    out = _box_weights(img.height, h, factor) @ src @ _box_weights(img.width, w, factor).T
    return GrayImage.from_array(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def build_pyramid(img: GrayImage, n_levels: int, scale_factor: float) -> Pyramid:
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if not scale_factor > 1:
        raise ValueError("scale_factor must be > 1")
    levels = [img]
    while len(levels) < n_levels:
        prev = levels[-1]
        h, w = _scaled_dim(prev.height, scale_factor), _scaled_dim(prev.width, scale_factor)
        if h < MIN_LEVEL_SIZE or w < MIN_LEVEL_SIZE:
            break
        levels.append(downsample(prev, scale_factor))
    return Pyramid(tuple(levels), float(scale_factor))
