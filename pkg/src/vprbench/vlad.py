"""VLAD aggregation of local descriptors against a visual dictionary."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .features.keypoint import FeatureSet
from .vocab import KindMismatchError, VisualDictionary, nearest_centroids


@dataclass(frozen=True)
class VladOptions:
    """Normalization chain switches; global L2 normalization is always applied."""

    intra_norm: bool = True
    signed_sqrt: bool = True

    def describe(self) -> str:
        stages = (["intra-l2"] if self.intra_norm else []) + (["ssr"] if self.signed_sqrt else [])
        return "+".join(stages + ["l2"])


@dataclass
class VladDescriptor:
    """Concatenated per-word residual blocks; ``values`` is float32 of length ``k * dim``."""

    values: np.ndarray
    k: int
    dim: int
    degenerate: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32).ravel()
        if v.size != self.k * self.dim:
            raise ValueError(f"VLAD length {v.size} != k*dim = {self.k * self.dim}")
        self.values = v

    @property
    def blocks(self) -> np.ndarray:
        return self.values.reshape(self.k, self.dim)


def residual_sums(fs: FeatureSet, V: VisualDictionary) -> np.ndarray:
    """Raw ``(k, dim)`` sums of ``d - c[assign(d)]``, accumulated in a canonical order.

    Descriptors are sorted by (word, descriptor bytes) before summation so the
    result does not depend on the order features were listed in.
    """
    if fs.kind != V.descriptor_kind:
        raise KindMismatchError(f"{fs.kind} features vs {V.descriptor_kind} dictionary")
    raw = np.zeros((V.k, V.dim))
    if len(fs) == 0:
        return raw
    x = fs.lifted()
    words, _ = nearest_centroids(x, V.centroids)
    keys = np.ascontiguousarray(fs.descriptors).view(np.uint8).reshape(len(fs), -1)
    order = np.lexsort(tuple(keys.T[::-1]) + (words,))
    words, x = words[order], x[order]
    resid = x - V.centroids[words]
    present, starts = np.unique(words, return_index=True)
    raw[present] = np.add.reduceat(resid, starts, axis=0)
    return raw


def normalize_stages(raw: np.ndarray, options: VladOptions = VladOptions()) -> dict[str, np.ndarray]:
    """Each stage of the normalization chain, for inspection and testing."""
    stages = {"raw": raw}
    v = raw
    if options.intra_norm:
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        v = np.divide(v, norms, out=np.zeros_like(v), where=norms > 0)
        stages["intra"] = v
    if options.signed_sqrt:
        v = np.sign(v) * np.sqrt(np.abs(v))
        stages["ssr"] = v
    n = np.linalg.norm(v)
    stages["final"] = v / n if n > 0 else np.zeros_like(v)
    return stages


def compute_vlad(fs: FeatureSet, V: VisualDictionary,
                 options: VladOptions = VladOptions()) -> VladDescriptor:
    """Aggregate ``fs`` into one unit-norm VLAD; zero residual mass gives a flagged zero vector."""
    final = normalize_stages(residual_sums(fs, V), options)["final"]
    return VladDescriptor(final.ravel(), V.k, V.dim, degenerate=not final.any())


def vlad_distance(a: VladDescriptor, b: VladDescriptor) -> float:
    if (a.k, a.dim) != (b.k, b.dim):
        raise ValueError(f"VLAD shapes differ: ({a.k}, {a.dim}) vs ({b.k}, {b.dim})")
    d = a.values.astype(np.float64) - b.values.astype(np.float64)
    return float(np.sqrt(d @ d))


def similarity(distance: float) -> float:
    return 1.0 / (1.0 + distance)


# -- VLAD store --------------------------------------------------------------

STORE_MAGIC = b"VPRV"
_HEADER = struct.Struct("<4sIII")


def save_store(entries: Iterable[tuple[str, VladDescriptor]], path) -> Path:
    """Magic, k, dim, count, then per image: u16 id length, UTF-8 id, f32 values."""
    entries = list(entries)
    if not entries:
        raise ValueError("empty VLAD store")
    k, dim = entries[0][1].k, entries[0][1].dim
    parts = [_HEADER.pack(STORE_MAGIC, k, dim, len(entries))]
    for image_id, v in entries:
        if (v.k, v.dim) != (k, dim):
            raise ValueError(f"{image_id}: VLAD shape ({v.k}, {v.dim}) != ({k}, {dim})")
        raw = image_id.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)) + raw)
        parts.append(v.values.astype("<f4").tobytes())
    path = Path(path)
    path.write_bytes(b"".join(parts))
    return path


def load_store(path) -> list[tuple[str, VladDescriptor]]:
    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < _HEADER.size or buf[:4] != STORE_MAGIC:
        raise ValueError(f"{path}: not a VLAD store")
    _, k, dim, count = _HEADER.unpack_from(buf)
    off = _HEADER.size
    out = []
    for _ in range(count):
        (n,) = struct.unpack_from("<H", buf, off)
        image_id = buf[off + 2:off + 2 + n].decode("utf-8")
        off += 2 + n
        vals = np.frombuffer(buf, dtype="<f4", count=k * dim, offset=off).astype(np.float32)
        off += 4 * k * dim
        out.append((image_id, VladDescriptor(vals, k, dim, degenerate=not vals.any())))
    if off != len(buf):
        raise ValueError(f"{path}: {len(buf) - off} trailing bytes")
    return out
