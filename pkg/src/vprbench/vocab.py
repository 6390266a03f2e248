"""Visual dictionary: k-means++ seeded Lloyd iterations over local descriptors."""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .features.keypoint import BINARY, DESCRIPTOR_DIMS, FeatureSet, lift

PRESET_SIZES = {
    # word counts chosen per descriptor family in the reference study
    "float-high": 2048,
    "binary-high": 1024,
    "binary-low": 256,
}

DICT_MAGIC = b"VPRD"
_KIND_CODES = {"binary": 0, "float": 1}
_HEADER = struct.Struct("<4sBII")


class KindMismatchError(ValueError):
    pass


@dataclass
class VisualDictionary:
    centroids: np.ndarray
    descriptor_kind: str
    training_fingerprint: str = ""
    # training diagnostics; not part of the binary file
    distortions: list[float] = field(default_factory=list, repr=False, compare=False)
    params: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 2:
            raise ValueError("a dictionary needs a (k >= 2, dim) centroid matrix")
        if self.descriptor_kind not in DESCRIPTOR_DIMS:
            raise ValueError(f"unknown descriptor kind {self.descriptor_kind!r}")
        if c.shape[1] != DESCRIPTOR_DIMS[self.descriptor_kind]:
            raise ValueError(f"{self.descriptor_kind} dictionaries are "
                             f"{DESCRIPTOR_DIMS[self.descriptor_kind]}-d, got {c.shape[1]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("centroids must be finite")
        self.centroids = c

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def __eq__(self, other):
        if not isinstance(other, VisualDictionary):
            return NotImplemented
        return (self.descriptor_kind == other.descriptor_kind
                and self.training_fingerprint == other.training_fingerprint
                and np.array_equal(self.centroids, other.centroids))


# -- nearest-centroid search -----------------------------------------------------

def _exact_sq(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    d = c - x
    return np.einsum("ij,ij->i", d, d)


def nearest_centroids(x: np.ndarray, centroids: np.ndarray, chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Index and squared distance of the nearest centroid for every row of ``x``.

    Uses the ``|x|^2 - 2 x.c + |c|^2`` expansion, then re-scores near-ties with
    exact differences so the answer matches an exhaustive scan (lowest index
    wins exact ties).
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    idx = np.empty(n, dtype=np.int64)
    best = np.empty(n)
    c2 = np.einsum("ij,ij->i", centroids, centroids)
    for lo in range(0, n, chunk):
        xb = x[lo:lo + chunk]
        x2 = np.einsum("ij,ij->i", xb, xb)
        d2 = x2[:, None] - 2.0 * (xb @ centroids.T) + c2[None, :]
        amin = np.argmin(d2, axis=1)
        dmin = d2[np.arange(len(xb)), amin]
        slack = 1e-9 * (x2 + c2.max() + 1.0)
        near = d2 <= (dmin + slack)[:, None]
        ambiguous = np.nonzero(near.sum(axis=1) > 1)[0]
        exact_min = _exact_sq(xb, centroids[amin])
        for r in ambiguous:
            cand = np.nonzero(near[r])[0]
            ex = _exact_sq(np.broadcast_to(xb[r], (len(cand), xb.shape[1])), centroids[cand])
            j = int(np.argmin(ex))
            amin[r], exact_min[r] = cand[j], ex[j]
        idx[lo:lo + chunk] = amin
        best[lo:lo + chunk] = exact_min
    return idx, best


def assign(d: np.ndarray, V: VisualDictionary, kind: str | None = None) -> int:
    """Word index of the Euclidean-nearest centroid; binary descriptors are lifted first."""
    d = np.asarray(d)
    if kind is None:
        kind = BINARY if d.dtype == np.uint8 and d.shape[-1] == 32 else "float"
    if kind != V.descriptor_kind:
        raise KindMismatchError(f"{kind} descriptor vs {V.descriptor_kind} dictionary")
    row = lift(d.reshape(1, -1), kind)
    if row.shape[1] != V.dim:
        raise KindMismatchError(f"descriptor has {row.shape[1]} dims, dictionary {V.dim}")
    return int(nearest_centroids(row, V.centroids)[0][0])


# -- training ------------------------------------------------------------------

def _stack(features: Sequence[FeatureSet]) -> tuple[np.ndarray, str]:
    kinds = {fs.kind for fs in features if len(fs)}
    if len(kinds) > 1:
        raise KindMismatchError(f"mixed descriptor kinds in training set: {sorted(kinds)}")
    if not kinds:
        raise ValueError("training set contains no descriptors")
    kind = kinds.pop()
    return np.concatenate([fs.lifted() for fs in features if len(fs)]), kind


def training_fingerprint(features: Sequence[FeatureSet], k: int, seed: int,
                         max_iters: int, tol: float) -> str:
    h = hashlib.sha256()
    h.update(json.dumps({"k": k, "seed": seed, "max_iters": max_iters, "tol": tol},
                        sort_keys=True).encode())
    for fs in features:
        h.update(fs.image_id.encode() + b"\0" + fs.kind.encode() + b"\0")
        h.update(np.ascontiguousarray(fs.descriptors).tobytes())
    return h.hexdigest()


def kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new centre is drawn with probability proportional to D^2."""
    n = len(x)
    x2 = np.einsum("ij,ij->i", x, x)

    def sq_to(i: int) -> np.ndarray:
        return np.maximum(x2 - 2.0 * (x @ x[i]) + x2[i], 0.0)

    chosen = [int(rng.integers(n))]
    d2 = sq_to(chosen[0])
    for _ in range(1, k):
        cum = np.cumsum(d2)
        if cum[-1] <= 0:
            raise ValueError("fewer distinct descriptors than dictionary words")
        i = min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")), n - 1)
        while d2[i] == 0:  # landing exactly on a covered point
            i = (i + 1) % n
        chosen.append(i)
        np.minimum(d2, sq_to(i), out=d2)
    return x[chosen].copy()


def lloyd(x: np.ndarray, centroids: np.ndarray, max_iters: int = 100, tol: float = 1e-4,
          on_iteration=None) -> tuple[np.ndarray, list[float]]:
    """Lloyd iterations from ``centroids``; returns final centroids and per-iteration distortion.

    Distortion (mean squared distance to the assigned centroid) is recorded after
    every assignment step. Clusters that lose all members are re-seeded at the
    point currently farthest from its own centroid.
    """
    c = centroids.copy()
    k = len(c)
    history: list[float] = []
    for it in range(max_iters):
        labels, d2 = nearest_centroids(x, c)
        history.append(float(d2.mean()))
        if on_iteration is not None:
            on_iteration(it, history[-1])
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(c)
        order = np.argsort(labels, kind="stable")
        present = np.nonzero(counts)[0]
        starts = np.concatenate([[0], np.cumsum(counts[present])[:-1]])
        sums[present] = np.add.reduceat(x[order], starts, axis=0)
        new = c.copy()
        nz = counts > 0
        new[nz] = sums[nz] / counts[nz, None]
        empty = np.nonzero(~nz)[0]
        if len(empty):
            far = np.argsort(-d2, kind="stable")
            taken = 0
            for j in empty:
                new[j] = x[far[taken]]
                taken += 1
        shift = float(np.sqrt(((new - c) ** 2).sum(axis=1)).max())
        c = new
        if shift < tol and not len(empty):
            labels, d2 = nearest_centroids(x, c)
            history.append(float(d2.mean()))
            break
    return c, history


def train_dictionary(features: Sequence[FeatureSet], k: int, seed: int = 0,
                     max_iters: int = 100, tol: float = 1e-4) -> VisualDictionary:
    """Cluster training descriptors into ``k`` words; bit-reproducible for fixed inputs and seed."""
    if k < 2:
        raise ValueError("k must be >= 2")
    x, kind = _stack(features)
    if len(x) < k:
        raise ValueError(f"need at least k={k} descriptors, got {len(x)}")
    if len(np.unique(x, axis=0)) < k:
        raise ValueError(f"fewer than k={k} distinct descriptors")
    rng = np.random.default_rng(seed)
    init = kmeans_pp(x, k, rng)
    centroids, history = lloyd(x, init, max_iters=max_iters, tol=tol)
    # stored centroids are float32, so round here to keep in-memory and on-disk dictionaries equal
    centroids = centroids.astype(np.float32).astype(np.float64)
    return VisualDictionary(
        centroids, kind, training_fingerprint(features, k, seed, max_iters, tol),
        distortions=history,
        params={"k": k, "seed": seed, "max_iters": max_iters, "tol": tol,
                "n_descriptors": int(len(x)), "n_images": len(features),
                "iterations": len(history), "final_distortion": history[-1]},
    )


# -- persistence ------------------------------------------------------------------

def save_dictionary(V: VisualDictionary, path, sidecar: dict | None = None) -> Path:
    """Binary dictionary file plus a ``.json`` sidecar holding training parameters."""
    path = Path(path)
    fp = V.training_fingerprint.encode("ascii")
    blob = (_HEADER.pack(DICT_MAGIC, _KIND_CODES[V.descriptor_kind], V.k, V.dim)
            + V.centroids.astype("<f4").tobytes()
            + struct.pack("<H", len(fp)) + fp)
    path.write_bytes(blob)
    meta = {"k": V.k, "dim": V.dim, "descriptor_kind": V.descriptor_kind,
            "training_fingerprint": V.training_fingerprint, "training": V.params}
    if sidecar:
        meta.update(sidecar)
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def load_dictionary(path) -> VisualDictionary:
    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < _HEADER.size or buf[:4] != DICT_MAGIC:
        raise ValueError(f"{path}: not a dictionary file")
    _, code, k, dim = _HEADER.unpack_from(buf)
    kinds = {v: kk for kk, v in _KIND_CODES.items()}
    if code not in kinds:
        raise ValueError(f"{path}: unknown descriptor kind code {code}")
    off = _HEADER.size
    n = k * dim
    if len(buf) < off + 4 * n + 2:
        raise ValueError(f"{path}: truncated dictionary file")
    cent = np.frombuffer(buf, dtype="<f4", count=n, offset=off).reshape(k, dim).astype(np.float64)
    off += 4 * n
    (fl,) = struct.unpack_from("<H", buf, off)
    fp = buf[off + 2:off + 2 + fl].decode("ascii")
    params = {}
    side = path.with_suffix(path.suffix + ".json")
    if side.exists():
        params = json.loads(side.read_text()).get("training", {})
    return VisualDictionary(cent, kinds[code], fp, params=params)
