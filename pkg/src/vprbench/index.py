"""Exact k-nearest-neighbour search over VLAD vectors with a ball tree.

Points are kept as float32 (the precision VLADs are stored in) and every
distance is evaluated in float64 by ``row_distances``, which both the tree
and the brute-force scan share so their answers agree bit for bit.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

_CHUNK = 256
# absolute slack on the pruning bound; covers rounding in |q - c| - r
_PRUNE_SLACK = 1e-9


def row_distances(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Euclidean distance from ``q`` (float64) to every row, evaluated in float64."""
    diff = rows.astype(np.float64) - q
    return np.sqrt(np.square(diff).sum(axis=1))


def _as_points(points) -> tuple[list, np.ndarray]:
    if isinstance(points, tuple) and len(points) == 2 and isinstance(points[1], np.ndarray):
        ids, data = list(points[0]), points[1]
    else:
        pairs = list(points)
        ids = [p[0] for p in pairs]
        rows = [getattr(p[1], "values", p[1]) for p in pairs]
        dims = {np.asarray(r).size for r in rows}
        if len(dims) > 1:
            raise ValueError(f"points have mixed dimensionality {sorted(dims)}")
        data = np.stack([np.asarray(r, dtype=np.float32).ravel() for r in rows]) if rows else None
    if data is None or len(ids) == 0:
        raise ValueError("cannot index an empty point set")
    data = np.ascontiguousarray(data, dtype=np.float32)
    if data.ndim != 2 or len(data) != len(ids):
        raise ValueError("points must be an (n, d) array with n ids")
    return ids, data


def _query_vector(q, dim: int) -> np.ndarray:
    q = np.asarray(getattr(q, "values", q), dtype=np.float64).ravel()
    if q.size != dim:
        raise ValueError(f"query has {q.size} dims, index has {dim}")
    return q


@dataclass
class QueryStats:
    visited: int = 0
    pruned: int = 0
    distance_evals: int = 0


@dataclass
class BallTree:
    """Binary ball tree; node ``i`` covers ``perm[start[i]:end[i]]``.

    Internal nodes have both children set; leaves have ``left == right == -1``.
    Node centres are subtree centroids and radii are exact maximum distances.
    """

    ids: list
    data: np.ndarray
    leaf_size: int
    perm: np.ndarray = field(repr=False)
    start: np.ndarray = field(repr=False)
    end: np.ndarray = field(repr=False)
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    centers: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.radii)

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __len__(self):
        return len(self.ids)

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def subtree(self, node: int) -> np.ndarray:
        return self.perm[self.start[node]:self.end[node]]

    def query(self, q, n: int, stats: QueryStats | None = None) -> list[tuple[Hashable, float]]:
        return query_knn(self, q, n, stats)


def _centroid(data: np.ndarray, idx: np.ndarray) -> np.ndarray:
    acc = np.zeros(data.shape[1])
    for lo in range(0, len(idx), _CHUNK):
        acc += data[idx[lo:lo + _CHUNK]].sum(axis=0, dtype=np.float64)
    return acc / len(idx)


def _spread(data: np.ndarray, idx: np.ndarray) -> np.ndarray:
    hi = np.full(data.shape[1], -np.inf, dtype=np.float32)
    lo_ = np.full(data.shape[1], np.inf, dtype=np.float32)
    for lo in range(0, len(idx), _CHUNK):
        block = data[idx[lo:lo + _CHUNK]]
        np.maximum(hi, block.max(axis=0), out=hi)
        np.minimum(lo_, block.min(axis=0), out=lo_)
    return hi.astype(np.float64) - lo_.astype(np.float64)


def _radius(data: np.ndarray, idx: np.ndarray, center: np.ndarray) -> float:
    r = 0.0
    for lo in range(0, len(idx), _CHUNK):
        r = max(r, float(row_distances(data[idx[lo:lo + _CHUNK]], center).max()))
    return r


def _split(data: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    spread = _spread(data, idx)
    axis = int(np.argmax(spread))
    if spread[axis] == 0:
        half = (len(idx) + 1) // 2
        return idx[:half], idx[half:]
    vals = data[idx, axis]
    median = np.sort(vals, kind="stable")[(len(vals) - 1) // 2]
    go_left = vals <= median
    if go_left.all():
        # median equals the maximum; ties still stay left
        go_left = vals < median
    return idx[go_left], idx[~go_left]


def build_balltree(points, leaf_size: int = 16) -> BallTree:
    """Max-spread / median-split ball tree; deterministic for a given point order."""
    if leaf_size < 1:
        raise ValueError("leaf_size must be >= 1")
    ids, data = _as_points(points)
    start, end, left, right, centers, radii = [], [], [], [], [], []
    perm: list[np.ndarray] = []
    cursor = 0

    def build(idx: np.ndarray) -> int:
        nonlocal cursor
        node = len(radii)
        c = _centroid(data, idx)
        start.append(0)
        end.append(0)
        left.append(-1)
        right.append(-1)
        centers.append(c)
        radii.append(_radius(data, idx, c))
        if len(idx) <= leaf_size:
            start[node], end[node] = cursor, cursor + len(idx)
            perm.append(idx)
            cursor += len(idx)
            return node
        lidx, ridx = _split(data, idx)
        start[node] = cursor
        left[node] = build(lidx)
        right[node] = build(ridx)
        end[node] = cursor
        return node

    build(np.arange(len(ids)))
    return BallTree(
        ids=ids, data=data, leaf_size=leaf_size, perm=np.concatenate(perm),
        start=np.array(start), end=np.array(end), left=np.array(left), right=np.array(right),
        centers=np.stack(centers), radii=np.array(radii),
    )


class _TopN:
    """Best ``n`` (distance, id) pairs seen so far, kept sorted ascending."""

    def __init__(self, n: int):
        self.n = n
        self.items: list[tuple[float, Hashable]] = []

    @property
    def full(self) -> bool:
        return len(self.items) >= self.n

    @property
    def worst(self) -> float:
        return self.items[-1][0] if self.full else np.inf

    def offer(self, dist: float, pid: Hashable) -> None:
        item = (dist, pid)
        if self.full and not item < self.items[-1]:
            return
        bisect.insort(self.items, item)
        if len(self.items) > self.n:
            self.items.pop()


def query_knn(tree: BallTree, q, n: int, stats: QueryStats | None = None) -> list[tuple[Hashable, float]]:
    """Exact ``n`` nearest points by Euclidean distance, ascending, ties broken by id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    qv = _query_vector(q, tree.dim)
    stats = stats if stats is not None else QueryStats()
    top = _TopN(min(n, len(tree)))
    centre_dist = row_distances(tree.centers[:1], qv)
    stack = [(0, float(centre_dist[0]))]
    while stack:
        node, dc = stack.pop()
        stats.visited += 1
        if top.full and dc - tree.radii[node] > top.worst + _PRUNE_SLACK:
            stats.pruned += 1
            continue
        if tree.is_leaf(node):
            members = tree.subtree(node)
            dists = row_distances(tree.data[members], qv)
            stats.distance_evals += len(members)
            for m, d in zip(members.tolist(), dists.tolist()):
                top.offer(d, tree.ids[m])
            continue
        kids = [int(tree.left[node]), int(tree.right[node])]
        kd = row_distances(tree.centers[kids], qv)
        # push the farther child first so the nearer one is expanded next
        order = (1, 0) if kd[0] <= kd[1] else (0, 1)
        for i in order:
            stack.append((kids[i], float(kd[i])))
    return [(pid, d) for d, pid in top.items]


def brute_force_knn(points, q, n: int) -> list[tuple[Hashable, float]]:
    """Exhaustive scan with the same metric, ordering and tie rule as ``query_knn``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(points, BallTree):
        ids, data = points.ids, points.data
    else:
        ids, data = _as_points(points)
    qv = _query_vector(q, data.shape[1])
    dists = np.concatenate([row_distances(data[lo:lo + _CHUNK], qv)
                            for lo in range(0, len(data), _CHUNK)])
    ranked = sorted(zip(dists.tolist(), ids))
    return [(pid, d) for d, pid in ranked[:n]]


def check_invariants(tree: BallTree) -> None:
    """Exhaustive structural check: radius bounds, leaf sizes, each point in exactly one leaf."""
    leaves = [i for i in range(tree.n_nodes) if tree.is_leaf(i)]
    seen = np.concatenate([tree.subtree(i) for i in leaves])
    if sorted(seen.tolist()) != list(range(len(tree))):
        raise AssertionError("points are not partitioned exactly once across leaves")
    for i in leaves:
        if not 1 <= len(tree.subtree(i)) <= tree.leaf_size:
            raise AssertionError(f"leaf {i} holds {len(tree.subtree(i))} points")
    for i in range(tree.n_nodes):
        members = tree.subtree(i)
        d = row_distances(tree.data[members], tree.centers[i])
        if d.max() > tree.radii[i]:
            raise AssertionError(f"node {i}: point at {d.max()} outside radius {tree.radii[i]}")
        if not tree.is_leaf(i):
            kids = np.concatenate([tree.subtree(tree.left[i]), tree.subtree(tree.right[i])])
            if sorted(kids.tolist()) != sorted(members.tolist()):
                raise AssertionError(f"node {i}: children do not partition the subtree")
