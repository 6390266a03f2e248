import hashlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import nearest_index
from vprbench.features import BINARY, FLOAT, FeatureSet, Keypoint
from vprbench.vocab import (KindMismatchError, PRESET_SIZES, VisualDictionary, assign, kmeans_pp,
                            lloyd, load_dictionary, nearest_centroids, save_dictionary,
                            train_dictionary)


def float_set(x, image_id="i"):
    x = np.asarray(x, dtype=np.float32)
    return FeatureSet(image_id, FLOAT, x, [Keypoint(0, 0)] * len(x))


def two_blobs(seed, n=150, sigma=0.1):
    rng = np.random.default_rng(seed)
    m1, m2 = np.zeros(128), np.zeros(128)
    m1[0], m2[1] = 3.0, 3.0
    x = np.concatenate([m1 + rng.normal(0, sigma, (n, 128)), m2 + rng.normal(0, sigma, (n, 128))])
    return x, (m1, m2)


def test_presets():
    assert PRESET_SIZES == {"float-high": 2048, "binary-high": 1024, "binary-low": 256}


def test_two_blob_recovery():
    x, (m1, m2) = two_blobs(0)
    V = train_dictionary([float_set(x[:150], "a"), float_set(x[150:], "b")], k=2, seed=3)
    c = V.centroids
    err = min(np.linalg.norm(c[0] - m1) + np.linalg.norm(c[1] - m2),
              np.linalg.norm(c[0] - m2) + np.linalg.norm(c[1] - m1))
    assert err < 0.5
    assert V.k == 2 and V.dim == 128 and V.descriptor_kind == FLOAT


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(10, 300), k=st.integers(2, 10),
       dim=st.sampled_from([2, 8, 128]))
def test_distortion_never_increases(seed, n, k, dim):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, dim)) * rng.uniform(0.1, 5, size=dim)
    x = np.unique(np.round(x, 3), axis=0)
    if len(x) < k:
        return
    init = kmeans_pp(x, k, np.random.default_rng(seed))
    _, hist = lloyd(x, init, max_iters=50, tol=0.0)
    assert all(b <= a for a, b in zip(hist, hist[1:])), hist


def test_empty_cluster_is_reseeded():
    x = np.array([[0.0, 0], [0.1, 0], [10, 0], [10.1, 0]])
    init = np.array([[0.05, 0], [10.05, 0], [100.0, 100.0]])
    c, hist = lloyd(x, init, max_iters=10)
    assert len(np.unique(c, axis=0)) == 3
    assert hist[-1] < hist[0]


def test_training_is_deterministic_on_disk(tmp_path):
    rng = np.random.default_rng(1)
    feats = [float_set(rng.random((60, 128)), f"im{i}") for i in range(3)]
    paths = []
    for run in range(2):
        V = train_dictionary(feats, k=4, seed=11)
        paths.append(save_dictionary(V, tmp_path / f"d{run}.vprd"))
    h = [hashlib.sha256(p.read_bytes()).hexdigest() for p in paths]
    assert h[0] == h[1]
    other = train_dictionary(feats, k=4, seed=12)
    assert not np.array_equal(other.centroids, load_dictionary(paths[0]).centroids)


def test_dictionary_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    V = train_dictionary([float_set(rng.random((40, 128)))], k=4, seed=0)
    save_dictionary(V, tmp_path / "v.vprd")
    W = load_dictionary(tmp_path / "v.vprd")
    assert W == V
    assert W.params["k"] == 4
    (tmp_path / "junk.vprd").write_bytes(b"nope")
    with pytest.raises(ValueError):
        load_dictionary(tmp_path / "junk.vprd")


def test_binary_dictionary_trains_on_lifted_bits():
    rng = np.random.default_rng(3)
    d = rng.integers(0, 256, (80, 32), dtype=np.uint8)
    fs = FeatureSet("b", BINARY, d, [Keypoint(0, 0)] * 80)
    V = train_dictionary([fs], k=5, seed=0)
    assert V.descriptor_kind == BINARY and V.dim == 256
    assert 0 <= V.centroids.min() and V.centroids.max() <= 1
    assert assign(d[0], V) == nearest_index(np.unpackbits(d[0], bitorder="little"), V.centroids)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(2, 12))
def test_assign_matches_exhaustive_scan(seed, k):
    rng = np.random.default_rng(seed)
    c = rng.integers(-3, 4, (k, 128)).astype(np.float64)
    c[1] = c[0]  # guaranteed duplicate word
    V = VisualDictionary(c, FLOAT)
    xs = np.concatenate([rng.integers(-3, 4, (20, 128)).astype(np.float64), c[:2]])
    idx, d2 = nearest_centroids(xs, c)
    for x, i, d in zip(xs, idx, d2):
        j = nearest_index(x, c)
        assert i == j == assign(x.astype(np.float32), V, FLOAT)
        assert d == pytest.approx(((x - c[j]) ** 2).sum())


def test_equidistant_tie_goes_to_lowest_index():
    c = np.zeros((3, 128))
    c[0, 0], c[1, 0], c[2, 0] = 1.0, -1.0, 5.0
    V = VisualDictionary(c, FLOAT)
    assert assign(np.zeros(128, np.float32), V) == 0
    c2 = c[[1, 0, 2]]
    assert assign(np.zeros(128, np.float32), VisualDictionary(c2, FLOAT)) == 0


def test_kind_mismatch_and_training_errors():
    rng = np.random.default_rng(4)
    V = VisualDictionary(rng.random((3, 128)), FLOAT)
    with pytest.raises(KindMismatchError):
        assign(np.zeros(32, np.uint8), V)
    with pytest.raises(ValueError):
        train_dictionary([float_set(rng.random((3, 128)))], k=4)
    with pytest.raises(ValueError):
        train_dictionary([float_set(np.ones((10, 128)))], k=2)
    with pytest.raises(ValueError):
        train_dictionary([float_set(rng.random((10, 128)))], k=1)
