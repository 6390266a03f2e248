"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``. The trade-off and
map-scaling checks take several minutes on one core.
"""

import hashlib
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vprbench.config import BASE_PRESETS
from vprbench.evaluation import compute_pr, correlation_coefficient, recall_at_1
from vprbench.experiments import map_scaling, tradeoff
from vprbench.features import BINARY, FLOAT, FeatureSet, Keypoint, extract
from vprbench.index import brute_force_knn, build_balltree, query_knn
from vprbench.pipeline import LocalizationResult, TimingRecord, build_map, localize
from vprbench.synthetic import SyntheticConfig, generate, write_bundle
from vprbench.vlad import compute_vlad
from vprbench.vocab import VisualDictionary, kmeans_pp, lloyd, save_dictionary, train_dictionary


def verdict(capsys, name: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} [{name}] {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def bundle():
    return generate(SyntheticConfig())


@pytest.fixture(scope="module")
def binary_setup(bundle):
    preset = BASE_PRESETS["binary-low"]
    feats = [extract(img, preset.extractor, i) for i, img in bundle.training.images.items()]
    V = train_dictionary(feats, preset.k, seed=0)
    env = build_map(bundle.reference.images.items(), V, preset.extractor)
    return preset, V, env


def test_tree_matches_brute_force(capsys):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    sizes = [1, 2000] + np.exp(rng.uniform(0, math.log(2000), 198)).astype(int).clip(1, 2000).tolist()
    mismatches, queries = 0, 0
    for i, size in enumerate(sizes):
        dim = (8, 64, 512)[i % 3]
        if i % 4 == 0:  # coarse integer grid: many exact ties and duplicates
            data = rng.integers(0, 3, size=(size, dim)).astype(np.float32)
        else:
            data = rng.normal(size=(size, dim)).astype(np.float32)
        ids = [f"p{j:05d}" for j in rng.permutation(size)]
        tree = build_balltree((ids, data), leaf_size=int(rng.integers(1, 40)))
        probes = [data[rng.integers(size)], rng.normal(size=dim), data[rng.integers(size)] + 1e-3]
        for q in probes:
            n = int(rng.integers(1, size + 3))
            queries += 1
            if query_knn(tree, q, n) != brute_force_knn((ids, data), q, n):
                mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 120 and len(sizes) >= 200
    verdict(capsys, "ball tree == brute force", ok,
            f"{len(sizes)} instances, {queries} queries, {mismatches} mismatches, {elapsed:.1f}s")


def test_self_retrieval(capsys, bundle, binary_setup):
    preset, V, env = binary_setup
    t0 = time.perf_counter()
    results = [localize(img, env, 5, i) for i, img in bundle.reference.images.items()]
    gt = {i: {i} for i in bundle.reference.images}
    worst = max(r.distances[0] for r in results if r.ranking)
    top_self = all(r.ranking and r.ranking[0][0] == r.query_id for r in results)
    r1 = recall_at_1(results, gt)
    elapsed = time.perf_counter() - t0
    ok = len(results) >= 200 and top_self and worst <= 1e-9 and r1 == 1.0 and elapsed < 300
    verdict(capsys, "self-retrieval", ok,
            f"{len(results)} images, recall@1={r1}, max self distance={worst:.3g}, {elapsed:.1f}s")


def test_vlad_invariants(capsys, binary_setup):
    _, _, env = binary_setup
    norms = [float(np.linalg.norm(v.values.astype(np.float64))) for _, v in env.vlads if not v.degenerate]
    rng = np.random.default_rng(5)
    for _ in range(100):
        k = int(rng.integers(2, 12))
        V = VisualDictionary(rng.normal(size=(k, 128)), FLOAT)
        x = rng.normal(size=(int(rng.integers(1, 200)), 128)).astype(np.float32)
        v = compute_vlad(FeatureSet("f", FLOAT, x, [Keypoint(0, 0)] * len(x)), V)
        if not v.degenerate:
            norms.append(float(np.linalg.norm(v.values.astype(np.float64))))
    worst = max(abs(n - 1) for n in norms)

    # two words at (0,0) and (10,10); descriptors (1,0), (0,1), (11,10), embedded in 128-d
    c = np.zeros((2, 128))
    c[1, :2] = 10
    x = np.zeros((3, 128), np.float32)
    x[0, 0] = x[1, 1] = 1
    x[2, :2] = (11, 10)
    v = compute_vlad(FeatureSet("w", FLOAT, x, [Keypoint(0, 0)] * 3), VisualDictionary(c, FLOAT))
    got = [v.blocks[0, 0], v.blocks[0, 1], v.blocks[1, 0], v.blocks[1, 1]]
    s, n = 2 ** -0.25, math.sqrt(math.sqrt(2) + 1)
    expected = [s / n, s / n, 1 / n, 0.0]
    err = max(abs(a - b) for a, b in zip(got, expected))
    ok = worst <= 1e-6 and err <= 1e-3 and len(norms) > 200
    verdict(capsys, "VLAD invariants", ok,
            f"{len(norms)} vectors, max |norm-1|={worst:.2g}; worked example "
            f"{[round(float(g), 4) for g in got]} max err {err:.2g}")


def test_kmeans(capsys, tmp_path):
    rng = np.random.default_rng(11)
    violations = 0
    for run in range(50):
        n, k, dim = int(rng.integers(10, 300)), int(rng.integers(2, 12)), int(rng.choice([2, 16, 128]))
        x = np.unique(np.round(rng.normal(size=(n, dim)) * rng.uniform(0.1, 5, dim), 3), axis=0)
        k = min(k, len(x))
        _, hist = lloyd(x, kmeans_pp(x, k, np.random.default_rng(run)), max_iters=60, tol=0.0)
        violations += sum(b > a for a, b in zip(hist, hist[1:]))

    m1, m2 = np.zeros(128), np.zeros(128)
    m1[0] = m2[1] = 3.0
    blobs = np.concatenate([m1 + rng.normal(0, 0.1, (150, 128)), m2 + rng.normal(0, 0.1, (150, 128))])
    fs = [FeatureSet("b", FLOAT, blobs.astype(np.float32), [Keypoint(0, 0)] * 300)]
    c = train_dictionary(fs, 2, seed=3).centroids
    blob_err = max(min(np.linalg.norm(c[0] - m1), np.linalg.norm(c[1] - m1)),
                   min(np.linalg.norm(c[0] - m2), np.linalg.norm(c[1] - m2)))

    bits = [FeatureSet(f"i{i}", BINARY, rng.integers(0, 256, (80, 32), dtype=np.uint8),
                       [Keypoint(0, 0)] * 80) for i in range(3)]
    hashes = set()
    for run in range(2):
        p = save_dictionary(train_dictionary(bits, 16, seed=9), tmp_path / f"d{run}.vprd")
        hashes.add(hashlib.sha256(p.read_bytes()).hexdigest())
    ok = violations == 0 and blob_err < 0.5 and len(hashes) == 1
    verdict(capsys, "k-means", ok,
            f"50 runs, {violations} distortion increases; blob error {blob_err:.3f}; "
            f"{len(hashes)} distinct dictionary hash(es) over 2 runs")


T0 = TimingRecord(0.0, 0.0, 0.0)


def _results(outcomes):
    res, gt = [], {}
    for i, (ok, sim) in enumerate(outcomes):
        gt[f"q{i}"] = {f"r{i}"}
        res.append(LocalizationResult(f"q{i}", [(f"r{i}" if ok else "x", sim)], T0, [1 / sim - 1]))
    return res, gt


def test_pr_correctness(capsys):
    res, gt = _results([(True, 0.9), (False, 0.8), (True, 0.7), (True, 0.6)])
    got = [(p.threshold, p.precision, p.recall) for p in compute_pr(res, gt).points]
    example_ok = got == [(0.9, 1.0, 0.25), (0.8, 0.5, 0.25), (0.7, 2 / 3, 0.5), (0.6, 0.75, 0.75)]

    rng = np.random.default_rng(3)
    perfect = compute_pr(*_results([(True, float(s)) for s in rng.uniform(0.05, 1, 50)]))
    transforms = [lambda s: s ** 3, lambda s: 0.5 * s + 0.1, lambda s: 1 / (1 + math.exp(-8 * s)),
                  lambda s: math.log1p(s) / 2]
    broken = 0
    for i in range(20):
        m = int(rng.integers(1, 40))
        base = [(bool(rng.random() < 0.6), float(rng.choice([0.2, 0.4, 0.6, rng.uniform(0.01, 0.99)])))
                for _ in range(m)]
        f = transforms[i % len(transforms)]
        a = compute_pr(*_results(base))
        b = compute_pr(*_results([(ok, f(s)) for ok, s in base]))
        if a.pairs() != b.pairs() or a.auc != b.auc:
            broken += 1
    ok = example_ok and abs(perfect.auc - 1.0) <= 1e-9 and broken == 0
    verdict(capsys, "PR correctness", ok,
            f"4-query example {'exact' if example_ok else got}; perfect AUC={perfect.auc!r}; "
            f"{broken}/20 transformed sets changed")


@pytest.mark.slow
def test_tradeoff(capsys, bundle, tmp_path):
    t0 = time.perf_counter()
    bundle_dir = write_bundle(bundle, tmp_path / "bundle").parent
    runs = tradeoff(bundle_dir, tmp_path / "bench", seeds=(0, 1, 2), split="t15")
    elapsed = time.perf_counter() - t0
    held = sum(r.holds for r in runs)
    lines = "; ".join(f"seed {r.seed}: binary {r.binary_t_total * 1e3:.0f} ms AUC {r.binary_auc:.3f}, "
                      f"float {r.float_t_total * 1e3:.0f} ms AUC {r.float_auc:.3f}" for r in runs)
    ok = held == 3 and elapsed < 900
    verdict(capsys, "binary/float trade-off", ok, f"{held}/3 runs hold, {elapsed:.0f}s ({lines})")


@pytest.mark.slow
def test_map_size_scaling(capsys):
    r = map_scaling()
    ok = r.large_t_search > r.small_t_search
    verdict(capsys, "map-size scaling", ok,
            f"mean t_search over {r.n_queries} queries: {r.small_size} images "
            f"{r.small_t_search * 1e3:.1f} ms, {r.large_size} images {r.large_t_search * 1e3:.1f} ms")


def _sets(kind, arrays):
    return [FeatureSet(f"s{i}", kind, a, [Keypoint(0, 0)] * len(a)) for i, a in enumerate(arrays)]


def _fuzzed_value(seed, na, nb, kind, sample_n) -> float:
    rng = np.random.default_rng(seed)
    if kind == BINARY:
        a = rng.integers(0, 256, (na, 32), dtype=np.uint8)
        b = rng.integers(0, 256, (nb, 32), dtype=np.uint8)
    else:
        a = rng.random((na, 128)).astype(np.float32)
        b = (rng.random((nb, 128)) * rng.uniform(-5, 5)).astype(np.float32)
    return correlation_coefficient(_sets(kind, [a]), _sets(kind, [b]), sample_n=sample_n,
                                   seed=seed % 97).value


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), na=st.integers(1, 30), nb=st.integers(1, 30),
       kind=st.sampled_from([BINARY, FLOAT]), sample_n=st.integers(1, 500))
def test_correlation_range_property(seed, na, nb, kind, sample_n):
    assert -1.0 <= _fuzzed_value(seed, na, nb, kind, sample_n) <= 1.0


def test_correlation_sanity(capsys, bundle, binary_setup):
    preset = binary_setup[0]
    d = np.random.default_rng(0).random((1, 128)).astype(np.float32)
    single = correlation_coefficient(_sets(FLOAT, [d]), _sets(FLOAT, [d.copy()])).value
    feats = [extract(img, preset.extractor, i) for i, img in bundle.reference.images.items()]
    self_r = correlation_coefficient(feats, feats).value
    rng = np.random.default_rng(8)
    fuzz = [_fuzzed_value(int(rng.integers(2**32)), int(rng.integers(1, 30)), int(rng.integers(1, 30)),
                          (BINARY, FLOAT)[i % 2], int(rng.integers(1, 500))) for i in range(100)]
    in_range = all(-1.0 <= v <= 1.0 for v in fuzz)
    ok = in_range and single == 1.0 and -1.0 <= self_r < 0.5
    verdict(capsys, "correlation sanity", ok,
            f"100 fuzzed inputs in [-1,1]: {in_range} (span {min(fuzz):.3f}..{max(fuzz):.3f}); "
            f"identical single descriptor -> {single!r}; reference set vs itself -> {self_r:.3f}")
