import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import knn_oracle
from vprbench.index import (QueryStats, brute_force_knn, build_balltree, check_invariants,
                            query_knn)
from vprbench.vlad import VladDescriptor


def cloud(seed, n, dim, dup=False):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, dim)).astype(np.float32)
    if dup and n > 3:
        # exact duplicates and lattice points create distance ties
        x[n // 2:] = np.round(x[n // 2:])
        x[1] = x[0]
    return [f"p{i:05d}" for i in range(n)], x


def test_single_point():
    t = build_balltree(([0], np.ones((1, 8), np.float32)))
    assert t.n_nodes == 1 and t.radii[0] == 0
    assert query_knn(t, np.ones(8), 1) == [(0, 0.0)]
    assert brute_force_knn(t, np.ones(8), 1) == [(0, 0.0)]


def test_small_set_is_one_leaf():
    ids, x = cloud(0, 10, 8)
    t = build_balltree((ids, x), leaf_size=16)
    assert t.n_nodes == 1 and sorted(t.subtree(0).tolist()) == list(range(10))


def test_invariants_on_100_points():
    ids, x = cloud(1, 100, 8)
    t = build_balltree((ids, x), leaf_size=4)
    check_invariants(t)
    assert t.n_nodes > 1


def test_tie_broken_by_id():
    x = np.array([[0, 0], [1, 0], [-1, 0], [5, 5]], np.float32)
    t = build_balltree(([9, 7, 3, 1], x), leaf_size=1)
    assert [i for i, _ in query_knn(t, [0, 0], 3)] == [9, 3, 7]
    assert [i for i, _ in brute_force_knn(([9, 7, 3, 1], x), [0, 0], 3)] == [9, 3, 7]


def test_query_equal_to_stored_point_and_full_ranking():
    ids, x = cloud(2, 50, 16)
    t = build_balltree((ids, x), leaf_size=3)
    res = query_knn(t, x[17], 1)
    assert res == [(ids[17], 0.0)]
    full = query_knn(t, x[0], 500)
    assert len(full) == 50 and sorted(i for i, _ in full) == sorted(ids)


def test_1000_points_100_queries():
    ids, x = cloud(3, 1000, 64)
    t = build_balltree((ids, x))
    rng = np.random.default_rng(4)
    for q in rng.normal(size=(100, 64)):
        assert query_knn(t, q, 10) == brute_force_knn(t, q, 10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 300), dim=st.sampled_from([2, 8, 64]),
       leaf=st.integers(1, 20), k=st.integers(1, 30), dup=st.booleans())
def test_tree_equals_brute_force(seed, n, dim, leaf, k, dup):
    ids, x = cloud(seed, n, dim, dup)
    t = build_balltree((ids, x), leaf)
    check_invariants(t)
    rng = np.random.default_rng(seed + 1)
    queries = [x[rng.integers(n)], rng.normal(size=dim), np.round(rng.normal(size=dim))]
    for q in queries:
        stats = QueryStats()
        got = query_knn(t, q, k, stats)
        assert got == brute_force_knn(t, q, k)
        assert stats.pruned <= stats.visited <= t.n_nodes


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 40), k=st.integers(1, 8))
def test_brute_force_matches_independent_scan(seed, n, k):
    ids, x = cloud(seed, n, 8)
    q = np.random.default_rng(seed).normal(size=8)
    got = brute_force_knn((ids, x), q, k)
    want = knn_oracle(ids, x, q, k)
    assert [i for i, _ in got] == [i for i, _ in want]
    assert [d for _, d in got] == pytest.approx([d for _, d in want], abs=1e-9)


def test_accepts_vlad_pairs_and_rejects_bad_input():
    v = [("a", VladDescriptor(np.array([1, 0, 0, 0]), 2, 2)),
         ("b", VladDescriptor(np.array([0, 1, 0, 0]), 2, 2))]
    t = build_balltree(v)
    assert query_knn(t, v[1][1], 1)[0][0] == "b"
    with pytest.raises(ValueError):
        build_balltree([])
    with pytest.raises(ValueError):
        build_balltree([("a", np.zeros(3)), ("b", np.zeros(4))])
    with pytest.raises(ValueError):
        query_knn(t, np.zeros(3), 1)
    with pytest.raises(ValueError):
        query_knn(t, np.zeros(4), 0)


def test_pruning_happens_on_clustered_data():
    rng = np.random.default_rng(6)
    centres = rng.normal(0, 50, size=(20, 8))
    x = (centres[rng.integers(20, size=2000)] + rng.normal(size=(2000, 8))).astype(np.float32)
    t = build_balltree((list(range(2000)), x), leaf_size=16)
    stats = QueryStats()
    query_knn(t, x[0], 5, stats)
    assert stats.pruned > 0 and stats.distance_evals < 2000
