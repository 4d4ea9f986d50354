"""Reduction pipeline tests.

The k-NN results are checked against a plain O(n^2) reimplementation,
the fuzzy graph against a dense reconstruction from first principles,
and the curve fit against anchor values computed independently.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracemap.errors import ConfigError, DimensionMismatch, EmptyModel
from tracemap.reduce import (
    EXACT_MATCH_EPS,
    INIT_SCALE,
    LayoutParams,
    ReducerModel,
    find_curve_params,
    fit_reducer,
    fuzzy_simplicial_set,
    knn_graph,
    make_epochs_per_sample,
    pca_init,
    smooth_knn,
    transform,
)


def oracle_knn(data, k, metric):
    """Brute-force neighbors, no blocking, no dot-product tricks."""
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    k_eff = min(k, n - 1)
    indices = np.empty((n, k_eff), dtype=np.int64)
    dists = np.empty((n, k_eff), dtype=np.float64)
    for i in range(n):
        cand = []
        for j in range(n):
            if j == i:
                continue
            if metric == "euclidean":
                d = float(np.linalg.norm(data[i] - data[j]))
            else:
                u = data[i] / np.linalg.norm(data[i])
                v = data[j] / np.linalg.norm(data[j])
                d = float(np.clip(1.0 - float(u @ v), 0.0, 2.0))
            cand.append((d, j))
        cand.sort()
        indices[i] = [j for _, j in cand[:k_eff]]
        dists[i] = [d for d, _ in cand[:k_eff]]
    return indices, dists


@pytest.mark.parametrize("metric", ["cosine", "euclidean"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_knn_matches_bruteforce_oracle(metric, seed):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((60, 8))
    # exact duplicates force zero-distance ties at the boundary
    data[10] = data[3]
    data[20] = data[3]
    graph = knn_graph(data, 7, metric)
    exp_idx, exp_dist = oracle_knn(data, 7, metric)
    assert np.array_equal(graph.indices, exp_idx)
    assert np.allclose(graph.distances, exp_dist, atol=1e-6)


def test_knn_tie_break_prefers_lower_index():
    data = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    graph = knn_graph(data, 2, "euclidean")
    assert graph.indices.tolist() == [[1, 2], [0, 2], [0, 1], [0, 1]]
    assert np.allclose(graph.distances[3], [1.0, 1.0])


def test_knn_k_capped_at_n_minus_1():
    rng = np.random.default_rng(7)
    data = rng.standard_normal((5, 3))
    graph = knn_graph(data, 50, "euclidean")
    assert graph.indices.shape == (5, 4)
    for i in range(5):
        assert sorted(graph.indices[i].tolist()) == sorted(set(range(5)) - {i})


def test_knn_line_example():
    data = np.array([[0.0], [1.0], [3.0]])
    graph = knn_graph(data, 1, "euclidean")
    assert graph.indices.tolist() == [[1], [0], [1]]
    assert np.allclose(graph.distances, [[1.0], [1.0], [2.0]])


def test_knn_cosine_distances_bounded():
    rng = np.random.default_rng(3)
    data = rng.standard_normal((40, 5))
    graph = knn_graph(data, 10, "cosine")
    assert graph.distances.min() >= 0.0
    assert graph.distances.max() <= 2.0
    for i in range(40):
        assert i not in graph.indices[i]


def test_knn_rejects_bad_args():
    data = np.zeros((4, 2))
    with pytest.raises(ConfigError):
        knn_graph(data, 2, "manhattan")
    with pytest.raises(ConfigError):
        knn_graph(data, 0, "euclidean")


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=3, max_value=12),
    dim=st.integers(min_value=1, max_value=4),
    k=st.integers(min_value=1, max_value=15),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_knn_oracle_property(n, dim, k, seed):
    # integer grid coordinates make distance ties exact, which is the
    # hardest case for tie-breaking to agree on
    rng = np.random.default_rng(seed)
    data = rng.integers(-3, 4, size=(n, dim)).astype(np.float64)
    graph = knn_graph(data, k, "euclidean")
    exp_idx, exp_dist = oracle_knn(data, k, "euclidean")
    assert np.array_equal(graph.indices, exp_idx)
    assert np.allclose(graph.distances, exp_dist, atol=1e-9)


def test_smooth_knn_solves_calibration():
    rng = np.random.default_rng(5)
    data = rng.standard_normal((200, 10))
    k = 15
    graph = knn_graph(data, k, "euclidean")
    sigma, rho = smooth_knn(graph.distances, k)
    assert np.array_equal(rho, graph.distances[:, 0])
    target = np.log2(k)
    adjusted = np.maximum(graph.distances - rho[:, None], 0.0)
    total = np.exp(-adjusted / sigma[:, None]).sum(axis=1)
    assert np.abs(total - target).max() < 1e-4


def test_fuzzy_graph_symmetric_and_bounded():
    rng = np.random.default_rng(11)
    data = rng.standard_normal((80, 6))
    graph = knn_graph(data, 10, "euclidean")
    fuzzy = fuzzy_simplicial_set(graph, 10)
    a = fuzzy.graph
    asym = np.abs((a - a.T).toarray()).max()
    assert asym <= 1e-12
    assert a.data.min() > 0.0
    assert a.data.max() <= 1.0 + 1e-12
    assert np.abs(a.diagonal()).max() == 0.0
    # each point's nearest neighbor sits at rho, giving membership 1,
    # and 1 + b - 1*b stays 1 through the union
    for i in range(80):
        j = graph.indices[i, 0]
        assert a[i, j] == pytest.approx(1.0, abs=1e-12)


def test_fuzzy_graph_matches_dense_union():
    rng = np.random.default_rng(13)
    data = rng.standard_normal((50, 4))
    k = 8
    graph = knn_graph(data, k, "euclidean")
    sigma, rho = smooth_knn(graph.distances, k)
    n = graph.n
    w = np.zeros((n, n))
    for i in range(n):
        for col in range(graph.k):
            j = graph.indices[i, col]
            d = max(graph.distances[i, col] - rho[i], 0.0)
            w[i, j] = np.exp(-d / sigma[i])
    expected = w + w.T - w * w.T
    fuzzy = fuzzy_simplicial_set(graph, k)
    assert np.allclose(fuzzy.graph.toarray(), expected, atol=1e-12)


def test_curve_params_default_anchor():
    a, b = find_curve_params(1.0, 0.1)
    assert a == pytest.approx(1.576943, abs=1e-3)
    assert b == pytest.approx(0.895061, abs=1e-3)


def test_curve_params_follow_min_dist():
    a1, b1 = find_curve_params(1.0, 0.1)
    a2, b2 = find_curve_params(1.0, 0.5)
    assert a2 < a1
    assert b2 > b1
    assert all(np.isfinite([a1, b1, a2, b2]))


def test_pca_init_deterministic_and_scaled():
    rng = np.random.default_rng(17)
    data = rng.standard_normal((50, 6))
    p1 = pca_init(data)
    p2 = pca_init(data.copy())
    assert np.array_equal(p1, p2)
    assert p1.shape == (50, 2)
    assert np.abs(p1).max() == pytest.approx(INIT_SCALE, abs=1e-9)


def test_pca_init_rank_one_input():
    t = np.linspace(-1.0, 1.0, 9)
    data = np.outer(t, [3.0, 4.0, 0.0])
    pos = pca_init(data)
    assert np.abs(pos[:, 0]).max() == pytest.approx(INIT_SCALE, abs=1e-9)
    assert np.all(pos[:, 1] == 0.0)


def test_pca_init_constant_rows():
    data = np.ones((6, 4))
    assert np.all(pca_init(data) == 0.0)


def test_make_epochs_per_sample():
    out = make_epochs_per_sample(np.array([1.0, 0.5, 0.25]), 100)
    assert np.allclose(out, [1.0, 2.0, 4.0])


def _corpus(seed=0, n=80, dim=8):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, dim))


def test_fit_deterministic_for_seed():
    params = LayoutParams(k=8, metric="euclidean", epochs=50, seed=3)
    m1 = fit_reducer(_corpus(), params)
    m2 = fit_reducer(_corpus(), LayoutParams(**params.to_dict()))
    assert np.array_equal(m1.positions, m2.positions)


def test_fit_seed_changes_layout():
    base = dict(k=8, metric="euclidean", epochs=50)
    m1 = fit_reducer(_corpus(), LayoutParams(seed=0, **base))
    m2 = fit_reducer(_corpus(), LayoutParams(seed=1, **base))
    assert not np.allclose(m1.positions, m2.positions)


def test_fit_separates_two_clusters():
    rng = np.random.default_rng(21)
    a = rng.standard_normal((50, 8)) + np.r_[10.0, np.zeros(7)]
    b = rng.standard_normal((50, 8)) - np.r_[10.0, np.zeros(7)]
    data = np.vstack([a, b])
    params = LayoutParams(k=10, metric="euclidean", epochs=150, seed=0)
    model = fit_reducer(data, params)
    pos_a, pos_b = model.positions[:50], model.positions[50:]
    gap = np.linalg.norm(pos_a.mean(axis=0) - pos_b.mean(axis=0))
    radius_a = np.linalg.norm(pos_a - pos_a.mean(axis=0), axis=1).mean()
    radius_b = np.linalg.norm(pos_b - pos_b.mean(axis=0), axis=1).mean()
    assert gap > 3.0 * max(radius_a, radius_b)


@pytest.mark.parametrize("metric", ["cosine", "euclidean"])
def test_transform_reproduces_training_layout(metric):
    data = _corpus(seed=9, n=60, dim=6)
    params = LayoutParams(k=8, metric=metric, epochs=40, seed=0)
    model = fit_reducer(data, params)
    # the stored training vectors hit the exact-match rule bit for bit
    exact = transform(model, model.vectors)
    assert np.array_equal(exact, model.positions)
    # the float64 originals round-trip through the float32 store and land
    # a hair off, but well inside the documented tolerance
    out = transform(model, data)
    assert np.abs(out - model.positions).max() <= 1e-6


def test_transform_exact_match_takes_stored_position():
    data = _corpus(seed=2, n=30, dim=5)
    model = fit_reducer(data, LayoutParams(k=5, metric="euclidean",
                                           epochs=30, seed=0))
    out = transform(model, model.vectors[5:6])
    assert np.array_equal(out[0], model.positions[5])


def test_transform_equidistant_query_lands_midway():
    train = np.array([[0.0, 0.0], [2.0, 0.0]], dtype=np.float32)
    model = ReducerModel(
        vectors=train,
        knn=knn_graph(train, 1, "euclidean"),
        fuzzy=None,
        positions=np.array([[-5.0, 0.0], [5.0, 2.0]]),
        params=LayoutParams(k=2, metric="euclidean"),
        curve_a=1.0,
        curve_b=1.0,
    )
    out = transform(model, [[1.0, 0.0]])
    assert np.allclose(out[0], [0.0, 1.0], atol=1e-9)


def test_transform_rejects_wrong_dim():
    model = fit_reducer(_corpus(n=20, dim=4),
                        LayoutParams(k=4, epochs=20, metric="euclidean"))
    with pytest.raises(DimensionMismatch):
        transform(model, np.zeros((2, 3)))


def test_transform_rejects_empty_model():
    empty = ReducerModel(
        vectors=np.zeros((0, 3), dtype=np.float32),
        knn=knn_graph(np.zeros((1, 3)), 1, "euclidean"),
        fuzzy=None,
        positions=np.zeros((0, 2)),
        params=LayoutParams(),
        curve_a=1.0,
        curve_b=1.0,
    )
    with pytest.raises(EmptyModel):
        transform(empty, np.zeros((1, 3)))


def test_fit_rejects_empty_input():
    with pytest.raises(EmptyModel):
        fit_reducer(np.zeros((0, 5)))


def test_fit_single_point():
    vec = np.array([[1.0, 2.0, 3.0]])
    model = fit_reducer(vec, LayoutParams(metric="euclidean"))
    assert np.array_equal(model.positions, np.zeros((1, 2)))
    assert model.fuzzy is None
    out = transform(model, vec)
    assert np.array_equal(out, np.zeros((1, 2)))
    far = transform(model, [[9.0, 9.0, 9.0]])
    assert np.array_equal(far, np.zeros((1, 2)))


def test_layout_params_round_trip_and_validation():
    params = LayoutParams(k=5, seed=9)
    assert LayoutParams.from_dict(params.to_dict()) == params
    with pytest.raises(ConfigError):
        LayoutParams.from_dict({"k": 5, "bogus": 1})
    with pytest.raises(ConfigError):
        LayoutParams(k=0).validate()
    with pytest.raises(ConfigError):
        LayoutParams(spread=0.0).validate()
