"""Dimensionality-reduction core: exact k-NN graph, fuzzy neighbor graph,
2D layout optimization, and projection of new vectors into a fitted layout.

The method follows the standard UMAP construction: a k-nearest-neighbor
graph in the embedding space is converted to a fuzzy weighted graph via
per-point bandwidth calibration, then a 2D layout is optimized by
stochastic gradient descent with negative sampling. Projection of unseen
vectors (the overlay mechanism) uses inverse-distance-weighted averaging
over nearest training points, which keeps it deterministic and pure.

Everything here is deterministic for a fixed seed. The SGD kernel is
compiled with numba but runs sequentially: parallel edge updates would
reorder the random stream and break bit-reproducibility.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse
from scipy.optimize import curve_fit

from .errors import ConfigError, DegenerateGraph, DimensionMismatch, EmptyModel

SMOOTH_TOLERANCE = 1e-5
SIGMA_MAX_ITER = 64
# treat distances at or below this as an exact vector match during transform
EXACT_MATCH_EPS = 1e-12
INIT_SCALE = 10.0

_METRICS = ("cosine", "euclidean")


@dataclass
class KnnGraph:
    """Exact nearest neighbors per point, self excluded.

    ``indices`` and ``distances`` are (n, k) arrays; each row is sorted by
    ascending distance with ties broken by ascending index. When the
    requested k exceeds n-1 the rows hold all n-1 other points.
    """

    indices: np.ndarray
    distances: np.ndarray
    metric: str

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]


@dataclass
class FuzzyGraph:
    """Symmetric weighted neighbor graph with per-point calibration.

    ``graph`` is a CSR matrix of weights in (0, 1]; ``rho`` is each point's
    nearest-neighbor distance and ``sigma`` the bandwidth solving the
    calibration equation (see :func:`smooth_knn`).
    """

    graph: scipy.sparse.csr_matrix
    rho: np.ndarray
    sigma: np.ndarray

    @property
    def n(self) -> int:
        return self.graph.shape[0]


@dataclass
class LayoutParams:
    """Hyperparameters for fitting. Defaults are the standard ones."""

    k: int = 15
    metric: str = "cosine"
    min_dist: float = 0.1
    spread: float = 1.0
    epochs: int = 200
    negative_sample_rate: float = 5.0
    repulsion_strength: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.metric not in _METRICS:
            raise ConfigError(f"metric must be one of {_METRICS}")
        if self.min_dist < 0:
            raise ConfigError("min_dist must be >= 0")
        if self.spread <= 0:
            raise ConfigError("spread must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.negative_sample_rate < 0:
            raise ConfigError("negative_sample_rate must be >= 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "LayoutParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown layout parameters: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class ReducerModel:
    """Fitted reduction state. Immutable after build by convention.

    Holds the training vectors, both graphs, the optimized 2D positions,
    and everything needed to reproduce or project into the layout.
    """

    vectors: np.ndarray
    knn: KnnGraph
    fuzzy: FuzzyGraph | None
    positions: np.ndarray
    params: LayoutParams
    curve_a: float
    curve_b: float
    provider_id: str = ""

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def _as_matrix(vectors) -> np.ndarray:
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2D vector array, got ndim={arr.ndim}")
    return arr


def _unit_rows(arr: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(arr, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return arr / norms


def _distance_block(query: np.ndarray, data: np.ndarray, metric: str,
                    data_sq: np.ndarray | None = None) -> np.ndarray:
    """Dense distances from each query row to every data row.

    Callers pass unit rows for cosine. ``data_sq`` caches the squared norms
    of data for the euclidean path.
    """
    if metric == "cosine":
        d = 1.0 - query @ data.T
        np.clip(d, 0.0, 2.0, out=d)
        return d
    if data_sq is None:
        data_sq = np.einsum("ij,ij->i", data, data)
    query_sq = np.einsum("ij,ij->i", query, query)
    d2 = query_sq[:, None] + data_sq[None, :] - 2.0 * (query @ data.T)
    np.clip(d2, 0.0, None, out=d2)
    return np.sqrt(d2)


def _select_neighbors(dist: np.ndarray, k: int, row_offset: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Pick the k smallest entries per row, ties broken by column index.

    ``row_offset`` marks the diagonal (self) to exclude for the training
    k-NN case; None means no exclusion (transform queries).
    """
    rows, n = dist.shape
    if row_offset is not None:
        dist[np.arange(rows), row_offset + np.arange(rows)] = np.inf
    if k >= n - (0 if row_offset is None else 1):
        order = np.lexsort((np.broadcast_to(np.arange(n), dist.shape), dist), axis=1)
        take = order[:, :k]
    else:
        part = np.argpartition(dist, k - 1, axis=1)[:, :k]
        part_d = np.take_along_axis(dist, part, axis=1)
        inner = np.lexsort((part, part_d), axis=1)
        take = np.take_along_axis(part, inner, axis=1)
        take_d = np.take_along_axis(part_d, inner, axis=1)
        # argpartition selects the k smallest values but picks arbitrary
        # columns among entries tied at the boundary; redo those rows exactly
        boundary = take_d[:, -1]
        selected_ties = (take_d == boundary[:, None]).sum(axis=1)
        total_ties = (dist == boundary[:, None]).sum(axis=1)
        for r in np.nonzero(total_ties > selected_ties)[0]:
            exact = np.lexsort((np.arange(n), dist[r]))[:k]
            take[r] = exact
    idx = take.astype(np.int32)
    d = np.take_along_axis(dist, take, axis=1)
    return idx, d


def knn_graph(vectors, k: int, metric: str = "cosine") -> KnnGraph:
    """Exact brute-force k-nearest-neighbor graph.

    Parameters
    ----------
    vectors : (n, dim) array-like
        Embedding vectors, one row per point.
    k : int
        Neighbors per point; capped at n-1.
    metric : {"cosine", "euclidean"}

    Returns
    -------
    KnnGraph
        Rows sorted by (distance, index); self excluded.

    Distances are computed in float64 blocks against the full matrix, so
    memory stays bounded for large n while results remain exact.
    """
    if metric not in _METRICS:
        raise ConfigError(f"metric must be one of {_METRICS}")
    if k < 1:
        raise ConfigError("k must be >= 1")
    data = _as_matrix(vectors)
    n = data.shape[0]
    k_eff = min(k, n - 1)
    if k_eff <= 0:
        return KnnGraph(
            indices=np.zeros((n, 0), dtype=np.int32),
            distances=np.zeros((n, 0), dtype=np.float64),
            metric=metric,
        )
    if metric == "cosine":
        data = _unit_rows(data)
        data_sq = None
    else:
        data_sq = np.einsum("ij,ij->i", data, data)

    block = max(1, int(128e6 / (8 * n)))
    idx_out = np.empty((n, k_eff), dtype=np.int32)
    dist_out = np.empty((n, k_eff), dtype=np.float64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        d = _distance_block(data[start:stop], data, metric, data_sq)
        idx, dd = _select_neighbors(d, k_eff, row_offset=start)
        idx_out[start:stop] = idx
        dist_out[start:stop] = dd
    return KnnGraph(indices=idx_out, distances=dist_out, metric=metric)


def smooth_knn(distances: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-point bandwidth calibration.

    For each point i with neighbor distances d_i1 <= ... <= d_ik, sets
    rho_i = d_i1 and binary-searches sigma_i > 0 so that

        sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(k)

    within SMOOTH_TOLERANCE, using at most SIGMA_MAX_ITER bisection steps.
    The search is vectorized over points. Rows where the target is
    unreachable (e.g. every neighbor at distance rho) keep the last
    midpoint, which is the standard behavior.

    Returns
    -------
    (sigma, rho) : two (n,) float64 arrays
    """
    n = distances.shape[0]
    rho = distances[:, 0].astype(np.float64) if distances.shape[1] else np.zeros(n)
    target = np.log2(k)
    gaps = np.maximum(distances - rho[:, None], 0.0)

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    mid = np.ones(n)
    done = np.zeros(n, dtype=bool)
    for _ in range(SIGMA_MAX_ITER):
        psum = np.exp(-gaps / mid[:, None]).sum(axis=1)
        done |= np.abs(psum - target) < SMOOTH_TOLERANCE
        if done.all():
            break
        high = (psum > target) & ~done
        hi[high] = mid[high]
        low = ~high & ~done
        lo[low] = mid[low]
        unbounded = low & np.isinf(hi)
        mid[high | (low & ~unbounded)] = ((lo + hi) / 2.0)[high | (low & ~unbounded)]
        mid[unbounded] *= 2.0
    sigma = np.maximum(mid, 1e-12)
    return sigma, rho


def fuzzy_simplicial_set(graph: KnnGraph, k: int | None = None) -> FuzzyGraph:
    """Convert a k-NN graph to the symmetric fuzzy weighted graph.

    Directed weights w_ij = exp(-max(0, d_ij - rho_i) / sigma_i) are
    symmetrized with the probabilistic union w + w' - w*w', yielding
    weights in (0, 1]. Zero-distance neighborhoods (duplicate points) get
    weight 1 edges, which is correct, not an error.
    """
    n = graph.n
    if n < 2:
        raise DegenerateGraph("need at least 2 points to build a neighbor graph")
    if k is None:
        k = graph.k
    sigma, rho = smooth_knn(graph.distances, k)
    gaps = np.maximum(graph.distances - rho[:, None], 0.0)
    vals = np.exp(-gaps / sigma[:, None])
    rows = np.repeat(np.arange(n, dtype=np.int32), graph.k)
    directed = scipy.sparse.coo_matrix(
        (vals.ravel(), (rows, graph.indices.ravel())), shape=(n, n)
    ).tocsr()
    transpose = directed.T.tocsr()
    sym = directed + transpose - directed.multiply(transpose)
    sym = sym.tocsr()
    sym.eliminate_zeros()
    sym.sort_indices()
    return FuzzyGraph(graph=sym, rho=rho, sigma=sigma)


def find_curve_params(spread: float, min_dist: float) -> tuple[float, float]:
    """Fit the layout similarity curve 1/(1 + a*d^(2b)).

    Least-squares fit against the offset exponential that is 1 inside
    min_dist and decays with the given spread beyond it.
    """

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2 * b))

    xv = np.linspace(0, spread * 3, 300)
    yv = np.zeros(xv.shape)
    yv[xv < min_dist] = 1.0
    yv[xv >= min_dist] = np.exp(-(xv[xv >= min_dist] - min_dist) / spread)
    params, _ = curve_fit(curve, xv, yv)
    return float(params[0]), float(params[1])


def pca_init(vectors: np.ndarray) -> np.ndarray:
    """Project onto the top-2 principal components, scaled into [-10, 10].

    Signs are fixed deterministically (largest-magnitude loading of each
    component made positive) so identical inputs give identical layouts.
    """
    data = _as_matrix(vectors)
    n = data.shape[0]
    centered = data - data.mean(axis=0, keepdims=True)
    if n == 1 or not np.any(centered):
        return np.zeros((n, 2), dtype=np.float64)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2].copy()
    for row in range(comps.shape[0]):
        j = int(np.argmax(np.abs(comps[row])))
        if comps[row, j] < 0:
            comps[row] = -comps[row]
    scores = centered @ comps.T
    if scores.shape[1] < 2:
        scores = np.hstack([scores, np.zeros((n, 1))])
    # rank-1 inputs leave the second component as numerical noise; zero it
    if svals.shape[0] < 2 or svals[1] <= svals[0] * 1e-12:
        scores[:, 1] = 0.0
    peak = np.abs(scores).max()
    if peak == 0.0:
        return np.zeros((n, 2), dtype=np.float64)
    return (scores / peak * INIT_SCALE).astype(np.float64)


@numba.njit("i4(i8[:])", cache=True)
def _tau_rand_int(state):
    # xorshift generator over three 32-bit words carried in int64 slots
    state[0] = (((state[0] & 4294967294) << 12) & 0xFFFFFFFF) ^ (
        (((state[0] << 13) & 0xFFFFFFFF) ^ state[0]) >> 19
    )
    state[1] = (((state[1] & 4294967288) << 4) & 0xFFFFFFFF) ^ (
        (((state[1] << 2) & 0xFFFFFFFF) ^ state[1]) >> 25
    )
    state[2] = (((state[2] & 4294967280) << 17) & 0xFFFFFFFF) ^ (
        (((state[2] << 3) & 0xFFFFFFFF) ^ state[2]) >> 11
    )
    return state[0] ^ state[1] ^ state[2]


@numba.njit(cache=True)
def _clip(val):
    if val > 4.0:
        return 4.0
    elif val < -4.0:
        return -4.0
    else:
        return val


@numba.njit(cache=True, fastmath=False)
def _sgd_layout(positions, head, tail, n_epochs, n_vertices, epochs_per_sample,
                a, b, rng_state, gamma, initial_alpha, negative_sample_rate):
    # Sequential on purpose: the sampling sequence defines the result, and
    # any reordering (prange, fastmath reassociation) breaks determinism.
    dim = positions.shape[1]
    alpha = initial_alpha
    epochs_per_negative_sample = epochs_per_sample / negative_sample_rate
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()
    epoch_of_next_sample = epochs_per_sample.copy()

    for n in range(n_epochs):
        for i in range(epochs_per_sample.shape[0]):
            if epoch_of_next_sample[i] <= n:
                j = head[i]
                k = tail[i]
                current = positions[j]
                other = positions[k]

                dist_squared = 0.0
                for d in range(dim):
                    diff = current[d] - other[d]
                    dist_squared += diff * diff

                if dist_squared > 0.0:
                    grad_coeff = -2.0 * a * b * pow(dist_squared, b - 1.0)
                    grad_coeff /= a * pow(dist_squared, b) + 1.0
                else:
                    grad_coeff = 0.0

                for d in range(dim):
                    grad_d = _clip(grad_coeff * (current[d] - other[d]))
                    current[d] += grad_d * alpha
                    other[d] += -grad_d * alpha

                epoch_of_next_sample[i] += epochs_per_sample[i]

                n_neg_samples = int(
                    (n - epoch_of_next_negative_sample[i])
                    / epochs_per_negative_sample[i]
                )

                for _ in range(n_neg_samples):
                    k = _tau_rand_int(rng_state) % n_vertices
                    other = positions[k]

                    dist_squared = 0.0
                    for d in range(dim):
                        diff = current[d] - other[d]
                        dist_squared += diff * diff

                    if dist_squared > 0.0:
                        grad_coeff = 2.0 * gamma * b
                        grad_coeff /= (0.001 + dist_squared) * (
                            a * pow(dist_squared, b) + 1
                        )
                    elif j == k:
                        continue
                    else:
                        grad_coeff = 0.0

                    for d in range(dim):
                        if grad_coeff > 0.0:
                            grad_d = _clip(grad_coeff * (current[d] - other[d]))
                        else:
                            grad_d = 4.0
                        current[d] += grad_d * alpha

                epoch_of_next_negative_sample[i] += (
                    n_neg_samples * epochs_per_negative_sample[i]
                )

        alpha = initial_alpha * (1.0 - (float(n) / float(n_epochs)))

    return positions


def make_epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    """Sampling schedule: stronger edges get sampled more often.

    An edge with weight w relative to the max weight is visited about
    n_epochs * w / w_max times over the run.
    """
    result = -1.0 * np.ones(weights.shape[0], dtype=np.float64)
    n_samples = n_epochs * (weights / weights.max())
    result[n_samples > 0] = float(n_epochs) / n_samples[n_samples > 0]
    return result


def optimize_layout(fuzzy: FuzzyGraph, vectors: np.ndarray,
                    params: LayoutParams, a: float, b: float) -> np.ndarray:
    """Optimize 2D positions against the fuzzy graph.

    Initialization is the PCA projection of the training vectors; edges are
    sampled with probability proportional to weight, with
    ``negative_sample_rate`` uniform negatives per positive sample; learning
    rate decays linearly from 1 to 0 over ``params.epochs``. Deterministic
    for a fixed seed.
    """
    params.validate()
    positions = pca_init(vectors)
    coo = fuzzy.graph.tocoo()
    if coo.nnz == 0:
        return positions
    # CSR-sorted COO gives a deterministic (row, col) edge order
    head = coo.row.astype(np.int32)
    tail = coo.col.astype(np.int32)
    weights = coo.data.astype(np.float64)
    epochs_per_sample = make_epochs_per_sample(weights, params.epochs)
    rng_state = (
        np.random.RandomState(params.seed)
        .randint(np.iinfo(np.int32).min + 1, np.iinfo(np.int32).max, 3)
        .astype(np.int64)
    )
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    _sgd_layout(
        positions, head, tail, int(params.epochs), fuzzy.n,
        epochs_per_sample, float(a), float(b), rng_state,
        float(params.repulsion_strength), 1.0, float(params.negative_sample_rate),
    )
    if not np.isfinite(positions).all():
        raise DegenerateGraph("layout diverged to non-finite positions")
    return positions


def fit_reducer(vectors, params: LayoutParams | None = None,
                provider_id: str = "") -> ReducerModel:
    """Run the full fit: k-NN graph, fuzzy graph, curve fit, layout."""
    params = params or LayoutParams()
    params.validate()
    data = _as_matrix(vectors).astype(np.float32)
    if data.shape[0] == 0:
        raise EmptyModel("cannot fit a reducer on zero vectors")
    a, b = find_curve_params(params.spread, params.min_dist)
    graph = knn_graph(data, params.k, params.metric)
    if data.shape[0] == 1:
        return ReducerModel(
            vectors=data, knn=graph, fuzzy=None,
            positions=np.zeros((1, 2), dtype=np.float64),
            params=params, curve_a=a, curve_b=b, provider_id=provider_id,
        )
    fuzzy = fuzzy_simplicial_set(graph, params.k)
    positions = optimize_layout(fuzzy, data, params, a, b)
    return ReducerModel(
        vectors=data, knn=graph, fuzzy=fuzzy, positions=positions,
        params=params, curve_a=a, curve_b=b, provider_id=provider_id,
    )


def transform(model: ReducerModel, new_vectors) -> np.ndarray:
    """Project new vectors into a fitted layout without refitting.

    Each vector's position is the inverse-distance-weighted average of its
    k nearest training points' positions (same metric and k as the fit).
    A vector at distance 0 from a training point takes that point's stored
    position exactly, so projecting the training set reproduces the layout.
    Pure: the model is not modified.
    """
    if model.n == 0:
        raise EmptyModel("model has no training points")
    queries = _as_matrix(new_vectors)
    if queries.shape[1] != model.dim:
        raise DimensionMismatch(
            f"new vectors have dim {queries.shape[1]}, model expects {model.dim}"
        )
    metric = model.params.metric
    train = model.vectors.astype(np.float64)
    if metric == "cosine":
        train = _unit_rows(train)
        queries = _unit_rows(queries)
        train_sq = None
    else:
        train_sq = np.einsum("ij,ij->i", train, train)

    n_train = train.shape[0]
    k = min(model.params.k, n_train)
    m = queries.shape[0]
    out = np.empty((m, 2), dtype=np.float64)
    block = max(1, int(128e6 / (8 * max(n_train, 1))))
    for start in range(0, m, block):
        stop = min(start + block, m)
        d = _distance_block(queries[start:stop], train, metric, train_sq)
        idx, dd = _select_neighbors(d, k, row_offset=None)
        if metric == "euclidean":
            # the dot-product expansion cancels catastrophically near zero,
            # leaving ~1e-8 of noise where an exact match should read 0, so
            # candidate matches get their distance recomputed directly
            close = np.flatnonzero(dd[:, 0] <= 1e-6)
            if close.size:
                diff = queries[start + close] - train[idx[close, 0]]
                dd[close, 0] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        nearest = dd[:, 0] <= EXACT_MATCH_EPS
        pos = model.positions[idx]
        # exact-match rows produce inf weights here; they are overwritten below
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 1.0 / dd
            weighted = (pos * w[:, :, None]).sum(axis=1) / w.sum(axis=1)[:, None]
        weighted[nearest] = model.positions[idx[nearest, 0]]
        out[start:stop] = weighted
    return out
