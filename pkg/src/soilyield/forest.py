"""Random-forest regression built from variance-reduction binary trees.

Splits maximize the weighted variance reduction
Var(parent) - (nL/n) Var(left) - (nR/n) Var(right), with thresholds at
midpoints between consecutive distinct sorted feature values.  Ties are
broken by lowest feature index, then lowest threshold.

Determinism contract: every tree draws from its own generator derived as
``SeedSequence(seed, spawn_key=(tree_index,))``, so fitting is bit-identical
no matter how tree construction is scheduled; within a tree, candidate
features are drawn per node before recursing left then right.  Node scans
canonicalize sample order by sorting on (feature value, target value), which
makes the chosen split independent of training row order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatchError, TooFewRowsError

# Below this many samples a scalar scan beats numpy's per-call overhead.
_SMALL_NODE = 48

# Two candidate features whose impurity decreases agree to within this
# fraction of the parent variance are a tie; distinct true reductions on
# continuous targets differ by far more, while equal-partition candidates
# computed through different float paths differ by far less.
REDUCTION_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Leaf:
    value: float
    count: int


@dataclass(frozen=True)
class Internal:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Leaf | Internal


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: int | None = None  # None resolves to ceil(d / 3) at fit time
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be >= 1 or None")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple[TreeNode, ...]
    params: ForestParams
    feature_names: tuple[str, ...]
    oob_r2: float | None


class SplitChoice(NamedTuple):
    feature: int
    threshold: float
    impurity_decrease: float


def _scan_feature_numpy(xs: np.ndarray, ys: np.ndarray, sse_parent: float,
                        min_leaf: int) -> tuple[float, float] | None:
    m = xs.shape[0]
    order = np.lexsort((ys, xs))
    xs = xs[order]
    ys = ys[order]
    boundary = xs[:-1] != xs[1:]
    if not boundary.any():
        return None
    k = np.arange(1, m)
    valid = boundary & (k >= min_leaf) & (m - k >= min_leaf)
    if not valid.any():
        return None
    cs = np.cumsum(ys)
    cq = np.cumsum(ys * ys)
    s_l = cs[:-1]
    q_l = cq[:-1]
    s_t = cs[-1]
    q_t = cq[-1]
    sse_l = q_l - s_l * s_l / k
    sse_r = (q_t - q_l) - (s_t - s_l) ** 2 / (m - k)
    reduction = (sse_parent - sse_l - sse_r) / m
    reduction[~valid] = -np.inf
    j = int(np.argmax(reduction))  # first max = lowest threshold
    if reduction[j] <= 0.0:
        return None
    threshold = 0.5 * (xs[j] + xs[j + 1])
    if threshold == xs[j + 1]:  # adjacent floats: keep the <= rule partition intact
        threshold = xs[j]
    return float(threshold), float(reduction[j])


def _scan_feature_scalar(xs: np.ndarray, ys: np.ndarray, sse_parent: float,
                         min_leaf: int) -> tuple[float, float] | None:
    m = xs.shape[0]
    pairs = sorted(zip(xs.tolist(), ys.tolist()))
    s_t = 0.0
    q_t = 0.0
    for _, yv in pairs:
        s_t += yv
        q_t += yv * yv
    best: tuple[float, float] | None = None
    s_l = 0.0
    q_l = 0.0
    for p in range(1, m):
        yv = pairs[p - 1][1]
        s_l += yv
        q_l += yv * yv
        if pairs[p - 1][0] == pairs[p][0]:
            continue
        if p < min_leaf or m - p < min_leaf:
            continue
        sse_l = q_l - s_l * s_l / p
        s_r = s_t - s_l
        sse_r = (q_t - q_l) - s_r * s_r / (m - p)
        reduction = (sse_parent - sse_l - sse_r) / m
        if reduction > 0.0 and (best is None or reduction > best[1]):
            threshold = 0.5 * (pairs[p - 1][0] + pairs[p][0])
            if threshold == pairs[p][0]:
                threshold = pairs[p - 1][0]
            best = (threshold, reduction)
    return best


def best_split(rows, X, y, candidate_features: Sequence[int],
               min_samples_leaf: int = 1) -> SplitChoice | None:
    """Best (feature, threshold) among the candidates, or None.

    Returns None when the node target is constant, no threshold produces
    children of at least ``min_samples_leaf`` samples, or every candidate
    feature is constant.  Within a feature the lowest threshold wins a
    tie; across features a later feature only displaces an earlier one
    when its reduction is larger by more than REDUCTION_TIE_RTOL times
    the parent variance, so equal-partition candidates resolve to the
    lowest feature index.
    """
    rows = np.sort(np.asarray(rows, dtype=np.intp))
    m = rows.size
    if m < 2:
        return None
    ys = y[rows]
    if np.all(ys == ys[0]):
        return None
    yc = ys - ys.mean()  # shift-invariant sums keep the scans well conditioned
    s_t = float(np.sum(yc))
    q_t = float(np.sum(yc * yc))
    sse_parent = q_t - s_t * s_t / m
    tie_band = REDUCTION_TIE_RTOL * sse_parent / m

    scan = _scan_feature_scalar if m < _SMALL_NODE else _scan_feature_numpy
    best: SplitChoice | None = None
    for f in sorted(int(f) for f in candidate_features):
        found = scan(X[rows, f], yc, sse_parent, min_samples_leaf)
        if found is not None and (best is None or found[1] > best.impurity_decrease + tie_band):
            best = SplitChoice(f, found[0], found[1])
    return best


def _resolve_max_features(max_features: int | None, d: int) -> int:
    mf = math.ceil(d / 3) if max_features is None else max_features
    if not 1 <= mf <= d:
        raise ValueError(f"max_features must lie in [1, {d}], got {mf}")
    return mf


def fit_tree(X, y, rows, params: ForestParams, rng: np.random.Generator) -> TreeNode:
    """Grow one regression tree over the given (multiset of) row indices."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    rows = np.sort(np.asarray(rows, dtype=np.intp))
    if rows.size < 1:
        raise ValueError("need at least one row to grow a tree")
    d = X.shape[1]
    mf = _resolve_max_features(params.max_features, d)

    def grow(rows: np.ndarray, depth: int) -> TreeNode:
        ys = y[rows]
        stop = (
            rows.size < params.min_samples_split
            or (params.max_depth is not None and depth >= params.max_depth)
            or np.all(ys == ys[0])
        )
        choice = None
        if not stop:
            candidates = np.sort(rng.choice(d, size=mf, replace=False))
            choice = best_split(rows, X, y, candidates, params.min_samples_leaf)
        if choice is None:
            return Leaf(value=float(ys.mean()), count=int(rows.size))
        mask = X[rows, choice.feature] <= choice.threshold
        left = grow(rows[mask], depth + 1)
        right = grow(rows[~mask], depth + 1)
        return Internal(choice.feature, choice.threshold, left, right)

    return grow(rows, 0)


def _tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tree_index,)))


def _fit_one_tree(args) -> tuple[TreeNode, np.ndarray | None]:
    X, y, params, tree_index = args
    rng = _tree_rng(params.seed, tree_index)
    n = X.shape[0]
    if params.bootstrap:
        drawn = rng.integers(0, n, size=n)
        rows = np.sort(drawn)
        oob = np.ones(n, dtype=bool)
        oob[drawn] = False
    else:
        rows = np.arange(n)
        oob = None
    return fit_tree(X, y, rows, params, rng), oob


def fit_forest(X, y, params: ForestParams,
               feature_names: Sequence[str] | None = None,
               workers: int = 1) -> ForestModel:
    """Fit ``params.n_trees`` bootstrap trees.

    ``workers`` only controls scheduling; the fitted model is bit-identical
    for any worker count because each tree owns a derived generator.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise DimensionMismatchError(
            f"X must be (n, d) and y length n, got {X.shape} and {y.shape}"
        )
    n, d = X.shape
    if n < 2:
        raise TooFewRowsError(f"need at least 2 rows, got {n}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("X and y must be finite")
    resolved = replace(params, max_features=_resolve_max_features(params.max_features, d))
    names = tuple(feature_names) if feature_names is not None else tuple(
        f"x{i}" for i in range(d)
    )
    if len(names) != d:
        raise DimensionMismatchError(f"expected {d} feature names, got {len(names)}")

    tasks = [(X, y, resolved, t) for t in range(resolved.n_trees)]
    if workers <= 1:
        results = [_fit_one_tree(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fit_one_tree, tasks))

    trees = tuple(tree for tree, _ in results)
    oob_r2 = _oob_r2(X, y, results) if resolved.bootstrap else None
    return ForestModel(trees=trees, params=resolved, feature_names=names, oob_r2=oob_r2)


def _oob_r2(X: np.ndarray, y: np.ndarray, results) -> float | None:
    n = X.shape[0]
    sums = np.zeros(n)
    counts = np.zeros(n, dtype=np.intp)
    for tree, oob in results:
        for i in np.nonzero(oob)[0]:
            sums[i] += predict_tree(tree, X[i])
            counts[i] += 1
    covered = counts > 0
    if covered.sum() < 2:
        return None
    y_cov = y[covered]
    tss = float(((y_cov - y_cov.mean()) ** 2).sum())
    if tss == 0.0:
        return None
    rss = float(((y_cov - sums[covered] / counts[covered]) ** 2).sum())
    return 1.0 - rss / tss


def predict_tree(node: TreeNode, x: np.ndarray) -> float:
    while isinstance(node, Internal):
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node.value


def predict_forest(m: ForestModel, X) -> np.ndarray:
    """Per row, the arithmetic mean of the routed leaf values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(m.feature_names):
        raise DimensionMismatchError(
            f"expected shape (n, {len(m.feature_names)}), got {X.shape}"
        )
    n_trees = len(m.trees)
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        total = 0.0
        for tree in m.trees:
            total += predict_tree(tree, X[i])
        out[i] = total / n_trees
    return out
