"""Flat-array decision trees shared by the tree-based models.

Trees are stored as parallel arrays so that batch prediction is a loop over
tree depth with vectorized gathers instead of per-row recursion. Leaves have
feature == -1 and point at themselves, which lets the traversal loop run a
fixed number of iterations for the whole batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_EULER_GAMMA = 0.5772156649015329
_MIN_GAIN = 1e-12


@dataclass
class FlatTree:
    feature: np.ndarray  # int32, -1 marks a leaf
    threshold: np.ndarray  # float64, split at x <= threshold
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64 leaf payload
    depth: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


def predict_value(tree: FlatTree, X: np.ndarray) -> np.ndarray:
    """Route every row of X to a leaf and return the leaf payloads."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    if n == 0:
        return tree.value[node]
    rows = np.arange(n)
    for _ in range(tree.depth):
        f = tree.feature[node]
        interior = f >= 0
        if not interior.any():
            break
        xf = X[rows, np.where(interior, f, 0)]
        child = np.where(xf <= tree.threshold[node], tree.left[node], tree.right[node])
        node = np.where(interior, child, node)
    return tree.value[node]


class _NodeStore:
    def __init__(self) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def add(self, value: float) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(0)
        self.right.append(0)
        self.value.append(value)
        return len(self.feature) - 1

    def finish(self, depth: int) -> FlatTree:
        feature = np.array(self.feature, dtype=np.int32)
        left = np.array(self.left, dtype=np.int32)
        right = np.array(self.right, dtype=np.int32)
        leaves = feature < 0
        idx = np.arange(len(feature), dtype=np.int32)
        left[leaves] = idx[leaves]
        right[leaves] = idx[leaves]
        return FlatTree(
            feature=feature,
            threshold=np.array(self.threshold, dtype=float),
            left=left,
            right=right,
            value=np.array(self.value, dtype=float),
            depth=depth,
        )


def _split_candidates(xs: np.ndarray, n: int, min_leaf: int) -> np.ndarray:
    """Valid cut positions: strictly increasing sorted values, min_leaf on both sides."""
    sizes = np.arange(1, n)
    valid = xs[1:] > xs[:-1]
    valid &= ((sizes >= min_leaf) & (n - sizes >= min_leaf))[:, None]
    return valid


def _best_split_gini(Xn, y, w, min_leaf):
    """Lowest weighted Gini cut over the feature block, or None.

    Splits are allowed at zero improvement as long as the node is impure,
    which is what lets a two-level tree carve out an XOR layout.
    """
    n = len(y)
    if n < 2 * min_leaf or n < 2:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    ws = w[order]
    wp = (w * y)[order]

    wl = np.cumsum(ws, axis=0)[:-1]
    pl = np.cumsum(wp, axis=0)[:-1]
    total_w = w.sum()
    total_p = (w * y).sum()
    wr = total_w - wl
    pr = total_p - pl

    with np.errstate(invalid="ignore", divide="ignore"):
        frac_l = pl / wl
        frac_r = pr / wr
        impurity = wl * 2 * frac_l * (1 - frac_l) + wr * 2 * frac_r * (1 - frac_r)
    valid = _split_candidates(xs, n, min_leaf)
    if not valid.any():
        return None
    impurity = np.where(valid, impurity, np.inf)
    flat = int(np.argmin(impurity))
    pos, j = divmod(flat, impurity.shape[1])
    threshold = 0.5 * (xs[pos, j] + xs[pos + 1, j])
    return j, float(threshold)


def _best_split_newton(Xn, g, h, reg_lambda, min_leaf):
    """Highest Newton gain cut for second-order boosting, or None."""
    n = len(g)
    if n < 2 * min_leaf or n < 2:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    xs = np.take_along_axis(Xn, order, axis=0)
    gl = np.cumsum(g[order], axis=0)[:-1]
    hl = np.cumsum(h[order], axis=0)[:-1]
    g_total = g.sum()
    h_total = h.sum()
    gr = g_total - gl
    hr = h_total - hl

    gain = gl**2 / (hl + reg_lambda) + gr**2 / (hr + reg_lambda) - g_total**2 / (h_total + reg_lambda)
    valid = _split_candidates(xs, n, min_leaf)
    gain = np.where(valid, gain, -np.inf)
    flat = int(np.argmax(gain))
    pos, j = divmod(flat, gain.shape[1])
    if gain[pos, j] <= _MIN_GAIN:
        return None
    threshold = 0.5 * (xs[pos, j] + xs[pos + 1, j])
    return j, float(threshold)


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    max_depth: int,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
    sample_weight: np.ndarray | None = None,
) -> FlatTree:
    """CART with Gini impurity; leaf payload is the weighted positive fraction."""
    n, d = X.shape
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    store = _NodeStore()
    depth_seen = 0

    def build(idx: np.ndarray, depth: int) -> int:
        nonlocal depth_seen
        depth_seen = max(depth_seen, depth)
        yi = y[idx]
        wi = w[idx]
        node = store.add(float((wi * yi).sum() / wi.sum()))
        if depth >= max_depth or len(idx) < 2 * min_samples_leaf or np.all(yi == yi[0]):
            return node
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = np.arange(d)
        found = _best_split_gini(X[np.ix_(idx, feats)], yi, wi, min_samples_leaf)
        if found is None:
            return node
        j_local, threshold = found
        j = int(feats[j_local])
        go_left = X[idx, j] <= threshold
        store.feature[node] = j
        store.threshold[node] = threshold
        store.left[node] = build(idx[go_left], depth + 1)
        store.right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(n), 0)
    return store.finish(depth_seen)


def grow_regression_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    *,
    max_depth: int,
    min_samples_leaf: int = 1,
    reg_lambda: float = 1.0,
) -> FlatTree:
    """Second-order regression tree; leaf payload is the Newton step -G/(H+lambda)."""
    n = X.shape[0]
    store = _NodeStore()
    depth_seen = 0

    def build(idx: np.ndarray, depth: int) -> int:
        nonlocal depth_seen
        depth_seen = max(depth_seen, depth)
        gi = g[idx]
        hi = h[idx]
        node = store.add(float(-gi.sum() / (hi.sum() + reg_lambda)))
        if depth >= max_depth or len(idx) < 2 * min_samples_leaf:
            return node
        found = _best_split_newton(X[idx], gi, hi, reg_lambda, min_samples_leaf)
        if found is None:
            return node
        j, threshold = found
        go_left = X[idx, j] <= threshold
        store.feature[node] = j
        store.threshold[node] = threshold
        store.left[node] = build(idx[go_left], depth + 1)
        store.right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(n), 0)
    return store.finish(depth_seen)


def average_path_adjustment(n: int) -> float:
    """Expected unsuccessful-search path length c(n) = 2 H(n-1) - 2 (n-1)/n."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    return 2.0 * (math.log(n - 1) + _EULER_GAMMA) - 2.0 * (n - 1) / n


def grow_isolation_tree(X: np.ndarray, *, height_limit: int, rng: np.random.Generator) -> FlatTree:
    """Random-split isolation tree; leaf payload is depth + c(leaf size).

    Split features are drawn among columns that still vary within the node,
    thresholds uniformly between the column min and max; rows with
    x < threshold go left.
    """
    store = _NodeStore()
    depth_seen = 0

    def build(idx: np.ndarray, depth: int) -> int:
        nonlocal depth_seen
        depth_seen = max(depth_seen, depth)
        size = len(idx)
        if size <= 1 or depth >= height_limit:
            return store.add(depth + average_path_adjustment(size))
        sub = X[idx]
        lo = sub.min(axis=0)
        hi = sub.max(axis=0)
        varying = np.flatnonzero(hi > lo)
        if len(varying) == 0:
            return store.add(depth + average_path_adjustment(size))
        j = int(rng.choice(varying))
        threshold = float(rng.uniform(lo[j], hi[j]))
        go_left = sub[:, j] < threshold
        node = store.add(0.0)
        store.feature[node] = j
        # traversal tests x <= threshold; mirror the strict < by nudging down
        store.threshold[node] = np.nextafter(threshold, -np.inf)
        store.left[node] = build(idx[go_left], depth + 1)
        store.right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(X.shape[0]), 0)
    return store.finish(depth_seen)
