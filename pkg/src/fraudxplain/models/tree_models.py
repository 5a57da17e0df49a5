"""Single CART classifier and bootstrap random forest."""

from __future__ import annotations

import numpy as np

from ._tree import FlatTree, grow_classification_tree, predict_value
from .base import FRAUD_PROBABILITY, ScoreModel


def _class_sample_weight(y, class_weight):
    if class_weight != "balanced":
        return None
    pos = y.mean()
    return np.where(y == 1, 0.5 / pos, 0.5 / (1 - pos))


def _pack_forest(trees):
    """Concatenate per-tree node arrays; offsets let us slice them back."""
    offsets = np.cumsum([0] + [t.n_nodes for t in trees]).astype(np.int64)
    return {
        "feature": np.concatenate([t.feature for t in trees]),
        "threshold": np.concatenate([t.threshold for t in trees]),
        "left": np.concatenate([t.left for t in trees]),
        "right": np.concatenate([t.right for t in trees]),
        "value": np.concatenate([t.value for t in trees]),
        "offsets": offsets,
        "depths": np.array([t.depth for t in trees], dtype=np.int64),
    }


def _unpack_forest(arrays):
    # children indices are tree-local, so slicing restores each tree directly
    offsets = arrays["offsets"]
    depths = arrays["depths"]
    trees = []
    for i in range(len(offsets) - 1):
        sl = slice(offsets[i], offsets[i + 1])
        trees.append(
            FlatTree(
                feature=arrays["feature"][sl],
                threshold=arrays["threshold"][sl],
                left=arrays["left"][sl],
                right=arrays["right"][sl],
                value=arrays["value"][sl],
                depth=int(depths[i]),
            )
        )
    return trees


class DecisionTreeModel(ScoreModel):
    kind = "DecisionTree"
    semantics = FRAUD_PROBABILITY

    def __init__(self, tree: FlatTree, n_features: int):
        super().__init__()
        self.tree = tree
        self.n_features = int(n_features)
        self.threshold = 0.5

    @classmethod
    def fit(cls, X, y, max_depth=8, min_samples_leaf=1, class_weight=None):
        tree = grow_classification_tree(
            X, y, max_depth=max_depth, min_samples_leaf=min_samples_leaf,
            sample_weight=_class_sample_weight(y, class_weight),
        )
        return cls(tree, X.shape[1])

    def score(self, X):
        return predict_value(self.tree, np.asarray(X, dtype=float))

    def config(self):
        return {"n_features": self.n_features, "threshold": self.threshold,
                "depth": self.tree.depth}

    def arrays(self):
        return {"feature": self.tree.feature, "threshold_arr": self.tree.threshold,
                "left": self.tree.left, "right": self.tree.right, "value": self.tree.value}

    @classmethod
    def from_state(cls, config, arrays):
        tree = FlatTree(arrays["feature"], arrays["threshold_arr"], arrays["left"],
                        arrays["right"], arrays["value"], int(config["depth"]))
        model = cls(tree, config["n_features"])
        model.threshold = config["threshold"]
        return model


class RandomForestModel(ScoreModel):
    """Bootstrap forest, sqrt(d) features per split, mean of tree probabilities."""

    kind = "RandomForest"
    semantics = FRAUD_PROBABILITY

    def __init__(self, trees: list[FlatTree], n_features: int):
        super().__init__()
        self.trees = trees
        self.n_features = int(n_features)
        self.threshold = 0.5

    @classmethod
    def fit(cls, X, y, n_estimators=100, max_depth=16, min_samples_leaf=1,
            seed=0, class_weight=None):
        n, d = X.shape
        max_features = max(1, int(round(np.sqrt(d))))
        weight = _class_sample_weight(y, class_weight)
        trees = []
        for child in np.random.SeedSequence(seed).spawn(n_estimators):
            rng = np.random.default_rng(child)
            bootstrap = rng.integers(0, n, size=n)
            trees.append(
                grow_classification_tree(
                    X[bootstrap], y[bootstrap], max_depth=max_depth,
                    min_samples_leaf=min_samples_leaf, max_features=max_features,
                    rng=rng,
                    sample_weight=None if weight is None else weight[bootstrap],
                )
            )
        return cls(trees, d)

    def score(self, X):
        X = np.asarray(X, dtype=float)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += predict_value(tree, X)
        return total / len(self.trees)

    def config(self):
        return {"n_features": self.n_features, "threshold": self.threshold}

    def arrays(self):
        return _pack_forest(self.trees)

    @classmethod
    def from_state(cls, config, arrays):
        model = cls(_unpack_forest(arrays), config["n_features"])
        model.threshold = config["threshold"]
        return model
