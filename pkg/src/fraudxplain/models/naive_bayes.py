"""Naive Bayes with Gaussian numeric and Laplace-smoothed categorical likelihoods."""

from __future__ import annotations

import numpy as np

from .base import FRAUD_PROBABILITY, ScoreModel

_VAR_SMOOTHING = 1e-9


class NaiveBayesModel(ScoreModel):
    kind = "NaiveBayes"
    semantics = FRAUD_PROBABILITY

    def __init__(self, numeric_idx, categorical_idx, n_codes, class_log_prior,
                 means, variances, cat_log_prob, classes, n_features):
        super().__init__()
        self.numeric_idx = np.asarray(numeric_idx, dtype=np.int64)
        self.categorical_idx = np.asarray(categorical_idx, dtype=np.int64)
        self.n_codes = np.asarray(n_codes, dtype=np.int64)
        self.class_log_prior = np.asarray(class_log_prior, dtype=float)
        self.means = np.asarray(means, dtype=float)
        self.variances = np.asarray(variances, dtype=float)
        # one (n_classes, n_codes) table per categorical column
        self.cat_log_prob = [np.asarray(t, dtype=float) for t in cat_log_prob]
        self.classes = np.asarray(classes, dtype=np.int64)
        self.n_features = int(n_features)
        self.threshold = 0.5

    @classmethod
    def fit(cls, X, y, schema, class_weight=None):
        is_cat = schema.column_kinds()
        numeric_idx = np.flatnonzero(~is_cat)
        categorical_idx = np.flatnonzero(is_cat)
        n_codes = np.array(
            [schema.n_codes(schema.columns[j][0]) for j in categorical_idx], dtype=np.int64
        )
        classes = np.unique(y)
        n_classes = len(classes)

        if class_weight == "balanced":
            priors = np.full(n_classes, 1.0 / n_classes)
        else:
            priors = np.array([(y == c).mean() for c in classes])

        Xn = X[:, numeric_idx]
        means = np.zeros((n_classes, len(numeric_idx)))
        variances = np.zeros((n_classes, len(numeric_idx)))
        for k, c in enumerate(classes):
            rows = Xn[y == c]
            means[k] = rows.mean(axis=0)
            variances[k] = rows.var(axis=0)
        max_var = variances.max() if variances.size else 1.0
        variances += _VAR_SMOOTHING * max(max_var, 1.0)

        cat_log_prob = []
        for j, codes_total in zip(categorical_idx, n_codes):
            col = X[:, j].astype(np.int64)
            table = np.zeros((n_classes, codes_total))
            for k, c in enumerate(classes):
                counts = np.bincount(col[y == c], minlength=codes_total).astype(float)
                table[k] = np.log((counts + 1.0) / (counts.sum() + codes_total))
            cat_log_prob.append(table)

        return cls(numeric_idx, categorical_idx, n_codes, np.log(priors),
                   means, variances, cat_log_prob, classes, X.shape[1])

    def _joint_log_likelihood(self, X):
        n = X.shape[0]
        jll = np.tile(self.class_log_prior, (n, 1))
        if len(self.numeric_idx):
            Xn = X[:, self.numeric_idx]
            for k in range(len(self.classes)):
                diff = Xn - self.means[k]
                jll[:, k] += -0.5 * np.sum(
                    np.log(2 * np.pi * self.variances[k]) + diff**2 / self.variances[k], axis=1
                )
        for j, table in zip(self.categorical_idx, self.cat_log_prob):
            codes = np.clip(X[:, j].astype(np.int64), 0, table.shape[1] - 1)
            jll += table[:, codes].T
        return jll

    def score(self, X):
        X = np.asarray(X, dtype=float)
        if 1 not in self.classes:
            return np.zeros(X.shape[0])
        if 0 not in self.classes:
            return np.ones(X.shape[0])
        jll = self._joint_log_likelihood(X)
        top = jll.max(axis=1, keepdims=True)
        probs = np.exp(jll - top)
        probs /= probs.sum(axis=1, keepdims=True)
        return probs[:, list(self.classes).index(1)]

    def config(self):
        return {
            "n_features": self.n_features,
            "threshold": self.threshold,
            "n_cat_tables": len(self.cat_log_prob),
        }

    def arrays(self):
        out = {
            "numeric_idx": self.numeric_idx,
            "categorical_idx": self.categorical_idx,
            "n_codes": self.n_codes,
            "class_log_prior": self.class_log_prior,
            "means": self.means,
            "variances": self.variances,
            "classes": self.classes,
        }
        for i, table in enumerate(self.cat_log_prob):
            out[f"cat_log_prob_{i}"] = table
        return out

    @classmethod
    def from_state(cls, config, arrays):
        tables = [arrays[f"cat_log_prob_{i}"] for i in range(config["n_cat_tables"])]
        model = cls(arrays["numeric_idx"], arrays["categorical_idx"], arrays["n_codes"],
                    arrays["class_log_prior"], arrays["means"], arrays["variances"],
                    tables, arrays["classes"], config["n_features"])
        model.threshold = config["threshold"]
        return model
