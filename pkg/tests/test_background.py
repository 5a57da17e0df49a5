import numpy as np
import pytest

from fraudxplain.data import Dataset, generate_synthetic
from fraudxplain.explain import BackgroundSpec, resolve_background


@pytest.fixture(scope="module")
def data():
    dataset, _ = generate_synthetic(10000, 5, 1, 0.05, seed=6)
    return dataset


class TestResolveBackground:
    def test_subsample_exact_distinct_rows(self, data):
        spec = resolve_background(BackgroundSpec("subsample", size=600, seed=1), data)
        assert spec.rows.shape == (600, 6)
        assert len(np.unique(spec.rows, axis=0)) == 600

    def test_fraud_only_rows_are_fraud(self, data):
        spec = resolve_background(BackgroundSpec("fraud_only"), data)
        fraud_matrix = data.matrix[data.labels == 1]
        assert np.array_equal(spec.rows, fraud_matrix)

    def test_normal_only_then_subsample(self, data):
        spec = resolve_background(BackgroundSpec("normal_only", size=50, seed=2), data)
        normal_set = {tuple(row) for row in data.matrix[data.labels == 0]}
        assert all(tuple(row) in normal_set for row in spec.rows)
        assert spec.rows.shape[0] == 50

    def test_deterministic_per_seed(self, data):
        a = resolve_background(BackgroundSpec("subsample", size=40, seed=9), data)
        b = resolve_background(BackgroundSpec("subsample", size=40, seed=9), data)
        assert np.array_equal(a.rows, b.rows)

    def test_all_strategy(self, data):
        spec = resolve_background(BackgroundSpec("all"), data)
        assert spec.rows.shape == data.matrix.shape

    def test_size_too_large(self, data):
        n_fraud = int((data.labels == 1).sum())
        with pytest.raises(ValueError, match="exceeds"):
            resolve_background(BackgroundSpec("fraud_only", size=n_fraud + 1, seed=0), data)

    def test_empty_filter(self, data):
        no_fraud = Dataset(data.matrix, np.zeros(data.n_rows, dtype=np.int64),
                           data.schema, data.row_ids)
        with pytest.raises(ValueError, match="no rows"):
            resolve_background(BackgroundSpec("fraud_only"), no_fraud)

    def test_label_filter_needs_labels(self, data):
        unlabeled = Dataset(data.matrix, None, data.schema, data.row_ids)
        with pytest.raises(ValueError, match="labeled"):
            resolve_background(BackgroundSpec("normal_only"), unlabeled)

    def test_custom_rows(self, data):
        rows = data.matrix[:7]
        spec = resolve_background(BackgroundSpec("custom", rows=rows), data)
        assert np.array_equal(spec.rows, rows)

    def test_custom_without_rows(self, data):
        with pytest.raises(ValueError, match="custom"):
            resolve_background(BackgroundSpec("custom"), data)

    def test_unknown_strategy(self, data):
        with pytest.raises(ValueError, match="strategy"):
            resolve_background(BackgroundSpec("median"), data)

    def test_subsample_requires_seed(self, data):
        with pytest.raises(ValueError, match="seed"):
            resolve_background(BackgroundSpec("subsample", size=10), data)
