import json
import math

import numpy as np
import pytest

from fraudxplain.explain import (
    exact_shapley,
    kernel_shap,
    rank,
    shapley_kernel_weight,
)
from tests.test_exact_shapley import ConstantProbe, LinearProbe


class TestKernelWeight:
    def test_closed_form(self):
        m, s = 6, 2
        assert shapley_kernel_weight(m, s) == pytest.approx(
            (m - 1) / (math.comb(m, s) * s * (m - s)))

    def test_extremes_infinite(self):
        assert shapley_kernel_weight(5, 0) == math.inf
        assert shapley_kernel_weight(5, 5) == math.inf


class TestFullEnumeration:
    def test_constant_model_dummy_axiom(self):
        model = ConstantProbe(3.25, 4)
        attr = kernel_shap(model, np.ones(4), np.zeros((10, 4)), n_coalitions="full")
        assert attr.phi == pytest.approx(np.zeros(4), abs=1e-12)
        assert attr.base_value == pytest.approx(3.25)

    def test_linear_model_closed_form(self):
        rng = np.random.default_rng(1)
        w = np.array([1.5, -2.0, 0.5, 3.0, -1.0])
        model = LinearProbe(w, bias=0.7)
        background = rng.normal(size=(40, 5))
        x = rng.normal(size=5)
        attr = kernel_shap(model, x, background, n_coalitions="full")
        expected = w * (x - background.mean(axis=0))
        assert attr.phi == pytest.approx(expected, abs=1e-6)

    def test_matches_exact_oracle_gbt(self, model_zoo, small_data):
        train_ds, val_ds, _ = small_data
        background = train_ds.matrix[:50]
        x = val_ds.matrix[7]
        model = model_zoo["GradientBoosting"]
        ks = kernel_shap(model, x, background, n_coalitions="full")
        ex = exact_shapley(model, x, background)
        assert ks.phi == pytest.approx(ex.phi, abs=1e-6)
        assert ks.diagnostics["enumerated"]

    def test_local_accuracy_constraint(self, model_zoo, small_data):
        train_ds, val_ds, _ = small_data
        model = model_zoo["NeuralNetwork"]
        attr = kernel_shap(model, val_ds.matrix[2], train_ds.matrix[:25], n_coalitions="full")
        assert attr.base_value + attr.phi.sum() == pytest.approx(attr.predicted_value, abs=1e-6)

    def test_full_cap_at_20_features(self):
        model = ConstantProbe(0.0, 21)
        with pytest.raises(ValueError, match="20"):
            kernel_shap(model, np.zeros(21), np.zeros((2, 21)), n_coalitions="full")


class TestSampling:
    def test_underdetermined_budget_rejected(self):
        model = ConstantProbe(0.0, 8)
        with pytest.raises(ValueError, match="M \\+ 2"):
            kernel_shap(model, np.zeros(8), np.zeros((2, 8)), n_coalitions=9)

    def test_deterministic_per_seed(self, model_zoo, small_data):
        train_ds, val_ds, _ = small_data
        model = model_zoo["RandomForest"]
        background = train_ds.matrix[:30]
        a = kernel_shap(model, val_ds.matrix[0], background, n_coalitions=60, seed=11)
        b = kernel_shap(model, val_ds.matrix[0], background, n_coalitions=60, seed=11)
        assert np.array_equal(a.phi, b.phi)
        assert json.dumps(a.to_json_dict()) == json.dumps(b.to_json_dict())

    def test_identical_backgrounds_bit_identical(self, model_zoo, small_data):
        train_ds, val_ds, _ = small_data
        model = model_zoo["NaiveBayes"]
        bg1 = train_ds.matrix[10:60].copy()
        bg2 = train_ds.matrix[10:60].copy()
        a = kernel_shap(model, val_ds.matrix[1], bg1, n_coalitions=80, seed=4)
        b = kernel_shap(model, val_ds.matrix[1], bg2, n_coalitions=80, seed=4)
        assert np.array_equal(a.phi, b.phi)

    def test_error_nonincreasing_in_budget(self, model_zoo, small_data):
        # mean per-feature error vs the oracle over 20 seeds, budgets 2^M/4, /2, /1
        train_ds, val_ds, _ = small_data
        model = model_zoo["NaiveBayes"]
        background = train_ds.matrix[:50]
        x = val_ds.matrix[9]
        oracle = exact_shapley(model, x, background).phi
        means = []
        for budget in (64, 128, 256):
            errs = [
                np.abs(kernel_shap(model, x, background, n_coalitions=budget, seed=s).phi
                       - oracle).max()
                for s in range(20)
            ]
            means.append(np.mean(errs))
        assert means[0] >= means[1] >= means[2] - 1e-12

    def test_sampled_keeps_local_accuracy(self, model_zoo, small_data):
        train_ds, val_ds, _ = small_data
        model = model_zoo["IsolationForest"]
        attr = kernel_shap(model, val_ds.matrix[4], train_ds.matrix[:20],
                           n_coalitions=40, seed=2)
        assert attr.base_value + attr.phi.sum() == pytest.approx(attr.predicted_value, abs=1e-9)


class TestEdgeCases:
    def test_zero_features(self):
        model = ConstantProbe(0.4, 0)
        attr = kernel_shap(model, np.zeros(0), np.zeros((3, 0)), n_coalitions="full")
        assert attr.phi.shape == (0,)
        assert attr.base_value == pytest.approx(0.4)

    def test_single_feature(self):
        model = LinearProbe([2.0], bias=0.0)
        attr = kernel_shap(model, np.array([1.5]), np.array([[0.5]]), n_coalitions="full")
        assert attr.phi[0] == pytest.approx(2.0 * (1.5 - 0.5))

    def test_empty_background_rejected(self):
        model = ConstantProbe(0.0, 2)
        with pytest.raises(ValueError, match="background"):
            kernel_shap(model, np.zeros(2), np.zeros((0, 2)))

    def test_json_schema_fields(self, model_zoo, small_data):
        train_ds, val_ds, _ = small_data
        attr = kernel_shap(model_zoo["LogisticRegression"], val_ds.matrix[0],
                           train_ds.matrix[:10], n_coalitions="full",
                           feature_names=train_ds.feature_names)
        payload = attr.to_json_dict()
        assert sorted(payload) == ["base_value", "diagnostics", "feature_names",
                                   "method", "phi", "predicted_value"]
        assert payload["feature_names"] == train_ds.feature_names


class TestRanking:
    def test_rank_by_absolute_value(self, small_data):
        train_ds, _, _ = small_data
        from fraudxplain.explain.attribution import rank_features

        ranked = rank_features(["f0", "f1", "f2"], [0.5, -0.9, 0.1], 2)
        assert ranked.names == ["f1", "f0"]

    def test_tie_prefers_lower_index(self):
        from fraudxplain.explain.attribution import rank_features

        ranked = rank_features(["a", "b", "c"], [0.5, -0.5, 0.7], 3)
        assert ranked.names == ["c", "a", "b"]

    def test_k_clamped(self):
        from fraudxplain.explain.attribution import rank_features

        ranked = rank_features(["a", "b"], [1.0, 2.0], 10)
        assert ranked.k == 2 and len(ranked.entries) == 2

    def test_scale_invariance(self, model_zoo, small_data):
        train_ds, val_ds, _ = small_data
        attr = kernel_shap(model_zoo["DecisionTree"], val_ds.matrix[0],
                           train_ds.matrix[:20], n_coalitions="full")
        base = rank(attr, 5).names
        attr.phi = attr.phi * 37.5
        assert rank(attr, 5).names == base
