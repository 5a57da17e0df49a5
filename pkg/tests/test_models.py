import numpy as np
import pytest

from fraudxplain.data import Dataset, generate_synthetic
from fraudxplain.models import (
    DEFAULT_HYPERPARAMETERS,
    MODEL_KINDS,
    ModelSpec,
    load_model,
    save_model,
    train,
)
from fraudxplain.models.base import batch_evaluate, predict_binary
from fraudxplain.models.nn import (
    DenseNet,
    _bce_loss_and_delta,
    _mse_loss_and_delta,
    gradient_check,
)


class TestSpecDefaults:
    def test_paper_pinned_defaults(self):
        gbt = DEFAULT_HYPERPARAMETERS["GradientBoosting"]
        assert (gbt["n_estimators"], gbt["max_depth"], gbt["learning_rate"]) == (100, 12, 0.002)
        assert DEFAULT_HYPERPARAMETERS["RandomForest"]["n_estimators"] == 100
        for kind in ("NeuralNetwork", "Autoencoder"):
            prof = DEFAULT_HYPERPARAMETERS[kind]
            assert prof["hidden"] == [50, 50, 50]
            assert prof["activation"] == "relu"
            assert prof["optimizer"] == "adam"
        assert DEFAULT_HYPERPARAMETERS["Autoencoder"]["loss"] == "mse"
        iso = DEFAULT_HYPERPARAMETERS["IsolationForest"]
        assert iso["n_estimators"] == 100 and iso["contamination"] == "auto"

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown model kind"):
            ModelSpec("SupportVectorMachine").resolved_hyperparameters()

    def test_unknown_hyperparameter_rejected(self):
        with pytest.raises(ValueError, match="unknown hyperparameters"):
            ModelSpec("DecisionTree", {"max_leaves": 3}).resolved_hyperparameters()


class TestTrainContracts:
    def test_supervised_needs_labels(self, small_data):
        train_ds, _, _ = small_data
        unlabeled = Dataset(train_ds.matrix, None, train_ds.schema, train_ds.row_ids)
        with pytest.raises(ValueError, match="supervised"):
            train(ModelSpec("LogisticRegression"), unlabeled)

    def test_unsupervised_ignores_labels(self, small_data):
        train_ds, _, _ = small_data
        unlabeled = Dataset(train_ds.matrix, None, train_ds.schema, train_ds.row_ids)
        labeled = train(ModelSpec("IsolationForest", seed=2), train_ds)
        blind = train(ModelSpec("IsolationForest", seed=2), unlabeled)
        assert np.array_equal(labeled.score(train_ds.matrix), blind.score(train_ds.matrix))

    def test_gbt_defaults_shape(self, model_zoo):
        gbt = model_zoo["GradientBoosting"]
        assert len(gbt.trees) == 100
        assert max(t.depth for t in gbt.trees) <= 12
        assert gbt.learning_rate == 0.002

    def test_semantics_assignment(self, model_zoo):
        assert model_zoo["NaiveBayes"].semantics == "fraud_probability"
        assert model_zoo["Autoencoder"].semantics == "reconstruction_error"
        assert model_zoo["IsolationForest"].semantics == "anomaly_score"

    def test_probability_outputs_in_unit_interval(self, model_zoo, small_data):
        _, val_ds, _ = small_data
        for kind in ("NaiveBayes", "LogisticRegression", "DecisionTree", "RandomForest",
                     "GradientBoosting", "NeuralNetwork"):
            scores = batch_evaluate(model_zoo[kind], val_ds)
            assert np.all((scores >= 0) & (scores <= 1)), kind

    def test_determinism_bit_identical(self, small_data):
        train_ds, val_ds, _ = small_data
        for kind in MODEL_KINDS:
            a = train(ModelSpec(kind, seed=7), train_ds)
            b = train(ModelSpec(kind, seed=7), train_ds)
            assert np.array_equal(batch_evaluate(a, val_ds), batch_evaluate(b, val_ds)), kind

    def test_evaluate_is_pure(self, model_zoo, small_data):
        _, val_ds, _ = small_data
        x = val_ds.matrix[5]
        for kind, model in model_zoo.items():
            assert model.evaluate(x) == model.evaluate(x), kind


class TestPredictBinary:
    def test_threshold_rule(self, model_zoo):
        model = model_zoo["LogisticRegression"]
        assert model.threshold == 0.5

    def test_geq_convention_at_threshold(self):
        from fraudxplain.models.base import ScoreModel

        class Fixed(ScoreModel):
            def __init__(self, value):
                super().__init__()
                self.value = value
                self.n_features = 1

            def score(self, X):
                return np.full(np.asarray(X).shape[0], self.value)

        assert Fixed(0.7).predict_binary([0.0]) == 1
        assert Fixed(0.5).predict_binary([0.0]) == 1  # >= at the boundary
        assert Fixed(0.49).predict_binary([0.0]) == 0

    def test_probability_07_is_fraud(self, model_zoo, small_data):
        _, val_ds, _ = small_data
        model = model_zoo["LogisticRegression"]
        scores = batch_evaluate(model, val_ds)
        hot = int(np.argmax(scores))
        if scores[hot] >= 0.5:
            assert predict_binary(model, val_ds.matrix[hot]) == 1

    def test_autoencoder_quantile_threshold(self, model_zoo, small_data):
        # error at the 99th training percentile exceeds the 96.5% cutoff
        train_ds, _, _ = small_data
        ae = model_zoo["Autoencoder"]
        errors = ae.score(train_ds.matrix)
        assert ae.threshold == pytest.approx(np.quantile(errors, 1 - 0.035))
        p99 = np.quantile(errors, 0.99)
        assert int(p99 >= ae.threshold) == 1


class TestBatchEvaluate:
    def test_empty(self, model_zoo, small_data):
        train_ds, _, _ = small_data
        empty = train_ds.matrix[:0]
        assert batch_evaluate(model_zoo["NaiveBayes"], empty).shape == (0,)

    def test_single_row_matches_evaluate(self, model_zoo, small_data):
        _, val_ds, _ = small_data
        x = val_ds.matrix[0]
        for kind, model in model_zoo.items():
            vec = batch_evaluate(model, val_ds.matrix[:1])
            assert vec.shape == (1,)
            assert vec[0] == model.evaluate(x), kind

    def test_matches_elementwise_loop(self, model_zoo, small_data):
        _, val_ds, _ = small_data
        sub = val_ds.matrix[:100]
        for kind, model in model_zoo.items():
            vec = batch_evaluate(model, sub)
            loop = np.array([model.evaluate(row) for row in sub])
            # BLAS reassociates sums across batch shapes, so allow ulp-level slack
            assert np.allclose(vec, loop, atol=1e-12, rtol=1e-12), kind

    def test_feature_mismatch(self, model_zoo, small_data):
        _, val_ds, _ = small_data
        with pytest.raises(ValueError, match="features"):
            batch_evaluate(model_zoo["NaiveBayes"], val_ds.matrix[:, :3])


class TestNaiveBayes:
    def test_single_class_degenerate_prior(self, small_data):
        train_ds, val_ds, _ = small_data
        fraud_only = train_ds.take(np.flatnonzero(train_ds.labels == 1))
        model = train(ModelSpec("NaiveBayes"), fraud_only)
        assert np.all(batch_evaluate(model, val_ds) == 1.0)


class TestLogistic:
    def test_sign_recovery_on_synthetic(self):
        dataset, truth = generate_synthetic(10000, 8, 0, 0.05, seed=21)
        model = train(ModelSpec("LogisticRegression"), dataset)
        for name, w in truth.weights.items():
            if abs(w) < truth.detectability_floor:
                continue
            j = dataset.feature_names.index(name)
            assert np.sign(model.coef_[j]) == np.sign(w), name

    def test_iteration_budget_respected(self, model_zoo):
        assert model_zoo["LogisticRegression"].n_iter_ <= 500


class TestDecisionTreeXor:
    def test_xor_layout_from_exhaustive_enumeration(self):
        # oracle: no depth-1 cut separates XOR, a depth-2 tree does
        matrix = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        labels = np.array([0, 1, 1, 0])
        schema_ds, _ = generate_synthetic(100, 2, 0, 0.1, seed=0, n_informative=1)
        ds = Dataset(matrix, labels, schema_ds.schema, np.arange(4))
        model = train(ModelSpec("DecisionTree", {"max_depth": 2, "min_samples_leaf": 1}), ds)
        preds = (batch_evaluate(model, ds) >= 0.5).astype(int)
        assert np.array_equal(preds, labels)
        assert model.tree.depth >= 2


class TestGradientChecks:
    def test_classifier_gradients(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(10, 8))
        y = rng.integers(0, 2, 10).astype(float)
        net = DenseNet([8, 50, 50, 50, 1], seed=1)
        assert gradient_check(net, X, y, _bce_loss_and_delta) < 1e-4

    def test_autoencoder_gradients(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(10, 8))
        net = DenseNet([8, 50, 50, 50, 8], seed=1)
        assert gradient_check(net, X, X, _mse_loss_and_delta) < 1e-4


class TestAnomalyModels:
    def test_autoencoder_separates_point_outliers(self):
        dataset, _ = generate_synthetic(3000, 10, 0, 0.05, seed=8, latent_rank=3)
        matrix = dataset.matrix.copy()
        outliers = np.arange(0, 60)
        matrix[outliers, 4] += 10.0  # ten training stds on a unit-variance column
        shifted = Dataset(matrix, dataset.labels, dataset.schema, dataset.row_ids)
        model = train(ModelSpec("Autoencoder", seed=3), shifted)
        errors = model.score(matrix)
        inliers = np.setdiff1d(np.arange(len(matrix)), outliers)
        assert errors[outliers].mean() > errors[inliers].mean()

    def test_isolation_forest_flags_far_point(self):
        rng = np.random.default_rng(4)
        matrix = np.vstack([rng.normal(0, 1, size=(500, 4)), np.full((1, 4), 10.0)])
        ds, _ = generate_synthetic(100, 4, 0, 0.1, seed=0, n_informative=2)
        data = Dataset(matrix, None, ds.schema, np.arange(501))
        model = train(ModelSpec("IsolationForest", seed=2), data)
        scores = model.score(matrix)
        assert scores.argmax() == 500

    def test_divergence_reported_with_step(self, small_data):
        train_ds, _, _ = small_data
        with np.errstate(all="ignore"), pytest.raises(RuntimeError, match="step"):
            train(ModelSpec("NeuralNetwork", {"learning_rate": 1e80, "epochs": 2}), train_ds)


class TestPersistence:
    def test_roundtrip_bit_identical(self, model_zoo, small_data, tmp_path):
        _, val_ds, _ = small_data
        for kind, model in model_zoo.items():
            path = tmp_path / f"{kind}.fxm"
            save_model(model, path)
            loaded = load_model(path)
            assert np.array_equal(batch_evaluate(model, val_ds),
                                  batch_evaluate(loaded, val_ds)), kind

    def test_save_is_deterministic(self, model_zoo, tmp_path):
        model = model_zoo["RandomForest"]
        save_model(model, tmp_path / "a.fxm")
        save_model(model, tmp_path / "b.fxm")
        assert (tmp_path / "a.fxm").read_bytes() == (tmp_path / "b.fxm").read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.fxm"
        path.write_bytes(b"not a model")
        with pytest.raises(ValueError, match="magic"):
            load_model(path)
