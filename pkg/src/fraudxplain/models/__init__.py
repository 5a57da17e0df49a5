"""The eight trainable model kinds behind a single train() entry point."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset
from .base import (
    ANOMALY_SCORE,
    DEFAULT_CONTAMINATION,
    FRAUD_PROBABILITY,
    RECONSTRUCTION_ERROR,
    ScoreModel,
    batch_evaluate,
    predict_binary,
)
from .boosting import GradientBoostingModel
from .io import load_model, save_model
from .isolation import IsolationForestModel
from .logistic import LogisticRegressionModel
from .naive_bayes import NaiveBayesModel
from .nn import AutoencoderModel, DenseNet, NeuralNetworkModel, gradient_check
from .tree_models import DecisionTreeModel, RandomForestModel

MODEL_CLASSES: dict[str, type[ScoreModel]] = {
    "NaiveBayes": NaiveBayesModel,
    "LogisticRegression": LogisticRegressionModel,
    "DecisionTree": DecisionTreeModel,
    "RandomForest": RandomForestModel,
    "GradientBoosting": GradientBoostingModel,
    "NeuralNetwork": NeuralNetworkModel,
    "Autoencoder": AutoencoderModel,
    "IsolationForest": IsolationForestModel,
}

MODEL_KINDS = tuple(MODEL_CLASSES)
UNSUPERVISED_KINDS = ("Autoencoder", "IsolationForest")

DEFAULT_HYPERPARAMETERS: dict[str, dict] = {
    "NaiveBayes": {"class_weight": None},
    "LogisticRegression": {"l2": 1e-4, "max_iter": 500, "tol": 1e-6, "class_weight": None},
    "DecisionTree": {"max_depth": 8, "min_samples_leaf": 50, "class_weight": None},
    "RandomForest": {"n_estimators": 100, "max_depth": 16, "min_samples_leaf": 1,
                     "class_weight": None},
    "GradientBoosting": {"n_estimators": 100, "max_depth": 12, "learning_rate": 0.002,
                         "min_samples_leaf": 20, "reg_lambda": 1.0, "class_weight": None},
    "NeuralNetwork": {"hidden": [50, 50, 50], "activation": "relu", "optimizer": "adam",
                      "learning_rate": 1e-3, "beta1": 0.9, "beta2": 0.999,
                      "batch_size": 128, "epochs": 100, "class_weight": None},
    "Autoencoder": {"hidden": [50, 50, 50], "activation": "relu", "optimizer": "adam",
                    "loss": "mse", "learning_rate": 1e-3, "beta1": 0.9, "beta2": 0.999,
                    "batch_size": 128, "epochs": 100, "contamination": DEFAULT_CONTAMINATION},
    "IsolationForest": {"n_estimators": 100, "max_samples": 256, "contamination": "auto"},
}


@dataclass
class ModelSpec:
    """What to train: a model kind, its hyperparameters, and the seed."""

    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def resolved_hyperparameters(self) -> dict:
        if self.kind not in DEFAULT_HYPERPARAMETERS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        merged = dict(DEFAULT_HYPERPARAMETERS[self.kind])
        unknown = set(self.hyperparameters) - set(merged)
        if unknown:
            raise ValueError(f"unknown hyperparameters for {self.kind}: {sorted(unknown)}")
        merged.update(self.hyperparameters)
        return merged


def train(spec: ModelSpec, train_data: Dataset) -> ScoreModel:
    """Train one model; deterministic for a fixed spec (seed included).

    Supervised kinds require labels; Autoencoder and IsolationForest ignore
    them. The returned model is immutable and safe for concurrent scoring.
    """
    hyper = spec.resolved_hyperparameters()
    X = train_data.matrix
    y = train_data.labels
    if spec.kind not in UNSUPERVISED_KINDS and y is None:
        raise ValueError(f"{spec.kind} is supervised and needs a labeled dataset")

    if spec.kind == "NaiveBayes":
        return NaiveBayesModel.fit(X, y, train_data.schema, class_weight=hyper["class_weight"])
    if spec.kind == "LogisticRegression":
        return LogisticRegressionModel.fit(
            X, y, l2=hyper["l2"], max_iter=hyper["max_iter"], tol=hyper["tol"],
            class_weight=hyper["class_weight"])
    if spec.kind == "DecisionTree":
        return DecisionTreeModel.fit(
            X, y, max_depth=hyper["max_depth"], min_samples_leaf=hyper["min_samples_leaf"],
            class_weight=hyper["class_weight"])
    if spec.kind == "RandomForest":
        return RandomForestModel.fit(
            X, y, n_estimators=hyper["n_estimators"], max_depth=hyper["max_depth"],
            min_samples_leaf=hyper["min_samples_leaf"], seed=spec.seed,
            class_weight=hyper["class_weight"])
    if spec.kind == "GradientBoosting":
        return GradientBoostingModel.fit(
            X, y, n_estimators=hyper["n_estimators"], max_depth=hyper["max_depth"],
            learning_rate=hyper["learning_rate"], min_samples_leaf=hyper["min_samples_leaf"],
            reg_lambda=hyper["reg_lambda"], class_weight=hyper["class_weight"])
    if spec.kind == "NeuralNetwork":
        return NeuralNetworkModel.fit(
            X, y, hidden=tuple(hyper["hidden"]), learning_rate=hyper["learning_rate"],
            beta1=hyper["beta1"], beta2=hyper["beta2"], batch_size=hyper["batch_size"],
            epochs=hyper["epochs"], seed=spec.seed, class_weight=hyper["class_weight"])
    if spec.kind == "Autoencoder":
        return AutoencoderModel.fit(
            X, hidden=tuple(hyper["hidden"]), learning_rate=hyper["learning_rate"],
            beta1=hyper["beta1"], beta2=hyper["beta2"], batch_size=hyper["batch_size"],
            epochs=hyper["epochs"], seed=spec.seed, contamination=hyper["contamination"])
    if spec.kind == "IsolationForest":
        return IsolationForestModel.fit(
            X, n_estimators=hyper["n_estimators"], max_samples=hyper["max_samples"],
            contamination=hyper["contamination"], seed=spec.seed)
    raise ValueError(f"unknown model kind {spec.kind!r}")
