"""Fraud-detection models, model-agnostic attributions, and reliability studies."""

__version__ = "0.1.0"

from .data import Dataset, Schema, generate_synthetic, split
from .models import ModelSpec, train

__all__ = ["Dataset", "Schema", "ModelSpec", "generate_synthetic", "split", "train",
           "__version__"]
