import pytest

from fraudxplain.data import generate_synthetic, split
from fraudxplain.models import MODEL_KINDS, ModelSpec, train

SMALL_SEED = 11


@pytest.fixture(scope="session")
def small_data():
    """1600/400 split of an 8-feature mixed synthetic dataset."""
    dataset, truth = generate_synthetic(2000, 6, 2, 0.08, seed=SMALL_SEED)
    train_ds, val_ds = split(dataset, 0.2, seed=3)
    return train_ds, val_ds, truth


@pytest.fixture(scope="session")
def model_zoo(small_data):
    """All eight kinds trained once on the small dataset."""
    train_ds, _, _ = small_data
    return {kind: train(ModelSpec(kind, seed=5), train_ds) for kind in MODEL_KINDS}
