import numpy as np
import pytest

from convgen.data import Dataset


def two_blob_dataset(seed: int = 7, n_majority: int = 60, n_minority: int = 12,
                     separation: float = 2.0) -> Dataset:
    """2-D Gaussian blobs: majority at the origin, minority offset."""
    rng = np.random.default_rng(seed)
    majority = rng.normal(0.0, 1.0, size=(n_majority, 2))
    minority = rng.normal(separation, 0.6, size=(n_minority, 2))
    features = np.vstack([majority, minority])
    labels = np.array([0] * n_majority + [1] * n_minority)
    return Dataset(features, labels, "toy-blobs")


@pytest.fixture
def toy_dataset() -> Dataset:
    return two_blob_dataset()


@pytest.fixture(scope="session")
def abalone_path() -> str:
    return "datasets/abalone9-18.csv"


@pytest.fixture(scope="session")
def yeast_path() -> str:
    return "datasets/yeast6.csv"
