from pathlib import Path

import numpy as np
import pytest

from suri.data import Dataset, PreprocessConfig, binarize_heart_labels, load_csv, preprocess, raw_label_values

DATA_DIR = Path(__file__).parent / "data"
HEART_CSV = DATA_DIR / "heart_cleveland.csv"
HEART_RAW_CSV = DATA_DIR / "heart_cleveland_raw.csv"


def make_xor(n_samples=2000, seed=0):
    """y = x0 xor x1 with x0, x1 fair coins; x2 is Gaussian noise."""
    rng = np.random.default_rng(seed)
    x0 = rng.integers(0, 2, n_samples)
    x1 = rng.integers(0, 2, n_samples)
    x2 = rng.normal(size=n_samples)
    return Dataset(np.column_stack([x0, x1, x2]), x0 ^ x1, ("x0", "x1", "noise"))


def prepared(d, seed=0):
    return preprocess(d, PreprocessConfig(rng_seed=seed))


@pytest.fixture(scope="session")
def xor_raw():
    return make_xor()


@pytest.fixture(scope="session")
def xor_data(xor_raw):
    return prepared(xor_raw)


@pytest.fixture(scope="session")
def heart_raw():
    if not HEART_CSV.exists():
        pytest.skip("heart disease CSV not available")
    d = load_csv(HEART_CSV, "num")
    return d.with_labels(binarize_heart_labels(raw_label_values(d)), {0: "0", 1: "1"})


@pytest.fixture(scope="session")
def heart_data(heart_raw):
    return prepared(heart_raw)


@pytest.fixture(scope="session")
def breast_cancer_raw():
    datasets = pytest.importorskip("sklearn.datasets")
    bc = datasets.load_breast_cancer()
    return Dataset(bc.data, bc.target, tuple(s.replace(" ", "_") for s in bc.feature_names))
