import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))   # makes oracles importable

from cgain.data import Dataset, ColumnSpec, IncompleteDataset, build_dataset


def toy_dataset(n=12, d=4, seed=0, binary_col=True, n_classes=2, name="toy") -> Dataset:
    """Small random dataset with an optional binary column, built on raw scale."""
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.0, 10.0, size=(n, d))
    if binary_col:
        raw[:, -1] = rng.integers(0, 2, size=n)
    labels = [str(int(c)) for c in rng.integers(0, n_classes, size=n)]
    # make sure every class appears at least twice
    for c in range(n_classes):
        if 2 * c + 1 < n:
            labels[2 * c] = str(c)
            labels[2 * c + 1] = str(c)
    names = [f"c{j}" for j in range(d)]
    return build_dataset(raw, labels, names, name=name)


@pytest.fixture
def dataset() -> Dataset:
    return toy_dataset()


def random_incomplete(dataset: Dataset, rate=0.3, seed=1) -> IncompleteDataset:
    from cgain.data import corrupt_mcar
    from cgain.nn import make_rng
    return corrupt_mcar(dataset, rate, make_rng(seed))
