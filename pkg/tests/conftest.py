"""Shared fixtures and random-data factories for the test suite."""

import numpy as np
import pytest

from fairsim.dataset import (
    BinaryTargetRule,
    ColumnSchema,
    TabularDataset,
    binarize_target,
)
from fairsim.datagen import DEFAULT_GROUP_SPEC, synthetic_cv


@pytest.fixture(scope="session")
def cv():
    """Default synthetic benchmark table (301 rows, fixed seed)."""
    return synthetic_cv()


@pytest.fixture(scope="session")
def cv_binary(cv):
    """Benchmark table with the pay level binarized high-vs-rest."""
    return binarize_target(cv, BinaryTargetRule.category_partition("PayLevel", ["high"]))


@pytest.fixture(scope="session")
def group_spec():
    return DEFAULT_GROUP_SPEC


@pytest.fixture(scope="session")
def small_cv():
    """Small draw of the benchmark table for cheap module tests."""
    return synthetic_cv(n=60, seed=3)


def random_mixed_dataset(seed, n_rows=20, n_numeric=3, n_categorical=2,
                         missing_rate=0.0, n_classes=2):
    """Random mixed-type dataset with a categorical target."""
    rng = np.random.default_rng(seed)
    columns = (
        [ColumnSchema(f"num{j}", "numeric") for j in range(n_numeric)]
        + [ColumnSchema(f"cat{j}", "categorical") for j in range(n_categorical)]
        + [ColumnSchema("label", "categorical")]
    )
    rows = []
    for _ in range(n_rows):
        row = [float(np.round(rng.uniform(0, 10), 3)) for _ in range(n_numeric)]
        row += [f"v{int(rng.integers(3))}" for _ in range(n_categorical)]
        row.append(f"c{int(rng.integers(n_classes))}")
        rows.append(row)
    n_feat = n_numeric + n_categorical
    if missing_rate > 0:
        for row in rows:
            for j in range(1, n_feat):  # keep column 0 always observed
                if rng.uniform() < missing_rate:
                    row[j] = None
    ds = TabularDataset(columns=tuple(columns),
                        rows=tuple(tuple(r) for r in rows), target="label")
    return ds.with_rows(ds.rows)


def random_similarity(rng, n):
    """Random symmetric similarity matrix with unit diagonal in [0, 1]."""
    a = rng.uniform(0.05, 0.95, size=(n, n))
    s = (a + a.T) / 2.0
    np.fill_diagonal(s, 1.0)
    return s
