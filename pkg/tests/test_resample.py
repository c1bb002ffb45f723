"""Imputation, oversampling baselines, label propagation, graph augmentation."""

import numpy as np
import pytest

from fairsim.dataset import MISSING, ColumnSchema, TabularDataset
from fairsim.errors import ValidationError
from fairsim.kernels import KernelParams
from fairsim.network import SimilarityNetwork, ThresholdPolicy, build_network
from fairsim.resample import (
    AugmentationPlan,
    graph_augment,
    group_balance_oversample,
    impute,
    smote_oversample,
    vector_label_propagation,
)
from fairsim.similarity import similarity_matrix
from tests.conftest import random_mixed_dataset


def _network_for(ds, q=0.7):
    return build_network(similarity_matrix(ds), ThresholdPolicy.quantile(q))


class TestImpute:
    def test_fills_every_missing_cell(self):
        ds = random_mixed_dataset(0, n_rows=15, missing_rate=0.25)
        assert ds.has_missing()
        filled, provenance = impute(ds, _network_for(ds))
        assert not filled.has_missing()
        missing_cells = {(i, col.name)
                         for i, row in enumerate(ds.rows)
                         for col, v in zip(ds.columns, row) if v is MISSING}
        assert set(provenance) == missing_cells
        assert set(provenance.values()) <= {"neighbors", "two_hop", "global"}

    def test_observed_cells_unchanged(self):
        ds = random_mixed_dataset(1, n_rows=15, missing_rate=0.25)
        filled, _ = impute(ds, _network_for(ds))
        for before, after in zip(ds.rows, filled.rows):
            for b, a in zip(before, after):
                if b is not MISSING:
                    assert a == b

    def test_idempotent_on_complete_data(self):
        ds = random_mixed_dataset(2, n_rows=15, missing_rate=0.25)
        filled, _ = impute(ds, _network_for(ds))
        again, provenance = impute(filled, _network_for(filled))
        assert again.rows == filled.rows
        assert provenance == {}

    def test_network_size_mismatch_rejected(self):
        ds = random_mixed_dataset(3, n_rows=10)
        small = random_mixed_dataset(3, n_rows=6)
        with pytest.raises(ValidationError):
            impute(ds, _network_for(small))

    def test_all_missing_column_rejected(self):
        cols = (ColumnSchema("a", "numeric"), ColumnSchema("b", "numeric"),
                ColumnSchema("y", "categorical"))
        rows = ((1.0, None, "p"), (2.0, None, "q"), (3.0, None, "p"))
        ds = TabularDataset(columns=cols, rows=rows, target="y")
        ds = ds.with_rows(ds.rows)
        with pytest.raises(ValidationError, match="'b'"):
            impute(ds, _network_for(ds))

    def test_two_hop_fallback(self):
        # path a-b-c: a misses the value, b misses it too, c observes it
        cols = (ColumnSchema("f", "numeric"), ColumnSchema("y", "categorical"))
        rows = ((None, "p"), (None, "q"), (7.0, "p"))
        ds = TabularDataset(columns=cols, rows=rows, target="y")
        ds = ds.with_rows(ds.rows)
        net = SimilarityNetwork(
            n_nodes=3, edges=((0, 1, 1.0), (1, 2, 1.0)),
            components=((0, 1, 2),))
        filled, provenance = impute(ds, net)
        assert filled.rows[0][0] == 7.0
        assert provenance[(0, "f")] == "two_hop"
        assert provenance[(1, "f")] == "neighbors"


class TestPlans:
    def test_target_below_current_rejected(self):
        ds = random_mixed_dataset(4, n_rows=20)
        counts = {}
        for v in ds.target_values:
            counts[v] = counts.get(v, 0) + 1
        low = {max(counts, key=counts.get): 1}
        with pytest.raises(ValidationError):
            smote_oversample(ds, AugmentationPlan("smote", target_counts=low))


class TestSmote:
    def test_balances_to_majority(self):
        ds = random_mixed_dataset(5, n_rows=30)
        out, provenance = smote_oversample(ds)
        counts = {}
        for v in out.target_values:
            counts[v] = counts.get(v, 0) + 1
        assert len(set(counts.values())) == 1
        assert provenance[:ds.n_rows] == ["original"] * ds.n_rows
        assert set(provenance[ds.n_rows:]) == {"smote"}

    def test_synthetic_rows_stay_in_class_hull(self):
        ds = random_mixed_dataset(6, n_rows=30, n_classes=3)
        out, provenance = smote_oversample(ds)
        for idx in range(ds.n_rows, out.n_rows):
            row = out.rows[idx]
            label = row[out.column_index(out.target)]
            members = [r for r, v in zip(ds.rows, ds.target_values) if v == label]
            for j, col in enumerate(out.columns):
                vals = [r[j] for r in members]
                if col.kind == "numeric":
                    assert min(vals) <= row[j] <= max(vals)
                else:
                    assert row[j] in vals

    def test_single_member_class_rejected(self):
        cols = (ColumnSchema("f", "numeric"), ColumnSchema("y", "categorical"))
        rows = ((1.0, "a"), (2.0, "a"), (3.0, "b"))
        ds = TabularDataset(columns=cols, rows=rows, target="y")
        with pytest.raises(ValidationError, match="single member"):
            smote_oversample(ds.with_rows(ds.rows))


class TestGroupBalance:
    def test_equalizes_group_sizes(self):
        ds = random_mixed_dataset(7, n_rows=30)
        out, provenance = group_balance_oversample(ds, "cat0")
        groups = out.column_values("cat0")
        counts = {}
        for g in groups:
            counts[g] = counts.get(g, 0) + 1
        assert len(set(counts.values())) == 1
        assert set(provenance[ds.n_rows:]) == {"group"}

    def test_jitter_stays_small(self):
        ds = random_mixed_dataset(8, n_rows=30)
        out, _ = group_balance_oversample(ds, "cat0")
        for col in ds.columns:
            if col.kind != "numeric":
                continue
            lo, hi = col.observed_range
            sigma = 0.01 * (hi - lo)
            vals = out.column_values(col.name)[ds.n_rows:]
            assert all(lo - 6 * sigma <= v <= hi + 6 * sigma for v in vals)

    def test_numeric_column_rejected(self):
        ds = random_mixed_dataset(9, n_rows=10)
        with pytest.raises(ValidationError):
            group_balance_oversample(ds, "num0")

    def test_single_level_rejected(self):
        cols = (ColumnSchema("g", "categorical"), ColumnSchema("y", "categorical"))
        rows = (("a", "p"), ("a", "q"))
        ds = TabularDataset(columns=cols, rows=rows, target="y")
        with pytest.raises(ValidationError):
            group_balance_oversample(ds, "g")


class TestPropagation:
    def test_two_observed_neighbors(self):
        w = np.array([[0.0, 0.0, 3.0],
                      [0.0, 0.0, 1.0],
                      [3.0, 1.0, 0.0]])
        init = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        clamped = np.array([True, True, False])
        result = vector_label_propagation(w, init, clamped)
        assert result.converged
        assert np.allclose(result.distributions[2], [0.75, 0.25], atol=1e-9)
        assert result.labels[2] == 0

    def test_clamped_nodes_never_change(self):
        rng = np.random.default_rng(0)
        n = 12
        w = rng.uniform(0.1, 1.0, size=(n, n))
        w = (w + w.T) / 2
        np.fill_diagonal(w, 0.0)
        init = rng.dirichlet(np.ones(3), size=n)
        clamped = np.array([True] * 6 + [False] * 6)
        result = vector_label_propagation(w, init, clamped)
        assert np.array_equal(result.distributions[:6], init[:6])

    def test_distributions_stay_normalized(self):
        rng = np.random.default_rng(1)
        n = 10
        w = rng.uniform(0.1, 1.0, size=(n, n))
        w = (w + w.T) / 2
        np.fill_diagonal(w, 0.0)
        init = rng.dirichlet(np.ones(4), size=n)
        clamped = np.zeros(n, dtype=bool)
        clamped[:3] = True
        result = vector_label_propagation(w, init, clamped)
        assert np.allclose(result.distributions.sum(axis=1), 1.0)

    def test_isolated_free_node_rejected(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 1.0
        init = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        clamped = np.array([True, True, False])
        with pytest.raises(ValidationError):
            vector_label_propagation(w, init, clamped)

    def test_custom_class_names(self):
        w = np.array([[0.0, 1.0], [1.0, 0.0]])
        init = np.array([[1.0, 0.0], [0.2, 0.8]])
        clamped = np.array([True, False])
        result = vector_label_propagation(w, init, clamped, classes=["lo", "hi"])
        assert result.labels == ["lo", "lo"]


class TestGraphAugment:
    def test_balances_classes_and_keeps_originals(self):
        ds = random_mixed_dataset(10, n_rows=40, n_classes=2)
        net = _network_for(ds)
        out, provenance = graph_augment(ds, net, KernelParams(),
                                        AugmentationPlan("graph", seed=0))
        assert out.rows[:ds.n_rows] == ds.rows
        assert provenance[:ds.n_rows] == ["original"] * ds.n_rows
        assert set(provenance[ds.n_rows:]) <= {"graph"}
        counts = {}
        for v in out.target_values:
            counts[v] = counts.get(v, 0) + 1
        assert max(counts.values()) - min(counts.values()) <= max(
            c for c in counts.values()) * 0.2 + 1

    def test_synthetic_cells_complete(self):
        ds = random_mixed_dataset(11, n_rows=30, n_classes=2)
        out, _ = graph_augment(ds, _network_for(ds))
        for row in out.rows[ds.n_rows:]:
            assert all(v is not MISSING for v in row)

    def test_network_size_mismatch_rejected(self):
        ds = random_mixed_dataset(12, n_rows=10)
        small = random_mixed_dataset(12, n_rows=6)
        with pytest.raises(ValidationError):
            graph_augment(ds, _network_for(small))

    def test_deterministic_given_seed(self):
        ds = random_mixed_dataset(13, n_rows=25, n_classes=2)
        net = _network_for(ds)
        one, _ = graph_augment(ds, net, plan=AugmentationPlan("graph", seed=4))
        two, _ = graph_augment(ds, net, plan=AugmentationPlan("graph", seed=4))
        assert one.rows == two.rows
