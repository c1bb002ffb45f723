"""Baseline classifiers, stratified cross-validation and scoring.

Classifiers are realized with scikit-learn (random forest with Gini CART
trees, k-nearest-neighbor majority vote) behind a small spec object; fold
construction, weighted-F1 scoring and permutation feature importance are
implemented here so results are deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.neighbors import KNeighborsClassifier

from .dataset import MISSING, TabularDataset
from .errors import ValidationError


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "random_forest"  # "random_forest" | "knn"
    n_trees: int = 200
    max_depth: Optional[int] = None
    min_leaf: int = 1
    features_per_split: str | int = "sqrt"
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("random_forest", "knn"):
            raise ValidationError(f"unknown classifier kind {self.kind!r}")
        if self.n_trees < 1 or self.k_neighbors < 1:
            raise ValidationError("n_trees and k_neighbors must be >= 1")

    def build(self):
        if self.kind == "random_forest":
            return RandomForestClassifier(
                n_estimators=self.n_trees,
                max_depth=self.max_depth,
                min_samples_leaf=self.min_leaf,
                max_features=self.features_per_split,
                criterion="gini",
                random_state=self.seed,
                n_jobs=1,
            )
        return KNeighborsClassifier(n_neighbors=self.k_neighbors)


@dataclass
class ClassificationResult:
    per_fold: list  # (weighted_f1, fold test indices, fold predictions)
    mean: float
    std: float
    oof_predictions: np.ndarray

    def to_dict(self):
        return {
            "per_fold_f1": [round(f, 12) for f, _, _ in self.per_fold],
            "mean": self.mean,
            "std": self.std,
        }


def encode_features(dataset: TabularDataset) -> tuple[np.ndarray, list[str]]:
    """Original-representation feature matrix: one-hot categoricals (level
    order sorted), min-max scaled numerics. Rows must be complete."""
    if dataset.has_missing():
        raise ValidationError("encode_features needs a complete dataset; impute first")
    cols = dataset.feature_columns()
    rows = dataset.feature_rows()
    blocks = []
    names = []
    for j, col in enumerate(cols):
        vals = [row[j] for row in rows]
        if col.kind == "numeric":
            lo, hi = col.observed_range
            rng = hi - lo
            arr = np.array([float(v) for v in vals])
            blocks.append(((arr - lo) / rng if rng > 0 else np.zeros(len(arr)))[:, None])
            names.append(col.name)
        else:
            levels = sorted(set(vals), key=str)
            for lev in levels:
                blocks.append(np.array([1.0 if v == lev else 0.0 for v in vals])[:, None])
                names.append(f"{col.name}={lev}")
    return np.hstack(blocks), names


def weighted_f1(y_true, y_pred) -> float:
    """Support-weighted mean of per-class one-vs-rest F1 scores."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    classes = np.unique(y_true)
    total = 0.0
    for c in classes:
        tp = np.sum((y_pred == c) & (y_true == c))
        fp = np.sum((y_pred == c) & (y_true != c))
        fn = np.sum((y_pred != c) & (y_true == c))
        f1 = 0.0 if (2 * tp + fp + fn) == 0 else 2 * tp / (2 * tp + fp + fn)
        total += (y_true == c).sum() / len(y_true) * f1
    return float(total)


def stratified_folds(y, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified fold assignment: seeded shuffle within each
    class, then round-robin over folds."""
    y = np.asarray(y)
    if folds > len(y):
        raise ValidationError("more folds than rows")
    rng = np.random.default_rng(seed)
    assign = np.empty(len(y), dtype=int)
    offset = 0
    for c in sorted(np.unique(y).tolist(), key=str):
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            assign[i] = (offset + pos) % folds
        offset += len(idx)
    return [np.flatnonzero(assign == f) for f in range(folds)]


def train_predict(spec: ClassifierSpec, x_train, y_train, x_test) -> np.ndarray:
    x_train = np.asarray(x_train, dtype=float)
    y_train = np.asarray(y_train)
    if len(y_train) == 0:
        raise ValidationError("empty training set")
    model = spec.build()
    model.fit(x_train, y_train)
    return model.predict(np.asarray(x_test, dtype=float))


def cross_validate(spec: ClassifierSpec, x, y, folds=10, seed=0) -> ClassificationResult:
    """Stratified k-fold evaluation with out-of-fold predictions retained."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    fold_idx = stratified_folds(y, folds, seed)
    oof = np.empty(len(y), dtype=y.dtype)
    per_fold = []
    for test_idx in fold_idx:
        mask = np.ones(len(y), dtype=bool)
        mask[test_idx] = False
        preds = train_predict(spec, x[mask], y[mask], x[test_idx])
        oof[test_idx] = preds
        per_fold.append((weighted_f1(y[test_idx], preds), test_idx, preds))
    scores = np.array([f for f, _, _ in per_fold])
    return ClassificationResult(
        per_fold=per_fold,
        mean=float(scores.mean()),
        std=float(scores.std()),
        oof_predictions=oof,
    )


def permutation_importance(spec: ClassifierSpec, x, y, repeats=10, seed=0,
                           test_frac=0.3) -> list[tuple[int, float]]:
    """Mean weighted-F1 drop when one feature column is shuffled on a held-out
    split; returned as (feature index, importance) sorted descending."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(y))
    n_test = max(1, int(round(test_frac * len(y))))
    test_idx, train_idx = order[:n_test], order[n_test:]
    model = spec.build()
    model.fit(x[train_idx], y[train_idx])
    baseline = weighted_f1(y[test_idx], model.predict(x[test_idx]))

    importances = []
    for f in range(x.shape[1]):
        drop = 0.0
        for _ in range(repeats):
            x_perm = x[test_idx].copy()
            x_perm[:, f] = x_perm[rng.permutation(n_test), f]
            drop += baseline - weighted_f1(y[test_idx], model.predict(x_perm))
        importances.append((f, drop / repeats))
    return sorted(importances, key=lambda t: (-t[1], t[0]))
