"""Network-guided imputation, oversampling baselines, and graph augmentation.

Imputation fills MISSING cells from graph neighbors (weighted mean for
numerics, weighted majority for categoricals) with a 2-hop then global-column
fallback. SMOTE and group-balancing are the oversampling baselines. Graph
augmentation synthesizes nodes inside network components (feature-wise
average of a node pair), links each to its two strongest real neighbors and
labels it by clamped vector-label propagation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import MISSING, TabularDataset
from .errors import ValidationError
from .kernels import EPS_FLOOR, KernelParams, _knn_mean_distance
from .network import SimilarityNetwork, components_by_size
from .similarity import gower_similarity, similarity_matrix


# -- imputation ---------------------------------------------------------------

def _weighted_numeric(values, weights) -> float:
    w = np.asarray(weights, dtype=float)
    v = np.asarray(values, dtype=float)
    return float((v * w).sum() / w.sum())


def _weighted_majority(values, weights):
    tally: dict = {}
    for v, w in zip(values, weights):
        tally[v] = tally.get(v, 0.0) + w
    best = max(tally.values())
    # deterministic tie-break: lexicographically smallest token
    return sorted((k for k, w in tally.items() if w == best), key=str)[0]


def impute(dataset: TabularDataset, net: SimilarityNetwork):
    """Fill every MISSING cell from the similarity network.

    Fallback ladder per cell: direct neighbors observing the feature, then
    2-hop neighbors (path-weight sums), then the global column statistic.
    Observed cells are never modified. Returns (dataset, provenance) where
    provenance maps (row, column name) -> source used.
    """
    if net.n_nodes != dataset.n_rows:
        raise ValidationError("network size does not match dataset rows")
    neighbor_map = {i: net.neighbors(i) for i in range(net.n_nodes)}
    rows = [list(r) for r in dataset.rows]
    provenance = {}
    for j, col in enumerate(dataset.columns):
        column = [row[j] for row in dataset.rows]
        observed = [v for v in column if v is not MISSING]
        if not observed:
            raise ValidationError(f"column {col.name!r} has no observed values")
        if col.kind == "numeric":
            global_stat = float(np.mean([float(v) for v in observed]))
        else:
            global_stat = _weighted_majority(observed, [1.0] * len(observed))
        for i in range(dataset.n_rows):
            if dataset.rows[i][j] is not MISSING:
                continue
            vals, wts = [], []
            for nb, w in neighbor_map[i]:
                if column[nb] is not MISSING:
                    vals.append(column[nb])
                    wts.append(w)
            source = "neighbors"
            if not vals:
                two_hop: dict[int, float] = {}
                for nb, w1 in neighbor_map[i]:
                    for nb2, w2 in neighbor_map[nb]:
                        if nb2 != i and column[nb2] is not MISSING:
                            two_hop[nb2] = two_hop.get(nb2, 0.0) + w1 * w2
                vals = [column[k] for k in sorted(two_hop)]
                wts = [two_hop[k] for k in sorted(two_hop)]
                source = "two_hop"
            if vals:
                filled = (_weighted_numeric(vals, wts) if col.kind == "numeric"
                          else _weighted_majority(vals, wts))
            else:
                filled = global_stat
                source = "global"
            rows[i][j] = filled
            provenance[(i, col.name)] = source
    return dataset.with_rows(rows), provenance


# -- oversampling baselines ---------------------------------------------------

@dataclass(frozen=True)
class AugmentationPlan:
    method: str = "graph"  # "smote" | "group_balance" | "graph"
    target_counts: Optional[dict] = None  # per class/group; None -> balance up
    seed: int = 0


def _class_counts(labels) -> dict:
    counts: dict = {}
    for v in labels:
        counts[v] = counts.get(v, 0) + 1
    return counts


def _resolve_targets(counts: dict, target_counts: Optional[dict]) -> dict:
    if target_counts is None:
        top = max(counts.values())
        return {c: top for c in counts}
    for c, t in target_counts.items():
        if c in counts and t < counts[c]:
            raise ValidationError(f"target count for {c!r} below current count")
    return {c: target_counts.get(c, counts[c]) for c in counts}


def _gower_distance_matrix(dataset: TabularDataset) -> np.ndarray:
    return 1.0 - similarity_matrix(dataset, method="gower").values


def smote_oversample(dataset: TabularDataset, plan: AugmentationPlan = AugmentationPlan("smote"),
                     k_neighbors=5):
    """SMOTE on the target classes: synthetic row interpolates numeric cells
    toward one of the k same-class Gower nearest neighbors; categorical cells
    copy the seed row. Classes are brought up to the majority count unless the
    plan says otherwise. Returns (dataset, provenance)."""
    rng = np.random.default_rng(plan.seed)
    y = dataset.target_values
    counts = _class_counts(y)
    targets = _resolve_targets(counts, plan.target_counts)
    dist = _gower_distance_matrix(dataset)
    ti = dataset.column_index(dataset.target)

    new_rows = [list(r) for r in dataset.rows]
    provenance = ["original"] * dataset.n_rows
    for c in sorted(counts, key=str):
        need = targets[c] - counts[c]
        if need <= 0:
            continue
        members = [i for i, v in enumerate(y) if v == c]
        if len(members) < 2:
            raise ValidationError(f"class {c!r} has a single member; SMOTE needs >= 2")
        sub = dist[np.ix_(members, members)].copy()
        np.fill_diagonal(sub, np.inf)
        for _ in range(need):
            a = int(rng.integers(len(members)))
            order = np.argsort(sub[a], kind="stable")[:min(k_neighbors, len(members) - 1)]
            b = int(order[rng.integers(len(order))])
            lam = float(rng.uniform())
            row_a = dataset.rows[members[a]]
            row_b = dataset.rows[members[b]]
            syn = []
            for j, col in enumerate(dataset.columns):
                va, vb = row_a[j], row_b[j]
                if (col.kind == "numeric" and j != ti
                        and va is not MISSING and vb is not MISSING):
                    syn.append(float(va) + lam * (float(vb) - float(va)))
                else:
                    syn.append(va)
            new_rows.append(syn)
            provenance.append("smote")
    return dataset.with_rows(new_rows), provenance


def group_balance_oversample(dataset: TabularDataset, column: str,
                             plan: AugmentationPlan = AugmentationPlan("group_balance")):
    """Duplicate minority-group rows with Gaussian jitter (sigma = 1% of each
    numeric column's range) until the groups of ``column`` are equal in size.
    Categorical cells are copied verbatim. Returns (dataset, provenance)."""
    ci = dataset.column_index(column)
    if dataset.columns[ci].kind != "categorical":
        raise ValidationError(f"group-balance column {column!r} must be categorical")
    rng = np.random.default_rng(plan.seed)
    groups = dataset.column_values(column)
    counts = _class_counts(groups)
    if len(counts) < 2:
        raise ValidationError(f"column {column!r} needs >= 2 levels")
    targets = _resolve_targets(counts, plan.target_counts)

    sigmas = []
    for col in dataset.columns:
        if col.kind == "numeric" and col.observed_range:
            lo, hi = col.observed_range
            sigmas.append(0.01 * (hi - lo))
        else:
            sigmas.append(0.0)

    ti = dataset.column_index(dataset.target)
    new_rows = [list(r) for r in dataset.rows]
    provenance = ["original"] * dataset.n_rows
    for g in sorted(counts, key=str):
        need = targets[g] - counts[g]
        if need <= 0:
            continue
        members = [i for i, v in enumerate(groups) if v == g]
        for t in range(need):
            src = dataset.rows[members[int(rng.integers(len(members)))]]
            syn = []
            for j, col in enumerate(dataset.columns):
                v = src[j]
                if col.kind == "numeric" and j != ti and v is not MISSING and sigmas[j] > 0:
                    syn.append(float(v) + rng.normal(0.0, sigmas[j]))
                else:
                    syn.append(v)
            new_rows.append(syn)
            provenance.append("group")
    return dataset.with_rows(new_rows), provenance


# -- vector-label propagation -------------------------------------------------

@dataclass
class PropagationResult:
    distributions: np.ndarray  # n_nodes x n_classes
    labels: list               # argmax class per node (lower index on ties)
    converged: bool
    iterations: int


def vector_label_propagation(weights: np.ndarray, label_init: np.ndarray,
                             clamped: np.ndarray, classes=None,
                             tol=1e-6, max_iters=1000) -> PropagationResult:
    """Clamped weighted-average label propagation on a weighted graph.

    ``weights`` is a symmetric nonnegative n x n matrix (zero diagonal
    assumed irrelevant), ``label_init`` an n x c distribution matrix and
    ``clamped`` a boolean mask of observed nodes that never change. Updates
    are synchronous (Jacobi): each free node's distribution becomes the
    edge-weight-normalized average of its neighbors' distributions.
    """
    w = np.asarray(weights, dtype=float)
    labels = np.asarray(label_init, dtype=float).copy()
    clamped = np.asarray(clamped, dtype=bool)
    free = ~clamped
    if free.any():
        deg = w[free].sum(axis=1)
        if np.any(deg == 0):
            raise ValidationError("free node with no neighbors cannot be propagated")
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        nxt = labels.copy()
        agg = w[free] @ labels
        nxt[free] = agg / agg.sum(axis=1, keepdims=True)
        change = np.max(np.abs(nxt - labels)) if free.any() else 0.0
        labels = nxt
        if change < tol:
            converged = True
            break
    if classes is None:
        classes = list(range(labels.shape[1]))
    final = [classes[int(np.argmax(row))] for row in labels]
    return PropagationResult(distributions=labels, labels=final,
                             converged=converged, iterations=it)


# -- graph augmentation -------------------------------------------------------

def _synthetic_row(dataset: TabularDataset, a: int, b: int, rng,
                   weight_a: float, weight_b: float, ti: int):
    """Feature-wise average of two rows: numeric mean; categorical keeps the
    shared value or flips a coin biased by the parents' weights."""
    row = []
    for j, col in enumerate(dataset.columns):
        va, vb = dataset.rows[a][j], dataset.rows[b][j]
        if va is MISSING or vb is MISSING:
            row.append(va if va is not MISSING else vb)
        elif col.kind == "numeric" and j != ti:
            row.append((float(va) + float(vb)) / 2.0)
        elif va == vb:
            row.append(va)
        else:
            p = weight_a / (weight_a + weight_b) if (weight_a + weight_b) > 0 else 0.5
            row.append(va if rng.uniform() < p else vb)
    return row


def graph_augment(dataset: TabularDataset, net: SimilarityNetwork,
                  kernel_params: KernelParams = KernelParams(),
                  plan: AugmentationPlan = AugmentationPlan("graph")):
    """Grow the dataset toward the plan's per-class counts with synthetic
    nodes generated inside network components.

    Components are visited ascending by size; node pairs of a deficient class
    are sampled within a component, averaged into a synthetic row, linked to
    their two strongest real neighbors under the exponential kernel weighting
    and labeled by vector-label propagation. Original rows are never mutated.
    Returns (augmented dataset, provenance list).
    """
    if net.n_nodes != dataset.n_rows:
        raise ValidationError("network size does not match dataset rows")
    if not any(len(c) >= 2 for c in net.components):
        raise ValidationError("augmentation needs a component with >= 2 nodes")
    rng = np.random.default_rng(plan.seed)
    y = dataset.target_values
    counts = _class_counts(y)
    targets = _resolve_targets(counts, plan.target_counts)
    classes = sorted(counts, key=str)
    class_pos = {c: i for i, c in enumerate(classes)}
    ti = dataset.column_index(dataset.target)
    n = dataset.n_rows

    rho = _gower_distance_matrix(dataset)
    k = kernel_params.neighbors(n)
    knn_means = _knn_mean_distance(rho, k)
    real_w = net.adjacency(weighted=True)
    node_strength = real_w.sum(axis=1)

    def kernel_weights(rho_vec: np.ndarray) -> np.ndarray:
        mean_syn = np.sort(rho_vec, kind="stable")[:k].mean()
        eps = np.maximum((mean_syn + knn_means + rho_vec) / 3.0, EPS_FLOOR)
        return np.exp(-(rho_vec ** 2) / (kernel_params.mu * eps))

    schema = dataset.feature_columns()
    feature_rows = dataset.feature_rows()

    comp_order = components_by_size(net)
    new_rows: list[list] = []
    new_links: list[tuple[int, int, float, float]] = []  # (nb1, nb2, w1, w2)
    provenance = ["original"] * n

    def deficits():
        return {c: targets[c] - counts[c] for c in classes if targets[c] > counts[c]}

    max_rounds = 25
    for _ in range(max_rounds):
        need = deficits()
        if not need:
            break
        batch = []
        for c in sorted(need, key=str):
            pools = [[v for v in comp if y[v] == c] for comp in comp_order]
            pools = [p for p in pools if len(p) >= 2]
            if not pools:
                pool = [i for i, v in enumerate(y) if v == c]
                pools = [pool] if len(pool) >= 2 else []
            if not pools:
                continue
            for t in range(need[c]):
                pool = pools[t % len(pools)]
                a, b = rng.choice(len(pool), size=2, replace=False)
                a, b = pool[int(a)], pool[int(b)]
                syn = _synthetic_row(dataset, a, b, rng,
                                     node_strength[a], node_strength[b], ti)
                syn_features = tuple(v for j, v in enumerate(syn) if j != ti)
                rho_vec = np.array([
                    1.0 - gower_similarity(syn_features, fr, schema)
                    for fr in feature_rows
                ])
                w_vec = kernel_weights(rho_vec)
                order = np.argsort(-w_vec, kind="stable")[:2]
                batch.append((syn, int(order[0]), int(order[1]),
                              float(w_vec[order[0]]), float(w_vec[order[1]])))
        if not batch:
            break

        # propagate labels for every synthetic node generated so far plus the batch
        pending = new_links + [(b1, b2, w1, w2) for _, b1, b2, w1, w2 in batch]
        total = n + len(new_rows) + len(batch)
        w_full = np.zeros((total, total))
        w_full[:n, :n] = real_w
        for idx, (b1, b2, w1, w2) in enumerate(pending):
            s = n + idx
            w_full[s, b1] = w_full[b1, s] = w1
            w_full[s, b2] = w_full[b2, s] = w2
        label_init = np.zeros((total, len(classes)))
        for i, v in enumerate(y):
            label_init[i, class_pos[v]] = 1.0
        label_init[n:] = 1.0 / len(classes)
        clamp = np.zeros(total, dtype=bool)
        clamp[:n] = True
        prop = vector_label_propagation(w_full, label_init, clamp, classes=classes)

        base = len(new_rows)
        for offset, (syn, b1, b2, w1, w2) in enumerate(batch):
            label = prop.labels[n + base + offset]
            if counts.get(label, 0) >= targets.get(label, 0):
                continue  # overshoot: drop this candidate
            syn[ti] = label
            new_rows.append(syn)
            new_links.append((b1, b2, w1, w2))
            provenance.append("graph")
            counts[label] = counts.get(label, 0) + 1

    remaining = deficits()
    if remaining:
        warnings.warn(f"augmentation plan not fully met; remaining deficits {remaining}",
                      stacklevel=2)
    out = dataset.with_rows([list(r) for r in dataset.rows] + new_rows)
    return out, provenance
