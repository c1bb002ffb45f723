"""Classification complexity measures.

Feature-based F1-F4, neighborhood N1-N3, dimensionality T2-T4 and class
imbalance C1-C2, computed on a numeric feature matrix, plus a one-vs-one
decomposition for multiclass problems. Network-based measures (density,
clustering, hubs) come from the network module and are merged into the
report here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .network import SimilarityNetwork, network_measures


def _check_binary(y: np.ndarray):
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValidationError("measure needs at least two classes")
    if len(classes) > 2:
        raise ValidationError("binary measure got a multiclass target; use ovo_decompose")
    return classes


def feature_based(x: np.ndarray, y: np.ndarray) -> dict:
    """F1 (max Fisher ratio), F2 (overlap volume), F3 (max individual feature
    efficiency) and F4 (collective feature efficiency) for a binary problem."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    classes = _check_binary(y)
    masks = [y == c for c in classes]

    # F1: 1 / (1 + max Fisher discriminant ratio over features)
    mu = x.mean(axis=0)
    num = np.zeros(x.shape[1])
    den = np.zeros(x.shape[1])
    for m in masks:
        xc = x[m]
        mu_c = xc.mean(axis=0)
        num += m.sum() * (mu_c - mu) ** 2
        den += ((xc - mu_c) ** 2).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
    rmax = r.max()
    f1 = 0.0 if np.isinf(rmax) else 1.0 / (1.0 + rmax)

    # F2: product over features of normalized class-overlap interval length
    f2 = 1.0
    for f in range(x.shape[1]):
        lo = [x[m, f].min() for m in masks]
        hi = [x[m, f].max() for m in masks]
        overlap = max(0.0, min(hi) - max(lo))
        rng = max(hi) - min(lo)
        f2 *= 1.0 if rng == 0 else overlap / rng

    # F3 / F4: instances outside the per-feature class-overlap interval are
    # separable by that feature alone
    def separable_mask(xs, ys, f):
        m0 = ys == classes[0]
        m1 = ys == classes[1]
        if not m0.any() or not m1.any():
            return np.ones(len(ys), dtype=bool)
        lo = max(xs[m0, f].min(), xs[m1, f].min())
        hi = min(xs[m0, f].max(), xs[m1, f].max())
        return (xs[:, f] < lo) | (xs[:, f] > hi)

    n = len(y)
    counts = [separable_mask(x, y, f).sum() for f in range(x.shape[1])]
    f3 = 1.0 - max(counts) / n

    remaining = np.ones(n, dtype=bool)
    features = list(range(x.shape[1]))
    while features and remaining.any():
        xs, ys = x[remaining], y[remaining]
        best_f, best_sep = None, None
        for f in features:
            sep = separable_mask(xs, ys, f)
            if best_sep is None or sep.sum() > best_sep.sum():
                best_f, best_sep = f, sep
        if best_sep.sum() == 0:
            break
        idx = np.flatnonzero(remaining)
        remaining[idx[best_sep]] = False
        features.remove(best_f)
    f4 = remaining.sum() / n

    return {"F1": f1, "F2": f2, "F3": f3, "F4": f4}


def _prim_mst(dist: np.ndarray) -> list[tuple[int, int]]:
    """MST edges by Prim's method; distance ties broken by lower node index."""
    n = dist.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    parent = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        v = int(np.argmin(cand))  # argmin is first-of-ties -> lower index
        edges.append((int(parent[v]), v))
        in_tree[v] = True
        closer = dist[v] < best
        best[closer] = dist[v][closer]
        parent[closer] = v
    return edges


def neighborhood(x: np.ndarray | None, y: np.ndarray,
                 dist: np.ndarray | None = None) -> dict:
    """N1 (boundary fraction via MST), N2 (intra/inter 1-NN distance ratio)
    and N3 (leave-one-out 1-NN error). ``dist`` may supply a precomputed
    distance matrix (e.g. Gower) instead of Euclidean on ``x``."""
    y = np.asarray(y)
    if dist is None:
        x = np.asarray(x, dtype=float)
        diff = x[:, None, :] - x[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
    n = len(y)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise ValidationError("neighborhood measures need two classes")
    if counts.min() < 2:
        raise ValidationError("neighborhood measures need >= 2 instances per class")

    edges = _prim_mst(dist)
    boundary = set()
    for a, b in edges:
        if y[a] != y[b]:
            boundary.add(a)
            boundary.add(b)
    n1 = len(boundary) / n

    d = dist.copy().astype(float)
    np.fill_diagonal(d, np.inf)
    same = (y[:, None] == y[None, :])
    intra = np.where(same, d, np.inf).min(axis=1)
    inter = np.where(~same, d, np.inf).min(axis=1)
    inter_sum = inter.sum()
    if inter_sum == 0:
        n2 = 1.0
    else:
        r = intra.sum() / inter_sum
        n2 = r / (1.0 + r)

    nn = d.argmin(axis=1)  # first-of-ties -> lower index
    n3 = float((y[nn] != y).mean())

    return {"N1": n1, "N2": n2, "N3": n3}


def dimensionality(x: np.ndarray) -> dict:
    """T2 = d/n, T3 = d'/n and T4 = d'/d, where d' is the number of principal
    components explaining >= 95% of the variance."""
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    if n < 2:
        raise ValidationError("dimensionality measures need n >= 2")
    cov = np.cov(x, rowvar=False)
    cov = np.atleast_2d(cov)
    eigvals = np.linalg.eigvalsh(cov)[::-1]
    eigvals = np.clip(eigvals, 0.0, None)
    total = eigvals.sum()
    if total == 0:
        d_prime = 0
    else:
        cum = np.cumsum(eigvals) / total
        d_prime = int(np.searchsorted(cum, 0.95 - 1e-12) + 1)
    return {"T2": d / n, "T3": d_prime / n, "T4": d_prime / d}


def class_imbalance(y) -> dict:
    """Entropy-based C1 and imbalance-ratio-based C2; both 0 for perfectly
    balanced data, 1 for a single class."""
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    nc = len(classes)
    n = len(y)
    if nc < 2:
        return {"C1": 1.0, "C2": 1.0}
    p = counts / n
    c1 = 1.0 + (p * np.log(p)).sum() / np.log(nc)
    ir = ((nc - 1) / nc) * (counts / (n - counts)).sum()
    c2 = 1.0 - 1.0 / ir
    return {"C1": float(c1), "C2": float(c2)}


def ovo_decompose(x, y, measure_op: Callable, dist: np.ndarray | None = None):
    """Apply a binary measure to every unordered class pair and average.

    Returns (averaged dict, per-pair dict). ``measure_op`` is called as
    measure_op(x_sub, y_sub) or measure_op(None, y_sub, dist=dist_sub) when a
    precomputed distance matrix is given.
    """
    y = np.asarray(y)
    classes = sorted(np.unique(y).tolist(), key=str)
    if len(classes) < 2:
        raise ValidationError("OVO needs at least two classes")
    per_pair = {}
    sums: dict[str, float] = {}
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            mask = (y == classes[i]) | (y == classes[j])
            if (y == classes[i]).sum() == 0 or (y == classes[j]).sum() == 0:
                continue
            if dist is not None:
                sub = measure_op(None, y[mask], dist=dist[np.ix_(mask, mask)])
            else:
                sub = measure_op(np.asarray(x)[mask], y[mask])
            per_pair[f"{classes[i]}|{classes[j]}"] = sub
            for k, v in sub.items():
                sums[k] = sums.get(k, 0.0) + v
    avg = {k: v / len(per_pair) for k, v in sums.items()}
    return avg, per_pair


@dataclass
class ComplexityReport:
    measures: dict
    ovo: bool = False
    per_pair: Optional[dict] = None
    out_of_range: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"measures": self.measures, "ovo": self.ovo,
               "out_of_range": self.out_of_range}
        if self.per_pair is not None:
            out["per_pair"] = self.per_pair
        return out


def complexity_report(x: np.ndarray, y, dist: np.ndarray | None = None,
                      network: SimilarityNetwork | None = None) -> ComplexityReport:
    """All measures for one dataset representation; multiclass targets use
    OVO for the feature-based and neighborhood families. Values are clipped
    to [0, 1]; raw values outside the range are kept in ``out_of_range``."""
    y = np.asarray(y)
    multiclass = len(np.unique(y)) > 2
    measures: dict[str, float] = {}
    per_pair = None
    if multiclass:
        fb, pp_f = ovo_decompose(x, y, feature_based)
        nb, pp_n = ovo_decompose(x, y, neighborhood, dist=dist)
        per_pair = {"feature_based": pp_f, "neighborhood": pp_n}
        measures.update(fb)
        measures.update(nb)
    else:
        measures.update(feature_based(np.asarray(x), y))
        measures.update(neighborhood(x, y, dist=dist))
    measures.update(dimensionality(x))
    measures.update(class_imbalance(y))
    if network is not None:
        nm = network_measures(network)
        measures["Density"] = nm["density"]
        measures["ClsCoef"] = nm["clustering_coefficient"]
        measures["Hubs"] = float(np.mean(nm["hub_scores"]))

    out_of_range = {}
    clipped = {}
    for k, v in measures.items():
        v = float(v)
        if not np.isfinite(v):
            raise ValidationError(f"measure {k} is not finite")
        if v < 0.0 or v > 1.0:
            out_of_range[k] = v
        clipped[k] = float(np.clip(v, 0.0, 1.0))
    return ComplexityReport(measures=clipped, ovo=multiclass,
                            per_pair=per_pair, out_of_range=out_of_range)
