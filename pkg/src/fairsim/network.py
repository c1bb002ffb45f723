"""Thresholded similarity networks over a weight matrix.

Edges are kept according to a policy (quantile, top-k neighbors, or absolute
threshold); under quantile/absolute policies each node additionally keeps its
single strongest incident edge so nothing ends up isolated. Also provides the
network-based complexity measures: density, clustering coefficient and hub
scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class ThresholdPolicy:
    kind: str  # "quantile" | "top_k" | "absolute"
    value: float

    def __str__(self):
        return f"{self.kind}({self.value:g})"

    @classmethod
    def quantile(cls, q=0.9):
        return cls("quantile", float(q))

    @classmethod
    def top_k(cls, t):
        return cls("top_k", int(t))

    @classmethod
    def absolute(cls, theta):
        return cls("absolute", float(theta))

    @classmethod
    def parse(cls, text: str) -> "ThresholdPolicy":
        kind, _, arg = text.partition(":")
        if kind == "quantile":
            return cls.quantile(float(arg) if arg else 0.9)
        if kind == "top_k":
            return cls.top_k(int(arg))
        if kind == "absolute":
            return cls.absolute(float(arg))
        raise ValidationError(f"unknown threshold policy {text!r}")


DEFAULT_POLICY = ThresholdPolicy.quantile(0.9)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class SimilarityNetwork:
    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]  # undirected, i < j, weight > 0
    components: tuple[tuple[int, ...], ...]
    policy: str = ""

    def adjacency(self, weighted=True) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes))
        for i, j, w in self.edges:
            a[i, j] = a[j, i] = w if weighted else 1.0
        return a

    def neighbors(self, node: int) -> list[tuple[int, float]]:
        out = []
        for i, j, w in self.edges:
            if i == node:
                out.append((j, w))
            elif j == node:
                out.append((i, w))
        return out


def _components(n: int, edges) -> tuple[tuple[int, ...], ...]:
    uf = _UnionFind(n)
    for i, j, _ in edges:
        uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(uf.find(v), []).append(v)
    return tuple(tuple(groups[r]) for r in sorted(groups))


def build_network(w, policy: ThresholdPolicy = DEFAULT_POLICY) -> SimilarityNetwork:
    """Build the thresholded graph from a symmetric nonnegative weight matrix
    (SimilarityMatrix, KernelMatrix, or ndarray); the diagonal is ignored."""
    values = getattr(w, "values", w)
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise ValidationError("network needs at least 2 nodes")
    if not np.allclose(values, values.T, atol=1e-12):
        raise ValidationError("weight matrix must be symmetric")

    iu = np.triu_indices(n, k=1)
    offdiag = values[iu]
    keep = set()
    if policy.kind == "quantile":
        theta = float(np.quantile(offdiag, policy.value))
        keep = {(i, j) for i, j, v in zip(iu[0], iu[1], offdiag) if v >= theta and v > 0}
    elif policy.kind == "absolute":
        theta = policy.value
        keep = {(i, j) for i, j, v in zip(iu[0], iu[1], offdiag) if v >= theta and v > 0}
    elif policy.kind == "top_k":
        t = int(policy.value)
        for a in range(n):
            row = values[a].copy()
            row[a] = -np.inf
            order = np.argsort(-row, kind="stable")[:t]
            for b in order:
                if row[b] > 0:
                    keep.add((min(a, int(b)), max(a, int(b))))
    else:
        raise ValidationError(f"unknown policy kind {policy.kind!r}")

    if policy.kind in ("quantile", "absolute"):
        # isolate protection: every node keeps its strongest incident edge
        degree = {a: 0 for a in range(n)}
        for i, j in keep:
            degree[i] += 1
            degree[j] += 1
        for a in range(n):
            if degree[a] == 0:
                row = values[a].copy()
                row[a] = -np.inf
                b = int(np.argmax(row))
                if row[b] > 0:
                    keep.add((min(a, b), max(a, b)))
                    degree[a] += 1
                    degree[b] += 1

    edges = tuple((int(i), int(j), float(values[i, j])) for i, j in sorted(keep))
    return SimilarityNetwork(
        n_nodes=n, edges=edges, components=_components(n, edges), policy=str(policy)
    )


def network_measures(net: SimilarityNetwork) -> dict:
    """Density, average (unweighted) clustering coefficient and hub scores.

    Hub scores are the principal eigenvector of the unweighted adjacency via
    power iteration, normalized to max 1; degree-<2 nodes contribute 0 to
    clustering.
    """
    n = net.n_nodes
    adj = net.adjacency(weighted=False)
    m = len(net.edges)
    density = 2.0 * m / (n * (n - 1)) if n > 1 else 0.0

    deg = adj.sum(axis=1)
    clustering = 0.0
    for v in range(n):
        if deg[v] < 2:
            continue
        nbrs = np.flatnonzero(adj[v])
        sub = adj[np.ix_(nbrs, nbrs)]
        closed = sub.sum() / 2.0
        possible = len(nbrs) * (len(nbrs) - 1) / 2.0
        clustering += closed / possible
    clustering /= n

    if m == 0:
        hubs = np.zeros(n)
    else:
        x = np.ones(n) / np.sqrt(n)
        for _ in range(1000):
            y = adj @ x
            norm = np.linalg.norm(y)
            if norm == 0:
                x = np.zeros(n)
                break
            y /= norm
            if np.max(np.abs(y - x)) < 1e-8:
                x = y
                break
            x = y
        hubs = np.abs(x)
        if hubs.max() > 0:
            hubs = hubs / hubs.max()
    return {"density": density, "clustering_coefficient": clustering,
            "hub_scores": hubs}


def components_by_size(net: SimilarityNetwork) -> list[tuple[int, ...]]:
    """Components sorted ascending by size, ties by smallest member index."""
    return sorted(net.components, key=lambda c: (len(c), min(c)))


# -- edge-list import/export --------------------------------------------------

NET_HEADER = "# fairsim-network v1"


def write_network(net: SimilarityNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{NET_HEADER} n={net.n_nodes} policy={net.policy}\n")
        for i, j, w in net.edges:
            fh.write(f"{i} {j} {w!r}\n")


def read_network(path) -> SimilarityNetwork:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith(NET_HEADER):
            raise ParseError(f"{path}: missing network header")
        n = policy = None
        for tok in header.split():
            if tok.startswith("n="):
                n = int(tok[2:])
            elif tok.startswith("policy="):
                policy = tok.split("=", 1)[1]
        edges = []
        for line in fh:
            if line.strip():
                i, j, w = line.split()
                edges.append((int(i), int(j), float(w)))
    edges = tuple(edges)
    return SimilarityNetwork(n_nodes=n, edges=edges,
                             components=_components(n, edges), policy=policy or "")
