"""Pairwise similarity between dataset entries.

Gower similarity for mixed-type rows, cosine similarity (rescaled to [0, 1])
for precomputed embedding vectors, and the mapped feature representation:
row a of the similarity matrix used as a's feature vector downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MISSING, ColumnSchema, TabularDataset
from .errors import ParseError, UndefinedSimilarityError, ValidationError


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray  # N x N, symmetric, unit diagonal, entries in [0, 1]

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError("similarity matrix must be square")
        if not np.allclose(v, v.T, atol=1e-12):
            raise ValidationError("similarity matrix must be symmetric")
        if not np.allclose(np.diag(v), 1.0):
            raise ValidationError("similarity matrix needs a unit diagonal")
        if v.min() < -1e-12 or v.max() > 1 + 1e-12:
            raise ValidationError("similarity entries must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EmbeddingSet:
    vectors: np.ndarray  # N x dim

    def __post_init__(self):
        if self.vectors.ndim != 2:
            raise ValidationError("embeddings must be an N x dim matrix")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(norms == 0):
            raise ValidationError("all-zero embedding vector (cosine undefined)")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


def gower_similarity(row_a, row_b, schema: list[ColumnSchema]) -> float:
    """Gower similarity of two rows under the given feature schema.

    Numeric feature: 1 - |a - b| / (max - min) with the column's global
    observed range. Categorical: 1 if equal else 0. Features with a MISSING
    cell on either side are excluded from both numerator and denominator
    (pairwise deletion); a constant numeric column contributes 1 when both
    cells are equal and is excluded otherwise.
    """
    total = 0.0
    count = 0
    for col, a, b in zip(schema, row_a, row_b):
        if a is MISSING or b is MISSING:
            continue
        if col.kind == "numeric":
            lo, hi = col.observed_range if col.observed_range else (float(a), float(a))
            rng = hi - lo
            if rng == 0:
                if a == b:
                    total += 1.0
                    count += 1
                continue
            total += 1.0 - abs(float(a) - float(b)) / rng
        else:
            total += 1.0 if a == b else 0.0
        count += 1
    if count == 0:
        raise UndefinedSimilarityError("rows share no observed feature")
    return total / count


def similarity_matrix(dataset: TabularDataset, method="gower",
                      embeddings: EmbeddingSet | None = None) -> SimilarityMatrix:
    """N x N pairwise similarity between whole dataset entries.

    method "gower" computes mixed-type Gower similarity over every column of
    the entry, target included -- the network is built over complete records,
    so the mapped representations carry the label channel transductively.
    "cosine" uses the supplied embedding vectors with raw cosine rescaled via
    (c + 1) / 2.
    """
    n = dataset.n_rows
    if method == "gower":
        schema = list(dataset.columns)
        rows = list(dataset.rows)
        m = np.ones((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                try:
                    s = gower_similarity(rows[i], rows[j], schema)
                except UndefinedSimilarityError:
                    raise UndefinedSimilarityError(
                        f"similarity undefined for row pair ({i}, {j})"
                    ) from None
                m[i, j] = s
                m[j, i] = s
        return SimilarityMatrix(m)
    if method == "cosine":
        if embeddings is None:
            raise ValidationError("cosine method requires embeddings")
        if embeddings.n != n:
            raise ValidationError("embedding count does not match dataset rows")
        v = embeddings.vectors / np.linalg.norm(embeddings.vectors, axis=1, keepdims=True)
        c = np.clip(v @ v.T, -1.0, 1.0)
        m = (c + 1.0) / 2.0
        m = (m + m.T) / 2.0
        np.fill_diagonal(m, 1.0)
        return SimilarityMatrix(m)
    raise ValidationError(f"unknown similarity method {method!r}")


def mapped_features(matrix: SimilarityMatrix) -> np.ndarray:
    """Feature rows in the similarity space: row a of the matrix is entry a's
    feature vector (self-similarity column included)."""
    return matrix.values.copy()


# -- matrix grid import/export -----------------------------------------------

SIM_HEADER = "# fairsim-similarity v1"


def write_similarity(matrix: SimilarityMatrix, path, delimiter=",") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{SIM_HEADER} n={matrix.n}\n")
        for row in matrix.values:
            fh.write(delimiter.join(repr(float(x)) for x in row) + "\n")


def read_similarity(path, delimiter=",") -> SimilarityMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith(SIM_HEADER):
            raise ParseError(f"{path}: missing similarity header")
        values = np.array([
            [float(t) for t in line.split(delimiter)]
            for line in fh if line.strip()
        ])
    return SimilarityMatrix(values)


def read_embeddings(path, delimiter=",") -> EmbeddingSet:
    vectors = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    return EmbeddingSet(vectors)
