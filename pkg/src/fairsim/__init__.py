"""Similarity-network toolkit for fairness-aware tabular ML."""

from .dataset import (
    MISSING,
    BinaryTargetRule,
    ColumnSchema,
    GroupSpec,
    TabularDataset,
    assign_groups,
    binarize_target,
    load_dataset,
    save_dataset,
)
from .fairness import certify, equal_misopportunity, equal_opportunity
from .kernels import KernelMatrix, KernelParams, exponential_kernel, random_walk_kernel
from .network import SimilarityNetwork, ThresholdPolicy, build_network
from .similarity import SimilarityMatrix, gower_similarity, mapped_features, similarity_matrix

__version__ = "0.1.0"
