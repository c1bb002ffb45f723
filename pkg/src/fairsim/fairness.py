"""Group fairness metrics and the certification loop over representations.

Equal opportunity is the privileged-minus-unprivileged gap in true positive
rates; equal mis-opportunity the same gap in false positive rates. The
certification loop walks the representations original -> SGD -> SGD+Ek ->
SGD+RWk and stops at the first whose out-of-fold predictions keep both gaps
within delta.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import BinaryTargetRule, GroupSpec, TabularDataset, assign_groups, binarize_target
from .errors import UndefinedRateError, ValidationError
from .kernels import KernelParams, exponential_kernel, random_walk_kernel
from .models import ClassifierSpec, cross_validate, encode_features
from .similarity import mapped_features, similarity_matrix

REPRESENTATIONS = ("original", "SGD", "SGD+Ek", "SGD+RWk")


def _rate(y_true, y_pred, s, group, outcome_true) -> float:
    mask = (s == group) & (y_true == outcome_true)
    if mask.sum() == 0:
        name = "privileged" if group == 1 else "unprivileged"
        kind = "positive" if outcome_true == 1 else "negative"
        raise UndefinedRateError(f"{name} group has no {kind}-label instances")
    return float((y_pred[mask] == 1).mean())


def equal_opportunity(y_true, y_pred, s) -> float:
    """TPR(privileged) - TPR(unprivileged)."""
    y_true, y_pred, s = (np.asarray(a) for a in (y_true, y_pred, s))
    return _rate(y_true, y_pred, s, 1, 1) - _rate(y_true, y_pred, s, 0, 1)


def equal_misopportunity(y_true, y_pred, s) -> float:
    """FPR(privileged) - FPR(unprivileged)."""
    y_true, y_pred, s = (np.asarray(a) for a in (y_true, y_pred, s))
    return _rate(y_true, y_pred, s, 1, 0) - _rate(y_true, y_pred, s, 0, 0)


@dataclass
class FairnessReport:
    representation: str
    tpr_priv: float
    tpr_unpriv: float
    fpr_priv: float
    fpr_unpriv: float
    equal_opportunity: float
    equal_misopportunity: float
    group_sizes: tuple[int, int]

    @classmethod
    def from_predictions(cls, y_true, y_pred, s, representation="") -> "FairnessReport":
        y_true, y_pred, s = (np.asarray(a) for a in (y_true, y_pred, s))
        tpr_p = _rate(y_true, y_pred, s, 1, 1)
        tpr_u = _rate(y_true, y_pred, s, 0, 1)
        fpr_p = _rate(y_true, y_pred, s, 1, 0)
        fpr_u = _rate(y_true, y_pred, s, 0, 0)
        return cls(
            representation=representation,
            tpr_priv=tpr_p, tpr_unpriv=tpr_u,
            fpr_priv=fpr_p, fpr_unpriv=fpr_u,
            equal_opportunity=tpr_p - tpr_u,
            equal_misopportunity=fpr_p - fpr_u,
            group_sizes=(int((s == 1).sum()), int((s == 0).sum())),
        )

    def to_dict(self):
        return {
            "representation": self.representation,
            "tpr_priv": self.tpr_priv, "tpr_unpriv": self.tpr_unpriv,
            "fpr_priv": self.fpr_priv, "fpr_unpriv": self.fpr_unpriv,
            "equal_opportunity": self.equal_opportunity,
            "equal_misopportunity": self.equal_misopportunity,
            "group_sizes": list(self.group_sizes),
        }


def representation_features(dataset: TabularDataset, name: str,
                            kernel_params: KernelParams = KernelParams()) -> np.ndarray:
    """Feature matrix for one of the four pipeline representations."""
    if name == "original":
        return encode_features(dataset)[0]
    sim = similarity_matrix(dataset, method="gower")
    if name == "SGD":
        return mapped_features(sim)
    ek = exponential_kernel(sim, kernel_params)
    if name == "SGD+Ek":
        return ek.values.copy()
    if name == "SGD+RWk":
        return random_walk_kernel(ek, kernel_params).values.copy()
    raise ValidationError(f"unknown representation {name!r}")


@dataclass
class CertificationOutcome:
    certified: bool
    chosen_representation: Optional[str]
    trail: list  # (representation, FairnessReport, weighted_f1)
    delta: float

    def to_dict(self):
        return {
            "certified": self.certified,
            "chosen_representation": self.chosen_representation,
            "delta": self.delta,
            "trail": [
                {"representation": r, "fairness": rep.to_dict(), "weighted_f1": f1}
                for r, rep, f1 in self.trail
            ],
        }


def certify(dataset: TabularDataset, group_spec: GroupSpec,
            binarize_rule: Optional[BinaryTargetRule],
            classifier_spec: ClassifierSpec = ClassifierSpec(),
            delta: float = 0.1,
            kernel_params: KernelParams = KernelParams(),
            folds: int = 10, seed: int = 0) -> CertificationOutcome:
    """Walk the representations in fixed order and stop at the first whose
    out-of-fold |EO| and |EMO| both fall within delta. The full trail up to
    the stopping point is always recorded; exhausting all representations
    yields certified=False rather than an exception."""
    if delta <= 0:
        raise ValidationError("delta must be positive")
    if binarize_rule is not None:
        dataset = binarize_target(dataset, binarize_rule)
    y = np.asarray(dataset.target_values)
    if set(np.unique(y).tolist()) != {0, 1}:
        raise ValidationError("certification needs a binary 0/1 target")
    s = assign_groups(dataset, group_spec)

    trail = []
    for name in REPRESENTATIONS:
        x = representation_features(dataset, name, kernel_params)
        result = cross_validate(classifier_spec, x, y, folds=folds, seed=seed)
        report = FairnessReport.from_predictions(y, result.oof_predictions, s, name)
        trail.append((name, report, result.mean))
        if (abs(report.equal_opportunity) <= delta
                and abs(report.equal_misopportunity) <= delta):
            return CertificationOutcome(True, name, trail, delta)
    return CertificationOutcome(False, None, trail, delta)
